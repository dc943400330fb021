#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace modineq;

namespace {

Matrix diag(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v.cast<Complex>().asDiagonal();
}

}  // namespace

TEST(SpaceDims, RejectsZeroFactor) {
  EXPECT_THROW(SpaceDims(2, 0, 2), DimensionError);
  EXPECT_EQ(SpaceDims(2, 3, 4).total(), 24);
  EXPECT_EQ(SpaceDims(2, 3, 4).bipartite(), SpaceDims(2, 1, 4));
}

TEST(Factors, ParsesLabels) {
  EXPECT_EQ(Factors::parse("CA"), Factors::parse("AC"));
  EXPECT_EQ(Factors::parse("AB").complement(), Factors::parse("C"));
  EXPECT_THROW(Factors::parse("AD"), UnknownIdError);
  EXPECT_THROW(Factors::parse("AA"), UnknownIdError);
  EXPECT_THROW(Factors::parse(""), UnknownIdError);
}

TEST(Embed, IdentityOnAbIsFullIdentity) {
  const SpaceDims dims(2, 3, 2);
  EXPECT_TRUE(embed(oracle::eye(6), dims, "AB").isApprox(oracle::eye(12)));
}

TEST(Embed, TrivialComplementLeavesMatrixUnchanged) {
  Rng rng = make_rng(3);
  const Matrix x = random_matrix(3, rng);
  EXPECT_EQ(embed(x, SpaceDims(1, 1, 3), "C"), x);
}

TEST(Embed, MiddleFactorByHand) {
  // I_A (x) diag(1,2) with dC = 1
  const Matrix out = embed(diag({1, 2}), SpaceDims(2, 2, 1), "B");
  EXPECT_EQ(out, diag({1, 2, 1, 2}));
}

TEST(Embed, MatchesKroneckerForEverySubset) {
  const SpaceDims dims(2, 3, 2);
  Rng rng = make_rng(11);
  const Matrix a = random_matrix(2, rng), b = random_matrix(3, rng), c = random_matrix(2, rng);
  using oracle::eye;
  using oracle::kron;
  EXPECT_LT(oracle::max_abs(embed(a, dims, "A") - kron(a, eye(6))), 1e-15);
  EXPECT_LT(oracle::max_abs(embed(b, dims, "B") - kron(kron(eye(2), b), eye(2))), 1e-15);
  EXPECT_LT(oracle::max_abs(embed(c, dims, "C") - kron(eye(6), c)), 1e-15);
  EXPECT_LT(oracle::max_abs(embed(kron(a, b), dims, "AB") - kron(kron(a, b), eye(2))), 1e-15);
  EXPECT_LT(oracle::max_abs(embed(kron(b, c), dims, "BC") - kron(eye(2), kron(b, c))), 1e-15);
  EXPECT_LT(oracle::max_abs(embed(kron(a, c), dims, "AC") - kron(kron(a, eye(3)), c)), 1e-15);
  const Matrix abc = kron(kron(a, b), c);
  EXPECT_EQ(embed(abc, dims, "ABC"), abc);
}

TEST(Embed, Errors) {
  EXPECT_THROW(embed(oracle::eye(3), SpaceDims(2, 2, 2), "AB"), DimensionError);
  EXPECT_THROW(embed(oracle::eye(2), SpaceDims(2, 2, 2), "X"), UnknownIdError);
}

TEST(PartialTrace, ProductState) {
  const SpaceDims dims(2, 3, 2);
  const Matrix ra = random_state(2, 1).matrix(), rb = random_state(3, 2).matrix(), rc = random_state(2, 3).matrix();
  const Matrix rho = oracle::kron(oracle::kron(ra, rb), rc);
  EXPECT_LT(oracle::max_abs(partial_trace(rho, dims, "A") - oracle::kron(rb, rc)), 1e-15);
  EXPECT_LT(oracle::max_abs(partial_trace(rho, dims, "AC") - rb), 1e-15);
  EXPECT_LT(oracle::max_abs(partial_trace(rho, dims, "B") - oracle::kron(ra, rc)), 1e-15);
}

TEST(PartialTrace, FullTraceIsOneByOne) {
  Rng rng = make_rng(5);
  const Matrix m = random_matrix(12, rng);
  const Matrix t = partial_trace(m, SpaceDims(2, 3, 2), "ABC");
  ASSERT_EQ(t.rows(), 1);
  EXPECT_LT(std::abs(t(0, 0) - m.trace()), 1e-12);
}

TEST(PartialTrace, AgreesWithIndexLoopOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SpaceDims dims(2, 2, 2);
    const Matrix rho = random_state(8, seed).matrix();
    EXPECT_LT(oracle::max_abs(partial_trace(rho, dims, "A") - oracle::trace_a(rho, 2, 2, 2)), 1e-15);
    EXPECT_LT(oracle::max_abs(partial_trace(rho, dims, "AB") - oracle::trace_ab(rho, 2, 2, 2)), 1e-15);
  }
  const Matrix m = random_state(18, 99).matrix();
  EXPECT_LT(oracle::max_abs(partial_trace(m, SpaceDims(3, 2, 3), "A") - oracle::trace_a(m, 3, 2, 3)), 1e-15);
}

TEST(PartialTrace, DimensionMismatch) {
  EXPECT_THROW(partial_trace(oracle::eye(7), SpaceDims(2, 2, 2), "A"), DimensionError);
}

// property: marginal consistency, adjointness with embed, positivity
TEST(PartialTraceProperties, RandomInstances) {
  const std::vector<SpaceDims> all{{2, 2, 2}, {2, 3, 2}, {3, 2, 2}, {1, 3, 2}, {2, 1, 3}};
  for (const auto& dims : all)
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      Rng rng = make_rng(seed * 31 + static_cast<std::uint64_t>(dims.total()));
      const Matrix m = random_matrix(dims.total(), rng);
      const Matrix x = random_matrix(dims.dC, rng);
      const Matrix rho = random_state(dims.total(), rng).matrix();

      const Matrix step = partial_trace(partial_trace(m, dims, "A"), SpaceDims(1, dims.dB, dims.dC), "B");
      EXPECT_LT(oracle::max_abs(step - partial_trace(m, dims, "AB")), 1e-12);

      const Complex lhs = (embed(x, dims, "C") * m).trace();
      const Complex rhs = (x * partial_trace(m, dims, "AB")).trace();
      EXPECT_LT(std::abs(lhs - rhs), 1e-12);

      EXPECT_LT(std::abs(partial_trace(m, dims, "B").trace() - m.trace()), 1e-12);
      EXPECT_GE(min_eigenvalue(partial_trace(rho, dims, "AC")), -1e-12);
      EXPECT_GE(min_eigenvalue(partial_trace(rho, dims, "A")), -1e-12);
    }
}

TEST(HermitianMatrix, RecordsDefect) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  const HermitianMatrix h(m);
  EXPECT_DOUBLE_EQ(h.herm_defect(), 0.5);
  EXPECT_DOUBLE_EQ(herm_defect(h.matrix()), h.herm_defect());
}
