#include <gtest/gtest.h>

#include <cstdlib>

#include "oracles.hpp"

using namespace modineq;

namespace {

class ThreadsEnv {
 public:
  explicit ThreadsEnv(const char* value) {
    if (const char* old = std::getenv("MODINEQ_THREADS")) old_ = old;
    setenv("MODINEQ_THREADS", value, 1);
  }
  ~ThreadsEnv() {
    if (old_.empty())
      unsetenv("MODINEQ_THREADS");
    else
      setenv("MODINEQ_THREADS", old_.c_str(), 1);
  }

 private:
  std::string old_;
};

TrialConfig small_config(int trials = 20) {
  TrialConfig cfg;
  cfg.trials = trials;
  cfg.seed = 7;
  return cfg;
}

}  // namespace

TEST(RandomState, OneDimensional) {
  const Matrix m = random_state(1, 5).matrix();
  ASSERT_EQ(m.rows(), 1);
  EXPECT_NEAR(std::abs(m(0, 0) - Complex(1.0)), 0.0, 1e-15);
}

TEST(RandomState, Deterministic) {
  EXPECT_EQ(random_state(4, 123).matrix(), random_state(4, 123).matrix());
  EXPECT_NE(random_state(4, 123).matrix(), random_state(4, 124).matrix());
}

TEST(RandomState, Postconditions) {
  for (Eigen::Index d : {2, 3, 4, 8, 12})
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const HermitianMatrix rho = random_state(d, seed);
      EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
      EXPECT_NEAR(rho.trace().imag(), 0.0, 1e-15);
      EXPECT_EQ(rho.herm_defect(), 0.0);
      EXPECT_GE(min_eigenvalue(rho), 1e-9 / static_cast<double>(d) * (1 - 1e-6));
    }
}

TEST(RandomState, MeanEigenvalueAndMeanState) {
  Rng rng = make_rng(2024);
  double eig_sum = 0.0;
  Matrix mean = Matrix::Zero(4, 4);
  for (int i = 0; i < 1000; ++i) {
    const Matrix rho = random_state(4, rng).matrix();
    eig_sum += eigensystem(rho).values.mean();
    mean += rho / 1000.0;
  }
  EXPECT_NEAR(eig_sum / 1000.0, 0.25, 0.02 * 0.25);
  // the ensemble is unitarily invariant, so the average state is close to I/4
  EXPECT_LT(oracle::max_abs(mean - oracle::eye(4) / 4.0), 0.02);
}

TEST(TrialSeeds, DistinctAndStable) {
  EXPECT_EQ(trial_seed(42, 0), trial_seed(42, 0));
  EXPECT_NE(trial_seed(42, 0), trial_seed(42, 1));
  EXPECT_NE(trial_seed(42, 0), trial_seed(43, 0));
}

TEST(ParallelMap, OrderAndExceptions) {
  ThreadsEnv env("4");
  const auto v = parallel_map<int>(50, [](int i) { return i * i; });
  for (int i = 0; i < 50; ++i) EXPECT_EQ(v[static_cast<std::size_t>(i)], i * i);
  EXPECT_THROW(parallel_map<int>(10,
                                 [](int i) {
                                   if (i == 7) throw DomainError("boom");
                                   return i;
                                 }),
               DomainError);
}

TEST(EqualityState, Errors) {
  EXPECT_THROW(equality_state(SpaceDims(2, 2, 2), {BlockSpec{1, 1}}, 1), DimensionError);
  EXPECT_THROW(equality_state(SpaceDims(2, 2, 2), {BlockSpec{2, 2}}, 1), DimensionError);
  EXPECT_THROW(equality_state(SpaceDims(2, 2, 2), {}, 1), DimensionError);
  EXPECT_THROW(equality_state(SpaceDims(2, 2, 2), {BlockSpec{0, 2}, BlockSpec{1, 2}}, 1), DimensionError);
}

TEST(EqualityState, SingleTrivialBlockIsProduct) {
  const SpaceDims dims(2, 1, 3);
  const EqualityState s = equality_state(dims, {BlockSpec{1, 1}}, 4);
  const Matrix expected = oracle::kron(s.ab_blocks[0], s.bc_blocks[0]);
  EXPECT_LT(oracle::max_abs(s.rho.matrix() - expected), 1e-15);
  EXPECT_DOUBLE_EQ(s.weights[0], 1.0);
}

TEST(EqualityState, TwoByTwoSplit) {
  const SpaceDims dims(2, 4, 2);
  const EqualityState s = equality_state(dims, {BlockSpec{2, 2}}, 5);
  ASSERT_EQ(s.ab_blocks[0].rows(), 4);
  ASSERT_EQ(s.bc_blocks[0].rows(), 4);
  EXPECT_LT(oracle::max_abs(s.rho.matrix() - oracle::kron(s.ab_blocks[0], s.bc_blocks[0])), 1e-15);
  EXPECT_LT(operator_norm(ssa_operator(s.rho, dims).matrix), 1e-8);
}

TEST(EqualityState, TwoBlocksGiveSsaEquality) {
  for (const SpaceDims& dims : {SpaceDims(2, 2, 2), SpaceDims(2, 3, 2), SpaceDims(2, 2, 3)})
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const EqualityState s =
          equality_state(dims, {BlockSpec{1, 1}, BlockSpec{1, dims.dB - 1}}, seed);
      EXPECT_NEAR(s.rho.trace().real(), 1.0, 1e-12);
      EXPECT_GE(min_eigenvalue(s.rho), 0.0);
      EXPECT_LT(operator_norm(ssa_operator(s.rho, dims).matrix), 1e-8);
      EXPECT_NEAR(ssa_gap(s.rho, dims), 0.0, 1e-8);
    }
}

TEST(EqualityState, BlockStructureOfAbMarginal) {
  // rho_AB is block diagonal in the B decomposition; off-block entries vanish
  const SpaceDims dims(2, 3, 2);
  const EqualityState s = equality_state(dims, {BlockSpec{1, 1}, BlockSpec{2, 1}}, 9);
  const Matrix rab = marginal(s.rho, dims, "AB");
  for (int a = 0; a < 2; ++a)
    for (int a2 = 0; a2 < 2; ++a2)
      for (int b2 : {1, 2}) EXPECT_EQ(rab(a * 3 + 0, a2 * 3 + b2), Complex(0.0));
}

TEST(Layouts, CoverFactorizations) {
  EXPECT_EQ(equality_layouts(1).size(), 1U);
  const auto four = equality_layouts(4);
  EXPECT_NE(std::find(four.begin(), four.end(), std::vector<BlockSpec>{BlockSpec{2, 2}}), four.end());
  for (const auto& layout : equality_layouts(6)) {
    Eigen::Index total = 0;
    for (const auto& b : layout) total += b.dim();
    EXPECT_EQ(total, 6);
  }
}

TEST(VerifyPsd, SsaPasses) {
  TrialConfig cfg = small_config(200);
  const VerificationReport rep = verify_psd("ssa", cfg);
  EXPECT_TRUE(rep.passed);
  EXPECT_EQ(rep.pass_count, 200);
  EXPECT_EQ(rep.records.size(), 200U);
  EXPECT_GE(rep.worst_min_eig, -1e-9);
  EXPECT_TRUE(std::is_sorted(rep.records.begin(), rep.records.end(),
                             [](const TrialRecord& a, const TrialRecord& b) { return a.seed < b.seed; }));
  for (const auto& r : rep.records) {
    EXPECT_LT(r.identities.at("ssa_gap_residual"), 1e-9);
    EXPECT_LT(r.identities.at("general_residual"), 1e-9);
    EXPECT_GE(r.identities.at("ssa_gap"), 0.0);
  }
}

TEST(VerifyPsd, DefaultBuildersPassAcrossDims) {
  for (const SpaceDims& dims : {SpaceDims(2, 2, 2), SpaceDims(2, 2, 3), SpaceDims(3, 2, 2), SpaceDims(2, 3, 2)}) {
    TrialConfig cfg = small_config(20);
    cfg.dims = dims;
    for (const auto& id : default_psd_builders()) {
      const VerificationReport rep = verify_psd(id, cfg);
      EXPECT_TRUE(rep.passed) << id << " " << dims.str() << " worst=" << rep.worst_min_eig;
    }
  }
}

TEST(VerifyPsd, UnnormalizedInputs) {
  TrialConfig cfg = small_config(20);
  cfg.normalize = false;
  for (const char* id : {"mpt", "wyd:0.5", "cs", "xhalf", "general:bures", "xpq"})
    EXPECT_TRUE(verify_psd(id, cfg).passed) << id;
}

TEST(VerifyPsd, IdentityResiduals) {
  TrialConfig cfg = small_config(10);
  for (const auto& r : verify_psd("ssa_rev", cfg).records) {
    EXPECT_LT(r.identities.at("direct_trace_residual"), 1e-9);
    EXPECT_LT(r.identities.at("general_residual"), 1e-9);
  }
  for (const auto& r : verify_psd("general:wyd:1.5", cfg).records) EXPECT_LT(r.identities.at("adjoint_residual"), 1e-9);
}

TEST(VerifyPsd, UnknownBuilder) {
  try {
    verify_psd("bogus", small_config());
    FAIL();
  } catch (const UnknownIdError& e) {
    EXPECT_NE(std::string(e.what()).find("ssa_kim"), std::string::npos);
  }
  EXPECT_THROW(verify_psd("wyd:0", small_config()), ParameterError);
  EXPECT_THROW(verify_psd("general:nope", small_config()), UnknownIdError);
}

TEST(VerifyPsd, BadConfig) {
  TrialConfig cfg = small_config();
  cfg.trials = 0;
  EXPECT_THROW(verify_psd("ssa", cfg), ParameterError);
  cfg.trials = 1;
  cfg.tol_psd = 0;
  EXPECT_THROW(verify_psd("ssa", cfg), ParameterError);
}

TEST(VerifyPsd, FailingVerdict) {
  // one failing trial fails a PSD report but is a witness for a search
  VerificationReport rep;
  rep.kind = ReportKind::kPsd;
  TrialRecord ok, bad;
  ok.seed = 2;
  ok.verdict = true;
  bad.seed = 1;
  bad.min_eig = -1.0;
  rep.records = {ok, bad};
  finalize(rep);
  EXPECT_FALSE(rep.passed);
  EXPECT_EQ(rep.records.front().seed, 1U);
  EXPECT_EQ(rep.worst_min_eig, -1.0);
  rep.kind = ReportKind::kCounterexample;
  finalize(rep);
  EXPECT_TRUE(rep.passed);
}

TEST(Equality, ForwardDirection) {
  for (const SpaceDims& dims : {SpaceDims(2, 2, 2), SpaceDims(2, 3, 2), SpaceDims(2, 4, 2)}) {
    TrialConfig cfg = small_config(12);
    cfg.dims = dims;
    const VerificationReport a = verify_equality(cfg);
    EXPECT_TRUE(a.passed) << dims.str();
    const VerificationReport b = verify_equality_gamma(cfg);
    EXPECT_TRUE(b.passed) << dims.str();
    for (const auto& n : b.notes) ADD_FAILURE() << n;
  }
}

TEST(Equality, GammaEqualToMarginalIsSpecialCase) {
  const SpaceDims dims(2, 2, 2);
  const EqualityState s = equality_state(dims, {BlockSpec{1, 1}, BlockSpec{1, 1}}, 3);
  const Matrix rab = marginal(s.rho, dims, "AB");
  EXPECT_LT(operator_norm(mpt_operator(s.rho, rab, dims).matrix), 1e-8);
  EXPECT_LT(operator_norm(xhalf_operator(s.rho, rab, dims).matrix), 1e-8);
  EXPECT_LT(operator_norm(wyd_operator(0.5, s.rho, rab, dims).matrix), 1e-8);
}

TEST(Equality, MismatchedGammaIsStrict) {
  const SpaceDims dims(2, 2, 2);
  Rng rng = make_rng(11);
  const EqualityState s = equality_state(dims, {BlockSpec{1, 1}, BlockSpec{1, 1}}, rng);
  const Matrix bad = block_matched_gamma(s, rng, true, true);
  const BuiltOperator op = mpt_operator(s.rho, bad, dims);
  EXPECT_GT(operator_norm(op.matrix), 1e-4);
  EXPECT_GE(min_eigenvalue(op.matrix), -1e-9);
}

TEST(Equality, PerturbationStaysPsd) {
  // the norm clause is checked by the acceptance run; here only positivity
  const VerificationReport rep = verify_perturbed_equality(small_config(20));
  for (const auto& r : rep.records) EXPECT_GE(r.min_eig, -1e-9);
}

TEST(Counterexamples, AllWitnessed) {
  const TrialConfig cfg = small_config(100);
  for (const VerificationReport& rep : {search_nonhermitian(cfg), search_xpq(cfg), search_h_nonconvexity(cfg)}) {
    EXPECT_TRUE(rep.passed) << rep.name;
    ASSERT_TRUE(rep.witness_seed.has_value()) << rep.name;
    EXPECT_EQ(rep.kind, ReportKind::kCounterexample);
  }
}

TEST(Counterexamples, WitnessReproducesFromSeed) {
  const TrialConfig cfg = small_config(100);
  const VerificationReport rep = search_h_nonconvexity(cfg);
  ASSERT_TRUE(rep.witness_seed);
  const TrialRecord again = h_nonconvexity_probe(*rep.witness_seed);
  EXPECT_LT(again.min_eig, -1e-8);
  EXPECT_GE(again.identities.at("trace_slack"), -1e-9);
}

TEST(HProbe, TrivialMixture) {
  Rng rng = make_rng(1);
  const Matrix r = random_state(2, rng).matrix(), g = random_state(2, rng).matrix();
  EXPECT_LT(operator_norm(h_defect(r, g, r, g).matrix), 1e-12);
}

TEST(Convexity, CatalogTrials) {
  const TrialConfig cfg = small_config(10);
  for (const auto& g : catalog()) {
    EXPECT_TRUE(convexity_trials(g.id(), cfg).passed) << g.id();
    EXPECT_TRUE(monotonicity_trials(g.id(), cfg).passed) << g.id();
  }
  EXPECT_THROW(convexity_trials("nope", cfg), UnknownIdError);
}

TEST(Convexity, ZeroWeightMixtureIsExact) {
  Rng rng = make_rng(4);
  const Matrix p1 = random_state(4, rng).matrix(), q1 = random_state(4, rng).matrix();
  const Matrix p2 = random_state(4, rng).matrix(), q2 = random_state(4, rng).matrix();
  const Matrix k = random_matrix(4, rng);
  const GFunction g = gfn::neg_log();
  const double s = 0.0;
  EXPECT_EQ(quasi_entropy(g, k, s * p1 + (1 - s) * p2, s * q1 + (1 - s) * q2), quasi_entropy(g, k, p2, q2));
}

TEST(Determinism, RepeatedRunsAndThreadCounts) {
  TrialConfig cfg = small_config(30);
  VerificationReport one, many;
  {
    ThreadsEnv env("1");
    one = verify_psd("mpt", cfg);
  }
  {
    ThreadsEnv env("4");
    many = verify_psd("mpt", cfg);
  }
  EXPECT_EQ(one, many);
  EXPECT_EQ(verify_equality_gamma(cfg), verify_equality_gamma(cfg));
}
