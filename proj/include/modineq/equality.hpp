#pragma once

// States on the equality manifold:
//   H_B = (+)_k H_{B'}^k (x) H_{B''}^k,   rho_ABC = (+)_k w_k rho_{AB'}^k (x) rho_{B''C}^k.

#include <numeric>
#include <vector>

#include "modineq/random.hpp"
#include "modineq/tensor.hpp"

namespace modineq {

/// One direct summand of H_B, of dimension b1 * b2 (B' then B'').
struct BlockSpec {
  Eigen::Index b1 = 1;
  Eigen::Index b2 = 1;
  Eigen::Index dim() const noexcept { return b1 * b2; }
  friend bool operator==(const BlockSpec&, const BlockSpec&) = default;
};

struct EqualityState {
  SpaceDims dims;
  std::vector<BlockSpec> layout;
  std::vector<double> weights;
  std::vector<Matrix> ab_blocks;  // rho_{AB'}^k, trace 1
  std::vector<Matrix> bc_blocks;  // rho_{B''C}^k, trace 1
  HermitianMatrix rho;
};

/// Places block k (acting on A (x) B'_k (x) B''_k (x) T, in that order) at
/// its offset inside H_A (x) H_B (x) H_T.
inline Matrix assemble_blocks(Eigen::Index dA, const std::vector<BlockSpec>& layout, Eigen::Index dT,
                              const std::vector<Matrix>& blocks) {
  Eigen::Index dB = 0;
  for (const auto& b : layout) dB += b.dim();
  const Eigen::Index n = dA * dB * dT;
  Matrix out = Matrix::Zero(n, n);
  Eigen::Index off = 0;
  for (std::size_t k = 0; k < layout.size(); ++k) {
    const Eigen::Index bk = layout[k].dim();
    const Matrix& m = blocks[k];
    if (m.rows() != dA * bk * dT) throw DimensionError("assemble_blocks: block size mismatch");
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const Eigen::Index ai = i / (bk * dT), bi = (i / dT) % bk, ti = i % dT;
      const Eigen::Index fi = (ai * dB + off + bi) * dT + ti;
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const Eigen::Index aj = j / (bk * dT), bj = (j / dT) % bk, tj = j % dT;
        out(fi, (aj * dB + off + bj) * dT + tj) = m(i, j);
      }
    }
    off += bk;
  }
  return out;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline std::vector<double> random_weights(std::size_t n, Rng& rng) {
  std::gamma_distribution<double> gamma(1.0, 1.0);
  std::vector<double> w(n);
  for (auto& x : w) x = gamma(rng);
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= s;
  return w;
}

inline EqualityState equality_state(const SpaceDims& dims, const std::vector<BlockSpec>& layout, Rng& rng) {
  Eigen::Index total = 0;
  for (const auto& b : layout) {
    if (b.b1 < 1 || b.b2 < 1) throw DimensionError("equality_state: block dimensions must be >= 1");
    total += b.dim();
  }
  if (layout.empty() || total != dims.dB)
    throw DimensionError("equality_state: block dimensions sum to " + std::to_string(total) + ", expected dB = " +
                         std::to_string(dims.dB));
  EqualityState s;
  s.dims = dims;
  s.layout = layout;
  s.weights = random_weights(layout.size(), rng);
  std::vector<Matrix> blocks;
  for (std::size_t k = 0; k < layout.size(); ++k) {
    s.ab_blocks.push_back(random_state(dims.dA * layout[k].b1, rng).matrix());
    s.bc_blocks.push_back(random_state(layout[k].b2 * dims.dC, rng).matrix());
    blocks.push_back(s.weights[k] * kron(s.ab_blocks[k], s.bc_blocks[k]));
  }
  s.rho = HermitianMatrix(assemble_blocks(dims.dA, layout, dims.dC, blocks));
  return s;
}

inline EqualityState equality_state(const SpaceDims& dims, const std::vector<BlockSpec>& layout, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return equality_state(dims, layout, rng);
}

/// gamma_AB = (+)_k q_k rho_{AB'}^k (x) omega_{B''}^k with fresh weights q and
/// fresh omega. With `mismatch`, the AB' factor of the first block is
/// replaced by an unrelated state.
inline Matrix block_matched_gamma(const EqualityState& s, Rng& rng, bool normalize, bool mismatch = false) {
  const auto q = random_weights(s.layout.size(), rng);
  std::vector<Matrix> blocks;
  for (std::size_t k = 0; k < s.layout.size(); ++k) {
    const Matrix ab = (mismatch && k == 0) ? random_state(s.dims.dA * s.layout[k].b1, rng).matrix() : s.ab_blocks[k];
    const Matrix omega = random_state(s.layout[k].b2, rng).matrix();
    blocks.push_back(q[k] * kron(ab, omega));
  }
  Matrix g = assemble_blocks(s.dims.dA, s.layout, 1, blocks);
  if (!normalize) g *= std::exp(std::uniform_real_distribution<double>(std::log(0.25), std::log(4.0))(rng));
  return g;
}

/// Block layouts of H_B used by the equality trials: dB blocks of size 1,
/// a single B' (x) B'' block for every factorization of dB, and for dB >= 3
/// a 1 + (dB - 1) split.
inline std::vector<std::vector<BlockSpec>> equality_layouts(Eigen::Index dB) {
  std::vector<std::vector<BlockSpec>> out;
  out.emplace_back(static_cast<std::size_t>(dB), BlockSpec{1, 1});
  for (Eigen::Index b1 = 1; b1 <= dB; ++b1)
    if (dB % b1 == 0 && dB > 1) out.push_back({BlockSpec{b1, dB / b1}});
  if (dB >= 3) out.push_back({BlockSpec{1, 1}, BlockSpec{1, dB - 1}});
  return out;
}

}  // namespace modineq
