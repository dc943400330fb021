#pragma once

// Seeded random matrices and states.

#include <cstdint>
#include <random>

#include "modineq/core.hpp"
#include "modineq/spectral.hpp"

namespace modineq {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of trial `index` in a run with base seed `base`.
inline std::uint64_t trial_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(splitmix64(base) + index);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

/// Matrix of independent standard complex Gaussians (E|z|^2 = 1).
inline Matrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  Matrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = Complex(n(rng), n(rng));
  return g;
}

inline Matrix random_matrix(Eigen::Index d, Rng& rng) { return ginibre(d, d, rng); }

/// Full-rank density matrix G G^* / Tr, mixed with tol::kFloor of the
/// maximally mixed state, so every eigenvalue is at least 1e-9 / dim.
inline HermitianMatrix random_state(Eigen::Index dim, Rng& rng) {
  if (dim < 1) throw DimensionError("random_state: dim must be >= 1");
  const Matrix g = ginibre(dim, dim, rng);
  Matrix m = g * g.adjoint();
  m /= m.trace().real();
  return HermitianMatrix(hermitian_part(floor_state(m)));
}

inline HermitianMatrix random_state(Eigen::Index dim, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return random_state(dim, rng);
}

/// Positive definite matrix: a random state, rescaled by a random factor in
/// [0.25, 4] unless `normalize` is set.
inline Matrix random_pd(Eigen::Index dim, Rng& rng, bool normalize) {
  Matrix m = random_state(dim, rng).matrix();
  if (!normalize) m *= std::exp(std::uniform_real_distribution<double>(std::log(0.25), std::log(4.0))(rng));
  return m;
}

}  // namespace modineq
