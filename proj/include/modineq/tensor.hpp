#pragma once

// Tensor-product bookkeeping for H_A (x) H_B (x) H_C.
//
// Composite index convention: (a,b,c) -> a*dB*dC + b*dC + c, i.e. factor A
// varies slowest. Factors of dimension 1 are ordinary factors; bipartite
// formulas are the dB = 1 case of the tripartite ones.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "modineq/core.hpp"

namespace modineq {

struct SpaceDims {
  Eigen::Index dA = 1;
  Eigen::Index dB = 1;
  Eigen::Index dC = 1;

  SpaceDims() = default;
  SpaceDims(Eigen::Index a, Eigen::Index b, Eigen::Index c) : dA(a), dB(b), dC(c) {
    if (a < 1 || b < 1 || c < 1)
      throw DimensionError("SpaceDims: every factor dimension must be >= 1");
  }

  Eigen::Index total() const noexcept { return dA * dB * dC; }
  std::array<Eigen::Index, 3> as_array() const noexcept { return {dA, dB, dC}; }

  /// Same factorization with H_B collapsed to a single dimension.
  SpaceDims bipartite() const { return {dA, 1, dC}; }

  std::string str() const {
    return std::to_string(dA) + "," + std::to_string(dB) + "," + std::to_string(dC);
  }

  friend bool operator==(const SpaceDims&, const SpaceDims&) = default;
};

/// Set of tensor factors, as a bitmask over {A, B, C}.
class Factors {
 public:
  static constexpr std::uint8_t kA = 1, kB = 2, kC = 4;

  constexpr Factors() = default;
  constexpr explicit Factors(std::uint8_t bits) : bits_(bits & 7U) {}

  /// Parses labels such as "A", "BC" or "ABC" (any order, no repeats).
  static Factors parse(std::string_view label) {
    std::uint8_t bits = 0;
    for (char ch : label) {
      std::uint8_t f = 0;
      switch (ch) {
        case 'A': case 'a': f = kA; break;
        case 'B': case 'b': f = kB; break;
        case 'C': case 'c': f = kC; break;
        default: throw UnknownIdError("unknown factor label '" + std::string(label) + "'");
      }
      if (bits & f) throw UnknownIdError("repeated factor in label '" + std::string(label) + "'");
      bits |= f;
    }
    if (bits == 0) throw UnknownIdError("empty factor label");
    return Factors(bits);
  }

  constexpr bool contains(int factor_index) const noexcept {
    return (bits_ >> factor_index) & 1U;
  }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr Factors complement() const noexcept { return Factors(static_cast<std::uint8_t>(~bits_ & 7U)); }
  constexpr std::uint8_t bits() const noexcept { return bits_; }

  Eigen::Index dim(const SpaceDims& dims) const noexcept {
    const auto d = dims.as_array();
    Eigen::Index n = 1;
    for (int k = 0; k < 3; ++k)
      if (contains(k)) n *= d[k];
    return n;
  }

  std::string str() const {
    std::string s;
    if (contains(0)) s += 'A';
    if (contains(1)) s += 'B';
    if (contains(2)) s += 'C';
    return s;
  }

  friend constexpr bool operator==(Factors, Factors) = default;

 private:
  std::uint8_t bits_ = 0;
};

namespace detail {

// Composite index of the factors in `sel`, keeping the A,B,C order.
inline Eigen::Index sub_index(const std::array<Eigen::Index, 3>& idx,
                              const std::array<Eigen::Index, 3>& d, Factors sel) {
  Eigen::Index r = 0;
  for (int k = 0; k < 3; ++k)
    if (sel.contains(k)) r = r * d[k] + idx[k];
  return r;
}

inline std::array<Eigen::Index, 3> split(Eigen::Index i, const std::array<Eigen::Index, 3>& d) {
  return {i / (d[1] * d[2]), (i / d[2]) % d[1], i % d[2]};
}

inline void require_full(const Matrix& m, const SpaceDims& dims, const char* what) {
  if (m.rows() != dims.total() || m.cols() != dims.total())
    throw DimensionError(std::string(what) + ": matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected side " +
                         std::to_string(dims.total()) + " for dims (" + dims.str() + ")");
}

}  // namespace detail

/// M on the factors `subset`, tensored with the identity on the others.
inline Matrix embed(const Matrix& m, const SpaceDims& dims, Factors subset) {
  if (subset.empty()) throw UnknownIdError("embed: empty factor subset");
  const Eigen::Index ds = subset.dim(dims);
  if (m.rows() != ds || m.cols() != ds)
    throw DimensionError("embed: matrix side " + std::to_string(m.rows()) + " does not match factors " +
                         subset.str() + " of dims (" + dims.str() + ")");
  const auto d = dims.as_array();
  const Factors rest = subset.complement();
  const Eigen::Index n = dims.total();
  Matrix out = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ii = detail::split(i, d);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto jj = detail::split(j, d);
      if (detail::sub_index(ii, d, rest) != detail::sub_index(jj, d, rest)) continue;
      out(i, j) = m(detail::sub_index(ii, d, subset), detail::sub_index(jj, d, subset));
    }
  }
  return out;
}

inline Matrix embed(const Matrix& m, const SpaceDims& dims, std::string_view subset) {
  return embed(m, dims, Factors::parse(subset));
}

/// Traces out the factors in `traced`; the result acts on the remaining
/// factors in A,B,C order. Tracing all three gives the 1x1 matrix [Tr M].
inline Matrix partial_trace(const Matrix& m, const SpaceDims& dims, Factors traced) {
  detail::require_full(m, dims, "partial_trace");
  if (traced.empty()) throw UnknownIdError("partial_trace: nothing to trace");
  const auto d = dims.as_array();
  const Factors keep = traced.complement();
  const Eigen::Index dk = keep.dim(dims);
  const Eigen::Index n = dims.total();
  Matrix out = Matrix::Zero(dk, dk);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ii = detail::split(i, d);
    const Eigen::Index ti = detail::sub_index(ii, d, traced);
    const Eigen::Index ki = detail::sub_index(ii, d, keep);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto jj = detail::split(j, d);
      if (detail::sub_index(jj, d, traced) != ti) continue;
      out(ki, detail::sub_index(jj, d, keep)) += m(i, j);
    }
  }
  return out;
}

inline Matrix partial_trace(const Matrix& m, const SpaceDims& dims, std::string_view traced) {
  return partial_trace(m, dims, Factors::parse(traced));
}

/// Reduced matrix on `kept` (the complement is traced out).
inline Matrix marginal(const Matrix& m, const SpaceDims& dims, std::string_view kept) {
  const Factors keep = Factors::parse(kept);
  if (keep == Factors(7)) {
    detail::require_full(m, dims, "marginal");
    return m;
  }
  return partial_trace(m, dims, keep.complement());
}

}  // namespace modineq
