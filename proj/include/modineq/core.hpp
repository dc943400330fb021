#pragma once

// Shared types, tolerances and error classes.

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace modineq {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;

inline constexpr const char* kVersion = "0.3.0";

/// Tolerance hierarchy. Each level absorbs the numerical error of the one
/// above it, so a check at one level never depends on a looser one.
namespace tol {
inline constexpr double kConstruction = 1e-12;  // traces, marginals, embeddings
inline constexpr double kSpectral = 1e-10;      // eigen reconstruction, matrix functions
inline constexpr double kInequality = 1e-9;     // PSD slack
inline constexpr double kEquality = 1e-8;       // equality detection by norm
inline constexpr double kFloor = 1e-9;          // positivity floor mixing weight
}  // namespace tol

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix sizes that do not agree with the tensor factorization.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Spectrum (or a scalar argument) outside the domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid function parameter, e.g. a WYD exponent outside [-1,2].
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Unknown function, builder or factor label.
class UnknownIdError : public Error {
 public:
  using Error::Error;
};

/// Max-norm of the anti-Hermitian part (M - M^*)/2.
inline double herm_defect(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("herm_defect: matrix is not square");
  if (m.size() == 0) return 0.0;
  return (0.5 * (m - m.adjoint())).cwiseAbs().maxCoeff();
}

inline Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

/// Square complex matrix together with the Hermiticity defect measured when
/// it was constructed. Non-Hermitian input is accepted; callers decide what
/// defect they tolerate.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(Matrix m) : m_(std::move(m)), defect_(modineq::herm_defect(m_)) {}

  const Matrix& matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }
  double herm_defect() const noexcept { return defect_; }
  Complex trace() const { return m_.trace(); }

  operator const Matrix&() const noexcept { return m_; }  // NOLINT(google-explicit-constructor)

 private:
  Matrix m_;
  double defect_ = 0.0;
};

}  // namespace modineq
