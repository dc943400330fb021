#pragma once

// Matrix functions of Hermitian matrices and functions of the relative
// modular operator Delta_{P,Q} = L_P R_Q^{-1}.
//
// With P u_i = lambda_i u_i and Q v_j = mu_j v_j, the rank-one maps
// X -> u_i u_i^* X v_j v_j^* are a complete family of orthogonal spectral
// projections of L_P and R_Q simultaneously, so any function phi(L_P, R_Q)
// acts on X by multiplying the (i,j) entry of U^* X V by phi(lambda_i, mu_j).

#include <cmath>
#include <functional>
#include <string>

#include "modineq/core.hpp"

namespace modineq {

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
struct Eigensystem {
  Vector values;
  Matrix vectors;

  Eigen::Index dim() const noexcept { return values.size(); }
  double min() const { return values.size() ? values.minCoeff() : 0.0; }
  double max() const { return values.size() ? values.maxCoeff() : 0.0; }

  Matrix reconstruct() const { return vectors * values.cast<Complex>().asDiagonal() * vectors.adjoint(); }
};

/// Decomposes the Hermitian part of `m`. Round-off asymmetry up to
/// tol::kSpectral is removed; anything larger is an error.
inline Eigensystem eigensystem(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("eigensystem: matrix is not square");
  const double defect = herm_defect(m);
  const double scale = std::max(1.0, m.size() ? m.cwiseAbs().maxCoeff() : 0.0);
  if (defect > tol::kSpectral * scale)
    throw DomainError("eigensystem: matrix is not Hermitian (defect " + std::to_string(defect) + ")");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(m));
  if (solver.info() != Eigen::Success) throw DomainError("eigensystem: eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline double min_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::SelfAdjointEigenSolver<Matrix>(hermitian_part(m), Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

/// Largest singular value.
inline double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

/// Mixes M with a multiple of the identity so that every eigenvalue is at
/// least eps * Tr(M) / d: M <- (1 - eps) M + eps Tr(M) I / d.
inline Matrix floor_state(const Matrix& m, double eps = tol::kFloor) {
  const Eigen::Index d = m.rows();
  const double tr = m.trace().real();
  return (1.0 - eps) * m + (eps * tr / static_cast<double>(d)) * Matrix::Identity(d, d);
}

/// U f(Lambda) U^*. Throws DomainError if f is not finite somewhere on the spectrum.
inline Matrix matrix_function(const Eigensystem& es, const std::function<double(double)>& f) {
  Vector fv(es.dim());
  for (Eigen::Index i = 0; i < es.dim(); ++i) {
    fv(i) = f(es.values(i));
    if (!std::isfinite(fv(i)))
      throw DomainError("matrix_function: function not finite at eigenvalue " + std::to_string(es.values(i)));
  }
  return es.vectors * fv.cast<Complex>().asDiagonal() * es.vectors.adjoint();
}

inline Matrix matrix_function(const Matrix& m, const std::function<double(double)>& f) {
  return matrix_function(eigensystem(m), f);
}

inline Eigensystem positive_eigensystem(const Matrix& m, const char* who) {
  Eigensystem es = eigensystem(m);
  if (es.dim() > 0 && !(es.min() > 0.0))
    throw DomainError(std::string(who) + ": matrix is not positive definite (min eigenvalue " +
                      std::to_string(es.min()) + ")");
  return es;
}

inline Matrix log_pd(const Matrix& m) {
  return matrix_function(positive_eigensystem(m, "log"), [](double x) { return std::log(x); });
}

inline Matrix pow_pd(const Matrix& m, double p) {
  return matrix_function(positive_eigensystem(m, "pow"), [p](double x) { return std::pow(x, p); });
}

/// Von Neumann entropy -Tr rho log rho from the eigenvalues of rho.
inline double entropy(const Matrix& rho) {
  const Eigensystem es = eigensystem(rho);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.dim(); ++i) {
    const double l = es.values(i);
    if (l > 0.0) s -= l * std::log(l);
  }
  return s;
}

/// Pair of eigensystems of P (acting by left multiplication) and Q (acting
/// by right multiplication).
class JointSpectrum {
 public:
  JointSpectrum(const Matrix& p, const Matrix& q)
      : p_(positive_eigensystem(p, "modular action (P)")), q_(positive_eigensystem(q, "modular action (Q)")) {
    if (p.rows() != q.rows()) throw DimensionError("modular action: P and Q differ in dimension");
  }

  const Eigensystem& left() const noexcept { return p_; }
  const Eigensystem& right() const noexcept { return q_; }
  Eigen::Index dim() const noexcept { return p_.dim(); }

  /// Matrix of phi(lambda_i, mu_j).
  Matrix weights(const std::function<double(double, double)>& phi) const {
    Matrix w(dim(), dim());
    for (Eigen::Index i = 0; i < dim(); ++i)
      for (Eigen::Index j = 0; j < dim(); ++j) {
        const double v = phi(p_.values(i), q_.values(j));
        if (!std::isfinite(v))
          throw DomainError("modular action: function not finite at spectral pair (" +
                            std::to_string(p_.values(i)) + ", " + std::to_string(q_.values(j)) + ")");
        w(i, j) = v;
      }
    return w;
  }

  /// phi(L_P, R_Q)(X).
  Matrix apply(const std::function<double(double, double)>& phi, const Matrix& x) const {
    if (x.rows() != dim() || x.cols() != dim()) throw DimensionError("modular action: X has the wrong size");
    const Matrix coeffs = p_.vectors.adjoint() * x * q_.vectors;
    return p_.vectors * weights(phi).cwiseProduct(coeffs) * q_.vectors.adjoint();
  }

 private:
  Eigensystem p_;
  Eigensystem q_;
};

/// g tabulated on the spectrum of Delta_{P,Q}: gvals(i,j) = g(lambda_i / mu_j).
class ModularAction {
 public:
  template <class G>
  ModularAction(const G& g, const Matrix& p, const Matrix& q)
      : spectra_(p, q), gvals_(spectra_.weights([&g](double l, double m) { return g(l / m); })) {}

  const JointSpectrum& spectra() const noexcept { return spectra_; }
  const Matrix& gvals() const noexcept { return gvals_; }

  Matrix operator()(const Matrix& x) const {
    if (x.rows() != spectra_.dim() || x.cols() != spectra_.dim())
      throw DimensionError("modular action: X has the wrong size");
    const Matrix& u = spectra_.left().vectors;
    const Matrix& v = spectra_.right().vectors;
    return u * gvals_.cwiseProduct(u.adjoint() * x * v) * v.adjoint();
  }

 private:
  JointSpectrum spectra_;
  Matrix gvals_;
};

/// g(L_P R_Q^{-1})(X).
template <class G>
Matrix apply_g_modular(const G& g, const Matrix& p, const Matrix& q, const Matrix& x) {
  return ModularAction(g, p, q)(x);
}

/// g(L_P R_Q^{-1}) R_Q (X) = g(L_P R_Q^{-1})(X Q).
template <class G>
Matrix apply_g_modular_weighted(const G& g, const Matrix& p, const Matrix& q, const Matrix& x) {
  const JointSpectrum js(p, q);
  return js.apply([&g](double l, double m) { return g(l / m) * m; }, x);
}

/// Dense d^2 x d^2 matrix of g(L_P R_Q^{-1}) under column-stacking
/// vectorization, where L_P R_Q^{-1} becomes (Q^{-1})^T (x) P. That Kronecker
/// product is Hermitian positive definite, so g is applied through its own
/// eigendecomposition, independently of the factored route above.
template <class G>
Matrix modular_superoperator(const G& g, const Matrix& p, const Matrix& q) {
  if (p.rows() != q.rows() || p.rows() != p.cols() || q.rows() != q.cols())
    throw DimensionError("modular_superoperator: P and Q must be square of equal size");
  positive_eigensystem(p, "modular_superoperator (P)");
  positive_eigensystem(q, "modular_superoperator (Q)");
  const Eigen::Index d = p.rows();
  const Matrix qinv_t = q.inverse().transpose();
  Matrix kron(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) kron.block(i * d, j * d, d, d) = qinv_t(i, j) * p;
  return matrix_function(hermitian_part(kron), [&g](double x) { return g(x); });
}

/// Column-stacking vectorization.
inline Eigen::VectorXcd vec(const Matrix& x) {
  return Eigen::Map<const Eigen::VectorXcd>(x.data(), x.size());
}

inline Matrix unvec(const Eigen::VectorXcd& v, Eigen::Index rows) {
  return Eigen::Map<const Matrix>(v.data(), rows, v.size() / rows);
}

/// H_g(K, P, Q) = Tr K^* g(L_P R_Q^{-1})(K Q)
///             = sum_ij g(lambda_i / mu_j) mu_j |<u_i, K v_j>|^2.
template <class G>
double quasi_entropy(const G& g, const Matrix& k, const Matrix& p, const Matrix& q) {
  const JointSpectrum js(p, q);
  if (k.rows() != js.dim() || k.cols() != js.dim()) throw DimensionError("quasi_entropy: K has the wrong size");
  const Matrix coeffs = js.left().vectors.adjoint() * k * js.right().vectors;
  const Matrix w = js.weights([&g](double l, double m) { return g(l / m) * m; });
  double h = 0.0;
  for (Eigen::Index i = 0; i < js.dim(); ++i)
    for (Eigen::Index j = 0; j < js.dim(); ++j) h += w(i, j).real() * std::norm(coeffs(i, j));
  return h;
}

}  // namespace modineq
