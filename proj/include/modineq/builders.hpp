#pragma once

// Operators on H_C whose positive semi-definiteness follows from
// monotonicity of quasi-entropies under the partial trace Tr_A, with the
// weight operator K = I_AB (x) |phi><phi|_C.
//
// build_general is the generic construction; every named builder below is
// written out from its own closed form (logs, powers, inverses of marginals)
// so that the two routes can be compared against each other.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <initializer_list>
#include <optional>
#include <string>

#include "modineq/core.hpp"
#include "modineq/gfunction.hpp"
#include "modineq/spectral.hpp"
#include "modineq/tensor.hpp"

namespace modineq {

struct BuiltOperator {
  Matrix matrix;
  std::string builder_id;
  std::string inputs_digest;
  double herm_defect = 0.0;
  /// Filled in by verification.
  std::optional<double> min_eig;
  /// False for the failure probes, whose outputs carry no positivity claim.
  bool psd_claim = true;
};

/// FNV-1a over the raw entries of the inputs, as 16 hex digits.
inline std::string digest(std::initializer_list<const Matrix*> inputs) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const Matrix* m : inputs) {
    const std::int64_t shape[2] = {m->rows(), m->cols()};
    mix(shape, sizeof shape);
    mix(m->data(), static_cast<std::size_t>(m->size()) * sizeof(Complex));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

inline BuiltOperator make_op(Matrix m, std::string id, std::string dig, bool psd_claim = true) {
  BuiltOperator op;
  op.herm_defect = herm_defect(m);
  op.matrix = std::move(m);
  op.builder_id = std::move(id);
  op.inputs_digest = std::move(dig);
  op.psd_claim = psd_claim;
  return op;
}

inline void require_side(const Matrix& m, Eigen::Index n, const char* who, const char* what) {
  if (m.rows() != n || m.cols() != n)
    throw DimensionError(std::string(who) + ": " + what + " is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected " + std::to_string(n) + "x" + std::to_string(n));
}

inline void require_bipartite(const SpaceDims& dims, const char* who) {
  if (dims.dB != 1) throw DimensionError(std::string(who) + ": requires dB = 1, got dims (" + dims.str() + ")");
}

/// The space H_B (x) H_C seen as a tripartite space with trivial A.
inline SpaceDims bc_space(const SpaceDims& dims) { return {1, dims.dB, dims.dC}; }
/// The space H_A (x) H_B seen as a tripartite space with trivial C.
inline SpaceDims ab_space(const SpaceDims& dims) { return {dims.dA, dims.dB, 1}; }

/// g(L_X R_Y^{-1})(Y).
template <class G>
Matrix modular_term(const G& g, const Matrix& left, const Matrix& right) {
  return apply_g_modular_weighted(g, left, right, Matrix::Identity(left.rows(), left.cols()));
}

inline Matrix inverse_pd(const Matrix& m) { return pow_pd(m, -1.0); }

/// Tr_AB on the full space, returning an operator on H_C.
inline Matrix trace_ab(const Matrix& m, const SpaceDims& dims) { return partial_trace(m, dims, "AB"); }
/// Tr_B on H_B (x) H_C.
inline Matrix trace_b(const Matrix& m, const SpaceDims& dims) { return partial_trace(m, bc_space(dims), "AB"); }

}  // namespace detail

/// Tr_AB g(L_{P_AB} R_{Q_ABC}^{-1})(Q_ABC) - Tr_B g(L_{P_B} R_{Q_BC}^{-1})(Q_BC),
/// with P_B = Tr_A P_AB and Q_BC = Tr_A Q_ABC.
inline BuiltOperator build_general(const GFunction& g, const Matrix& p_ab, const Matrix& q_abc,
                                   const SpaceDims& dims) {
  detail::require_side(p_ab, dims.dA * dims.dB, "build_general", "P_AB");
  detail::require_side(q_abc, dims.total(), "build_general", "Q_ABC");
  const SpaceDims bc = detail::bc_space(dims);
  const Matrix p_b = partial_trace(p_ab, detail::ab_space(dims), "A");
  const Matrix q_bc = partial_trace(q_abc, dims, "A");

  const Matrix y1 = detail::modular_term(g, embed(p_ab, dims, "AB"), q_abc);
  const Matrix y2 = detail::modular_term(g, embed(p_b, bc, "B"), q_bc);
  return detail::make_op(detail::trace_ab(y1, dims) - detail::trace_b(y2, dims), "general:" + g.id(),
                         digest({&p_ab, &q_abc}));
}

/// Tr_AB g(L_{P_ABC} R_{Q_AB}^{-1})(Q_AB) - Tr_B g(L_{P_BC} R_{Q_B}^{-1})(Q_B):
/// the adjoint form, with the full-space argument acting on the left.
/// build_general(g, A, B) is the adjoint of build_general_rev(tilde(g), B, A).
inline BuiltOperator build_general_rev(const GFunction& g, const Matrix& p_abc, const Matrix& q_ab,
                                       const SpaceDims& dims) {
  detail::require_side(p_abc, dims.total(), "build_general_rev", "P_ABC");
  detail::require_side(q_ab, dims.dA * dims.dB, "build_general_rev", "Q_AB");
  const SpaceDims bc = detail::bc_space(dims);
  const Matrix q_b = partial_trace(q_ab, detail::ab_space(dims), "A");
  const Matrix p_bc = partial_trace(p_abc, dims, "A");

  const Matrix y1 = detail::modular_term(g, p_abc, embed(q_ab, dims, "AB"));
  const Matrix y2 = detail::modular_term(g, p_bc, embed(q_b, bc, "B"));
  return detail::make_op(detail::trace_ab(y1, dims) - detail::trace_b(y2, dims), "general_rev:" + g.id(),
                         digest({&p_abc, &q_ab}));
}

/// Marginals of a tripartite state with logs embedded in the full space.
struct LogMarginals {
  Matrix abc, ab, bc, b;
};

inline LogMarginals log_marginals(const Matrix& rho, const SpaceDims& dims) {
  return {log_pd(rho), embed(log_pd(marginal(rho, dims, "AB")), dims, "AB"),
          embed(log_pd(marginal(rho, dims, "BC")), dims, "BC"), embed(log_pd(marginal(rho, dims, "B")), dims, "B")};
}

/// Tr_AB [log rho_ABC - log rho_AB - log rho_BC + log rho_B] rho_ABC.
inline BuiltOperator ssa_operator(const Matrix& rho, const SpaceDims& dims) {
  detail::require_side(rho, dims.total(), "ssa_operator", "rho_ABC");
  const LogMarginals l = log_marginals(rho, dims);
  return detail::make_op(detail::trace_ab((l.abc - l.ab - l.bc + l.b) * rho, dims), "ssa", digest({&rho}));
}

/// Tr_AB rho_ABC [log rho_ABC - log rho_AB + log rho_B - log rho_BC].
inline BuiltOperator ssa_operator_kim(const Matrix& rho, const SpaceDims& dims) {
  detail::require_side(rho, dims.total(), "ssa_operator_kim", "rho_ABC");
  const LogMarginals l = log_marginals(rho, dims);
  return detail::make_op(detail::trace_ab(rho * (l.abc - l.ab + l.b - l.bc), dims), "ssa_kim", digest({&rho}));
}

/// Tr_AB rho_AB [log rho_AB - log rho_ABC - log rho_B + log rho_BC]. Positive
/// semi-definite, but its full trace is not the SSA gap.
inline BuiltOperator ssa_rev_operator(const Matrix& rho, const SpaceDims& dims) {
  detail::require_side(rho, dims.total(), "ssa_rev_operator", "rho_ABC");
  const LogMarginals l = log_marginals(rho, dims);
  const Matrix rho_ab = embed(marginal(rho, dims, "AB"), dims, "AB");
  return detail::make_op(detail::trace_ab(rho_ab * (l.ab - l.abc - l.b + l.bc), dims), "ssa_rev", digest({&rho}));
}

/// Tr_A rho_AC [log rho_AC - log rho_A - log rho_C], on dims with dB = 1.
inline BuiltOperator subadditivity_operator(const Matrix& rho, const SpaceDims& dims) {
  detail::require_bipartite(dims, "subadditivity_operator");
  detail::require_side(rho, dims.total(), "subadditivity_operator", "rho_AC");
  const Matrix l = log_pd(rho) - embed(log_pd(marginal(rho, dims, "A")), dims, "A") -
                   embed(log_pd(marginal(rho, dims, "C")), dims, "C");
  return detail::make_op(partial_trace(rho * l, dims, "AB"), "subadd", digest({&rho}));
}

/// Tr_AB rho_ABC [log rho_ABC - log gamma_AB - log rho_BC + log gamma_B].
inline BuiltOperator mpt_operator(const Matrix& rho, const Matrix& gamma_ab, const SpaceDims& dims) {
  detail::require_side(rho, dims.total(), "mpt_operator", "rho_ABC");
  detail::require_side(gamma_ab, dims.dA * dims.dB, "mpt_operator", "gamma_AB");
  const Matrix gamma_b = partial_trace(gamma_ab, detail::ab_space(dims), "A");
  const Matrix l = log_pd(rho) - embed(log_pd(gamma_ab), dims, "AB") -
                   embed(log_pd(marginal(rho, dims, "BC")), dims, "BC") + embed(log_pd(gamma_b), dims, "B");
  return detail::make_op(detail::trace_ab(rho * l, dims), "mpt", digest({&rho, &gamma_ab}));
}

/// (log dA) rho_C - [-Tr_A rho_AC log rho_AC + rho_C log rho_C], on dims with
/// dB = 1: the bound on the operator conditional entropy obtained from
/// mpt_operator with gamma_A = I/dA.
inline BuiltOperator cond_info_bound_operator(const Matrix& rho, const SpaceDims& dims) {
  detail::require_bipartite(dims, "cond_info_bound_operator");
  detail::require_side(rho, dims.total(), "cond_info_bound_operator", "rho_AC");
  const Matrix rho_c = marginal(rho, dims, "C");
  const Matrix cond = -partial_trace(rho * log_pd(rho), dims, "AB") + rho_c * log_pd(rho_c);
  return detail::make_op(std::log(static_cast<double>(dims.dA)) * rho_c - cond, "cond_info_bound", digest({&rho}));
}

/// Tr_A rho_AC [log rho_AC - log gamma_AC - log rho_C + log gamma_C], dB = 1.
/// Not Hermitian in general; returned raw.
inline BuiltOperator non_hermitian_probe(const Matrix& rho, const Matrix& gamma, const SpaceDims& dims) {
  detail::require_bipartite(dims, "non_hermitian_probe");
  detail::require_side(rho, dims.total(), "non_hermitian_probe", "rho_AC");
  detail::require_side(gamma, dims.total(), "non_hermitian_probe", "gamma_AC");
  const Matrix l = log_pd(rho) - log_pd(gamma) - embed(log_pd(marginal(rho, dims, "C")), dims, "C") +
                   embed(log_pd(marginal(gamma, dims, "C")), dims, "C");
  return detail::make_op(partial_trace(rho * l, dims, "AB"), "nonherm_probe", digest({&rho, &gamma}), false);
}

/// (1/(t(1-t))) [Tr_B rho_BC^{1-t} gamma_B^t - Tr_AB rho_ABC^{1-t} gamma_AB^t].
/// This is build_general(wyd(t), gamma_AB, rho_ABC) after the rho_C terms cancel.
inline BuiltOperator wyd_operator(double t, const Matrix& rho, const Matrix& gamma_ab, const SpaceDims& dims) {
  gfn::check_wyd_param(t);
  detail::require_side(rho, dims.total(), "wyd_operator", "rho_ABC");
  detail::require_side(gamma_ab, dims.dA * dims.dB, "wyd_operator", "gamma_AB");
  const SpaceDims bc = detail::bc_space(dims);
  const Matrix gamma_b = partial_trace(gamma_ab, detail::ab_space(dims), "A");
  const Matrix rho_bc = marginal(rho, dims, "BC");
  const Matrix abc = pow_pd(rho, 1.0 - t) * embed(pow_pd(gamma_ab, t), dims, "AB");
  const Matrix b = pow_pd(rho_bc, 1.0 - t) * embed(pow_pd(gamma_b, t), bc, "B");
  const double c = 1.0 / (t * (1.0 - t));
  return detail::make_op(c * (detail::trace_b(b, dims) - detail::trace_ab(abc, dims)),
                         "wyd:" + gfn::detail::format_param(t), digest({&rho, &gamma_ab}));
}

/// Tr_AB P_AB Q_ABC^{-1} P_AB - Tr_B P_B Q_BC^{-1} P_B.
inline BuiltOperator cs_operator(const Matrix& p_ab, const Matrix& q, const SpaceDims& dims) {
  detail::require_side(p_ab, dims.dA * dims.dB, "cs_operator", "P_AB");
  detail::require_side(q, dims.total(), "cs_operator", "Q_ABC");
  const SpaceDims bc = detail::bc_space(dims);
  const Matrix p = embed(p_ab, dims, "AB");
  const Matrix p_b = embed(partial_trace(p_ab, detail::ab_space(dims), "A"), bc, "B");
  const Matrix lhs = detail::trace_ab(p * detail::inverse_pd(q) * p, dims);
  const Matrix rhs = detail::trace_b(p_b * detail::inverse_pd(marginal(q, dims, "BC")) * p_b, dims);
  return detail::make_op(lhs - rhs, "cs", digest({&p_ab, &q}));
}

/// Tr_A X_AC^* Q_AC^{-1} X_AC - X_C^* Q_C^{-1} X_C with X_C = Tr_A X_AC, dB = 1.
inline BuiltOperator partial_trace_cs(const Matrix& x, const Matrix& q, const SpaceDims& dims) {
  detail::require_bipartite(dims, "partial_trace_cs");
  detail::require_side(x, dims.total(), "partial_trace_cs", "X_AC");
  detail::require_side(q, dims.total(), "partial_trace_cs", "Q_AC");
  const Matrix x_c = marginal(x, dims, "C");
  const Matrix lhs = partial_trace(x.adjoint() * detail::inverse_pd(q) * x, dims, "AB");
  const Matrix rhs = x_c.adjoint() * detail::inverse_pd(marginal(q, dims, "C")) * x_c;
  return detail::make_op(lhs - rhs, "lr_cs", digest({&x, &q}));
}

/// (L_P + t R_Q)^{-1}(X) = sum_ij <u_i, X v_j> / (lambda_i + t mu_j) u_i v_j^*.
inline Matrix xpq_resolvent(const Matrix& x, const Matrix& p, const Matrix& q, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ParameterError("xpq: t must be a positive real");
  return JointSpectrum(p, q).apply([t](double l, double m) { return 1.0 / (l + t * m); }, x);
}

/// X^* (L_P + t R_Q)^{-1}(X), the operator whose trace is xpq_value.
inline Matrix xpq_operator(const Matrix& x, const Matrix& p, const Matrix& q, double t) {
  return x.adjoint() * xpq_resolvent(x, p, q, t);
}

/// Tr X^* (L_P + t R_Q)^{-1}(X); jointly convex in (X, P, Q).
inline double xpq_value(const Matrix& x, const Matrix& p, const Matrix& q, double t) {
  return xpq_operator(x, p, q, t).trace().real();
}

/// Midpoint-convexity defect of the untraced xpq map:
/// [F(X1,P1,Q1) + F(X2,P2,Q2)]/2 - F(mean X, mean P, mean Q).
inline BuiltOperator xpq_operator_probe(const Matrix& x1, const Matrix& p1, const Matrix& q1, const Matrix& x2,
                                        const Matrix& p2, const Matrix& q2, double t) {
  const Matrix avg = 0.5 * (xpq_operator(x1, p1, q1, t) + xpq_operator(x2, p2, q2, t));
  const Matrix mixed = xpq_operator(0.5 * (x1 + x2), 0.5 * (p1 + p2), 0.5 * (q1 + q2), t);
  return detail::make_op(avg - mixed, "xpq_probe", digest({&x1, &p1, &q1, &x2, &p2, &q2}), false);
}

/// Tr_AB gamma_AB^{-1/2} [rho_ABC - gamma_AB] rho_ABC^{1/2}
///   - Tr_B gamma_B^{-1/2} [rho_BC - gamma_B] rho_BC^{1/2}.
inline BuiltOperator xhalf_operator(const Matrix& rho, const Matrix& gamma_ab, const SpaceDims& dims) {
  detail::require_side(rho, dims.total(), "xhalf_operator", "rho_ABC");
  detail::require_side(gamma_ab, dims.dA * dims.dB, "xhalf_operator", "gamma_AB");
  const SpaceDims bc = detail::bc_space(dims);
  const Matrix gamma_b = partial_trace(gamma_ab, detail::ab_space(dims), "A");
  const Matrix rho_bc = marginal(rho, dims, "BC");
  const Matrix g = embed(gamma_ab, dims, "AB");
  const Matrix gb = embed(gamma_b, bc, "B");
  const Matrix abc = embed(pow_pd(gamma_ab, -0.5), dims, "AB") * (rho - g) * pow_pd(rho, 0.5);
  const Matrix b = embed(pow_pd(gamma_b, -0.5), bc, "B") * (rho_bc - gb) * pow_pd(rho_bc, 0.5);
  return detail::make_op(detail::trace_ab(abc, dims) - detail::trace_b(b, dims), "xhalf", digest({&rho, &gamma_ab}));
}

/// h(rho, gamma) = rho^{1/2} (log rho - log gamma) rho^{1/2}.
inline Matrix h_operator(const Matrix& rho, const Matrix& gamma) {
  const Matrix s = pow_pd(rho, 0.5);
  return s * (log_pd(rho) - log_pd(gamma)) * s;
}

/// Midpoint joint-convexity defect of h; its trace is the defect of the
/// relative entropy, which is nonnegative.
inline BuiltOperator h_defect(const Matrix& rho1, const Matrix& gamma1, const Matrix& rho2, const Matrix& gamma2) {
  const Matrix avg = 0.5 * (h_operator(rho1, gamma1) + h_operator(rho2, gamma2));
  const Matrix mixed = h_operator(0.5 * (rho1 + rho2), 0.5 * (gamma1 + gamma2));
  return detail::make_op(avg - mixed, "h_probe", digest({&rho1, &gamma1, &rho2, &gamma2}), false);
}

}  // namespace modineq
