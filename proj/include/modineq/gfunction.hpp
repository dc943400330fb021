#pragma once

// Catalog of operator convex functions g on (0, inf) and the transforms
// between them: g~(x) = x g(1/x), the symmetrization g + g~, and the map
// k -> (1 - x)^2 k(x) from symmetric kernels.

#include <charconv>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "modineq/core.hpp"

namespace modineq {

class GFunction {
 public:
  using Fn = std::function<double(double)>;

  GFunction(std::string id, Fn eval, std::string description, std::optional<double> param = std::nullopt)
      : id_(std::move(id)),
        param_(param),
        eval_(std::make_shared<const Fn>(std::move(eval))),
        description_(std::move(description)),
        value_at_one_((*eval_)(1.0)) {}

  double operator()(double x) const { return (*eval_)(x); }

  const std::string& id() const noexcept { return id_; }
  std::optional<double> param() const noexcept { return param_; }
  const std::string& description() const noexcept { return description_; }
  /// g(1). Catalog entries all have g(1) = 0; nothing here enforces it.
  double value_at_one() const noexcept { return value_at_one_; }

 private:
  std::string id_;
  std::optional<double> param_;
  std::shared_ptr<const Fn> eval_;
  std::string description_;
  double value_at_one_;
};

namespace gfn {

inline GFunction neg_log() {
  return {"neg_log", [](double x) { return -std::log(x); }, "-log x; relative entropy"};
}

inline GFunction x_log_x() {
  return {"x_log_x", [](double x) { return x * std::log(x); }, "x log x; tilde of -log x"};
}

inline void check_wyd_param(double t) {
  if (!std::isfinite(t) || t < -1.0 || t > 2.0)
    throw ParameterError("wyd: t = " + std::to_string(t) + " is outside [-1,2]");
  if (t == 0.0 || t == 1.0)
    throw ParameterError("wyd: t must avoid {0,1} (use neg_log / x_log_x for the limits)");
}

namespace detail {
inline std::string format_param(double t) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, t);
  return std::string(buf, res.ptr);
}
}  // namespace detail

/// Wigner-Yanase-Dyson g_t(x) = (1 - x^t) / (t (1 - t)), t in [-1,2] \ {0,1}.
inline GFunction wyd(double t) {
  check_wyd_param(t);
  const double c = 1.0 / (t * (1.0 - t));
  return {"wyd:" + detail::format_param(t), [t, c](double x) { return c * (1.0 - std::pow(x, t)); },
          "Wigner-Yanase-Dyson (1 - x^t)/(t(1-t))", t};
}

/// (x - 1)^2; equivalent to x^2 in the builders since linear terms cancel.
inline GFunction square_diff() {
  return {"square_diff", [](double x) { return (x - 1.0) * (x - 1.0); }, "(x - 1)^2"};
}

/// x^{-1/2} - x^{1/2}; its symmetrization is (1 - x)^2 x^{-1/2}.
inline GFunction inv_sqrt() {
  return {"inv_sqrt", [](double x) { return 1.0 / std::sqrt(x) - std::sqrt(x); }, "x^{-1/2} - x^{1/2}"};
}

/// 2 (1 - x)^2 / (1 + x), from the smallest symmetric kernel k = 2/(1+x).
inline GFunction bures() {
  return {"bures", [](double x) { return 2.0 * (1.0 - x) * (1.0 - x) / (1.0 + x); }, "2(1 - x)^2/(1 + x)"};
}

}  // namespace gfn

/// g~(x) = x g(1/x).
inline GFunction tilde(const GFunction& g) {
  return {"tilde:" + g.id(), [g](double x) { return x * g(1.0 / x); }, "x g(1/x) for " + g.id(), g.param()};
}

/// g + g~, which is its own tilde.
inline GFunction symmetrize(const GFunction& g) {
  const GFunction gt = tilde(g);
  return {"sym:" + g.id(), [g, gt](double x) { return g(x) + gt(x); }, "g + g~ for " + g.id(), g.param()};
}

/// Kernel k: (0, inf) -> (0, inf) with x k(x) = k(1/x).
class KFunction {
 public:
  KFunction(std::string id, std::function<double(double)> eval) : id_(std::move(id)), eval_(std::move(eval)) {}
  double operator()(double x) const { return eval_(x); }
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
  std::function<double(double)> eval_;
};

namespace kfn {

/// Smallest kernel, 2/(1+x) (Bures).
inline KFunction bures() { return {"k_bures", [](double x) { return 2.0 / (1.0 + x); }}; }
/// Largest kernel, (1+x)/(2x).
inline KFunction arithmetic() { return {"k_arith", [](double x) { return (1.0 + x) / (2.0 * x); }}; }
inline KFunction inv_sqrt() { return {"k_inv_sqrt", [](double x) { return 1.0 / std::sqrt(x); }}; }
/// log(x)/(x-1), the kernel of (x - 1) log x.
inline KFunction log_ratio() {
  return {"k_log", [](double x) {
            const double u = x - 1.0;
            if (std::abs(u) < 1e-6) return 1.0 - u / 2.0 + u * u / 3.0;
            return std::log(x) / u;
          }};
}

}  // namespace kfn

/// Log-spaced grid on [lo, hi], inclusive.
inline std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> xs(static_cast<std::size_t>(n));
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
  return xs;
}

/// Largest relative violation of x k(x) = k(1/x) on a log grid over [1e-3, 1e3].
inline double kernel_symmetry_defect(const KFunction& k) {
  double worst = 0.0;
  for (double x : log_grid(1e-3, 1e3, 121)) {
    const double lhs = x * k(x), rhs = k(1.0 / x);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }
  return worst;
}

/// g(x) = (1 - x)^2 k(x). Rejects kernels that are not symmetric.
inline GFunction g_from_k(const KFunction& k) {
  const double defect = kernel_symmetry_defect(k);
  if (defect > tol::kConstruction)
    throw DomainError("g_from_k: kernel " + k.id() + " violates x k(x) = k(1/x) (defect " +
                      std::to_string(defect) + ")");
  return {"from:" + k.id(), [k](double x) { return (1.0 - x) * (1.0 - x) * k(x); }, "(1 - x)^2 k(x) for " + k.id()};
}

/// WYD exponents exercised by the catalog and the test suites.
inline const std::vector<double>& catalog_wyd_params() {
  static const std::vector<double> ts{-1.0, -0.5, 0.5, 1.5, 2.0};
  return ts;
}

/// Every cataloged function, including WYD instances at catalog_wyd_params()
/// and the tildes that are not already listed.
inline std::vector<GFunction> catalog() {
  std::vector<GFunction> out{gfn::neg_log(), gfn::x_log_x()};
  for (double t : catalog_wyd_params()) out.push_back(gfn::wyd(t));
  out.push_back(tilde(gfn::wyd(0.5)));
  out.push_back(gfn::square_diff());
  out.push_back(gfn::inv_sqrt());
  out.push_back(tilde(gfn::inv_sqrt()));
  out.push_back(gfn::bures());
  return out;
}

/// Id forms accepted on the command line.
inline std::vector<std::string> g_id_forms() {
  return {"neg_log", "x_log_x", "wyd:<t>", "square_diff", "inv_sqrt", "bures", "sym:<id>", "tilde:<id>"};
}

inline double parse_real(std::string_view s, const char* what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParameterError(std::string(what) + ": cannot parse '" + std::string(s) + "' as a number");
  return v;
}

/// Resolves an id such as "neg_log", "wyd:0.5" or "sym:tilde:inv_sqrt".
inline GFunction parse_g(std::string_view id) {
  constexpr std::string_view kWyd = "wyd:", kSym = "sym:", kTilde = "tilde:";
  if (id == "neg_log") return gfn::neg_log();
  if (id == "x_log_x") return gfn::x_log_x();
  if (id == "square_diff") return gfn::square_diff();
  if (id == "inv_sqrt") return gfn::inv_sqrt();
  if (id == "bures") return gfn::bures();
  if (id.substr(0, kWyd.size()) == kWyd) return gfn::wyd(parse_real(id.substr(kWyd.size()), "wyd"));
  if (id.substr(0, kSym.size()) == kSym) return symmetrize(parse_g(id.substr(kSym.size())));
  if (id.substr(0, kTilde.size()) == kTilde) return tilde(parse_g(id.substr(kTilde.size())));
  std::string valid;
  for (const auto& f : g_id_forms()) valid += (valid.empty() ? "" : ", ") + f;
  throw UnknownIdError("unknown g id '" + std::string(id) + "'; valid ids: " + valid);
}

}  // namespace modineq
