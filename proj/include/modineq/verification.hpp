#pragma once

// Randomized verification: PSD verdicts for every builder, equality on
// block-structured states, counterexample searches for the untraced
// statements that fail, and joint convexity / monotonicity of quasi-entropies.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "modineq/builders.hpp"
#include "modineq/equality.hpp"
#include "modineq/gfunction.hpp"
#include "modineq/random.hpp"
#include "modineq/spectral.hpp"
#include "modineq/tensor.hpp"

namespace modineq {

struct TrialConfig {
  SpaceDims dims{2, 2, 2};
  int trials = 100;
  std::uint64_t seed = 42;
  double tol_psd = tol::kInequality;
  double tol_eq = tol::kEquality;
  bool normalize = true;
  std::vector<std::string> builders;
  std::vector<std::string> gs;

  void validate() const {
    if (trials < 1) throw ParameterError("trials must be >= 1");
    if (!(tol_psd > 0.0) || !(tol_eq > 0.0)) throw ParameterError("tolerances must be > 0");
  }
};

struct TrialRecord {
  std::string builder;
  std::uint64_t seed = 0;
  double min_eig = 0.0;
  double herm_defect = 0.0;
  double op_norm = 0.0;
  double trace = 0.0;
  std::map<std::string, double> identities;
  bool verdict = false;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

enum class ReportKind { kPsd, kCounterexample, kEquality, kConvexity, kMonotonicity };

inline const char* to_string(ReportKind k) {
  switch (k) {
    case ReportKind::kPsd: return "psd";
    case ReportKind::kCounterexample: return "counterexample";
    case ReportKind::kEquality: return "equality";
    case ReportKind::kConvexity: return "convexity";
    case ReportKind::kMonotonicity: return "monotonicity";
  }
  return "?";
}

inline ReportKind report_kind_from_string(const std::string& s) {
  for (auto k : {ReportKind::kPsd, ReportKind::kCounterexample, ReportKind::kEquality, ReportKind::kConvexity,
                 ReportKind::kMonotonicity})
    if (s == to_string(k)) return k;
  throw UnknownIdError("unknown report kind '" + s + "'");
}

struct VerificationReport {
  std::string name;
  ReportKind kind = ReportKind::kPsd;
  SpaceDims dims;
  std::vector<TrialRecord> records;  // sorted by seed
  bool passed = false;
  int pass_count = 0;
  double worst_min_eig = 0.0;
  std::optional<std::uint64_t> witness_seed;
  std::vector<std::string> notes;

  friend bool operator==(const VerificationReport&, const VerificationReport&) = default;
};

// ---------------------------------------------------------------------------
// parallel trials

/// Worker count: hardware concurrency, capped by MODINEQ_THREADS when set.
inline unsigned thread_count() {
  unsigned n = std::max(1U, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MODINEQ_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

/// out[i] = fn(i) for i in [0, n), evaluated on up to thread_count() threads.
template <class T, class Fn>
std::vector<T> parallel_map(int n, Fn fn) {
  std::vector<T> out(static_cast<std::size_t>(n));
  const unsigned workers = std::min<unsigned>(thread_count(), static_cast<unsigned>(std::max(n, 1)));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fn(i);
    return out;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          out[static_cast<std::size_t>(i)] = fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

// ---------------------------------------------------------------------------
// records

inline TrialRecord record_of(const BuiltOperator& op, std::uint64_t seed) {
  TrialRecord r;
  r.builder = op.builder_id;
  r.seed = seed;
  r.min_eig = min_eigenvalue(op.matrix);
  r.herm_defect = op.herm_defect;
  r.op_norm = operator_norm(op.matrix);
  r.trace = op.matrix.trace().real();
  return r;
}

inline bool psd_verdict(const TrialRecord& r, double tol) { return r.min_eig >= -tol && r.herm_defect <= tol; }

/// Sorts records by seed and fills the aggregate fields. For PSD-style
/// reports the run passes when every trial does; for counterexample searches
/// it passes when some trial witnessed the violation.
inline void finalize(VerificationReport& rep) {
  std::sort(rep.records.begin(), rep.records.end(),
            [](const TrialRecord& a, const TrialRecord& b) { return a.seed < b.seed; });
  rep.pass_count = 0;
  rep.worst_min_eig = rep.records.empty() ? 0.0 : rep.records.front().min_eig;
  for (const auto& r : rep.records) {
    rep.pass_count += r.verdict ? 1 : 0;
    rep.worst_min_eig = std::min(rep.worst_min_eig, r.min_eig);
  }
  if (rep.kind == ReportKind::kCounterexample)
    rep.passed = rep.pass_count > 0;
  else
    rep.passed = !rep.records.empty() && rep.pass_count == static_cast<int>(rep.records.size());
}

// ---------------------------------------------------------------------------
// independent scalar references for trace identities

/// S(rho_AB) + S(rho_BC) - S(rho_ABC) - S(rho_B), from eigenvalues.
inline double ssa_gap(const Matrix& rho, const SpaceDims& dims) {
  return entropy(marginal(rho, dims, "AB")) + entropy(marginal(rho, dims, "BC")) - entropy(rho) -
         entropy(marginal(rho, dims, "B"));
}

/// Tr rho_AB (log rho_AB - log rho_ABC) - Tr rho_B (log rho_B - log rho_BC),
/// with rho_AB and rho_B tensored with I_C.
inline double ssa_rev_trace(const Matrix& rho, const SpaceDims& dims) {
  const SpaceDims bc{1, dims.dB, dims.dC};
  const Matrix rho_ab = marginal(rho, dims, "AB");
  const Matrix rho_b = marginal(rho, dims, "B");
  const Matrix rho_bc = marginal(rho, dims, "BC");
  const double dc = static_cast<double>(dims.dC);
  const double t1 = -dc * entropy(rho_ab) - (embed(rho_ab, dims, "AB") * log_pd(rho)).trace().real();
  const double t2 = -dc * entropy(rho_b) - (embed(rho_b, bc, "B") * log_pd(rho_bc)).trace().real();
  return t1 - t2;
}

/// -S(rho) - Tr rho_AB log gamma_AB + S(rho_BC) + Tr rho_B log gamma_B.
inline double mpt_trace(const Matrix& rho, const Matrix& gamma_ab, const SpaceDims& dims) {
  const Matrix gamma_b = partial_trace(gamma_ab, SpaceDims{dims.dA, dims.dB, 1}, "A");
  return -entropy(rho) - (marginal(rho, dims, "AB") * log_pd(gamma_ab)).trace().real() +
         entropy(marginal(rho, dims, "BC")) + (marginal(rho, dims, "B") * log_pd(gamma_b)).trace().real();
}

inline double frob(const Matrix& m) { return m.norm(); }

// ---------------------------------------------------------------------------
// builder registry

struct BuilderSpec {
  std::string id;
  /// False for the counterexample probes.
  bool psd_claim = true;
  /// Instances live on (dA, 1, dC).
  bool bipartite = false;
  std::function<TrialRecord(const SpaceDims&, std::uint64_t, const TrialConfig&)> run;
};

namespace detail {

inline TrialRecord run_ssa_family(const std::string& id, const SpaceDims& dims, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  const Matrix rho = random_state(dims.total(), rng).matrix();
  const BuiltOperator op = id == "ssa" ? ssa_operator(rho, dims)
                           : id == "ssa_kim" ? ssa_operator_kim(rho, dims)
                                             : ssa_rev_operator(rho, dims);
  TrialRecord r = record_of(op, seed);
  const double gap = ssa_gap(rho, dims);
  r.identities["ssa_gap"] = gap;
  if (id == "ssa_rev") {
    r.identities["direct_trace_residual"] = std::abs(r.trace - ssa_rev_trace(rho, dims));
    r.identities["general_residual"] = frob(op.matrix - build_general(gfn::x_log_x(), marginal(rho, dims, "AB"), rho, dims).matrix);
  } else {
    r.identities["ssa_gap_residual"] = std::abs(r.trace - gap);
    const Matrix general = build_general(gfn::neg_log(), marginal(rho, dims, "AB"), rho, dims).matrix;
    r.identities["general_residual"] = id == "ssa" ? frob(op.matrix - general) : frob(op.matrix - general.adjoint());
  }
  return r;
}

inline TrialRecord run_subadd(const SpaceDims& dims, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  const Matrix rho = random_state(dims.total(), rng).matrix();
  TrialRecord r = record_of(subadditivity_operator(rho, dims), seed);
  const double gap = entropy(marginal(rho, dims, "A")) + entropy(marginal(rho, dims, "C")) - entropy(rho);
  r.identities["subadditivity_gap"] = gap;
  r.identities["subadditivity_residual"] = std::abs(r.trace - gap);
  return r;
}

inline TrialRecord run_cond_info(const SpaceDims& dims, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  const Matrix rho = random_state(dims.total(), rng).matrix();
  const BuiltOperator op = cond_info_bound_operator(rho, dims);
  TrialRecord r = record_of(op, seed);
  const Eigen::Index da = dims.dA;
  const Matrix gamma = Matrix::Identity(da, da) / static_cast<double>(da);
  r.identities["mpt_residual"] = frob(op.matrix - mpt_operator(rho, gamma, dims).matrix);
  return r;
}

inline TrialRecord run_mpt(const SpaceDims& dims, std::uint64_t seed, bool normalize) {
  Rng rng = make_rng(seed);
  const Matrix rho = random_state(dims.total(), rng).matrix();
  const Matrix gamma = random_pd(dims.dA * dims.dB, rng, normalize);
  const BuiltOperator op = mpt_operator(rho, gamma, dims);
  TrialRecord r = record_of(op, seed);
  r.identities["direct_trace_residual"] = std::abs(r.trace - mpt_trace(rho, gamma, dims));
  r.identities["general_residual"] = frob(op.matrix - build_general_rev(gfn::x_log_x(), rho, gamma, dims).matrix);
  return r;
}

inline TrialRecord run_wyd(double t, const SpaceDims& dims, std::uint64_t seed, bool normalize) {
  Rng rng = make_rng(seed);
  const Matrix rho = random_state(dims.total(), rng).matrix();
  const Matrix gamma = random_pd(dims.dA * dims.dB, rng, normalize);
  const BuiltOperator op = wyd_operator(t, rho, gamma, dims);
  TrialRecord r = record_of(op, seed);
  r.identities["general_residual"] = frob(op.matrix - build_general(gfn::wyd(t), gamma, rho, dims).matrix);
  return r;
}

inline TrialRecord run_cs(const SpaceDims& dims, std::uint64_t seed, bool normalize) {
  Rng rng = make_rng(seed);
  const Matrix p = random_pd(dims.dA * dims.dB, rng, normalize);
  const Matrix q = random_pd(dims.total(), rng, normalize);
  const BuiltOperator op = cs_operator(p, q, dims);
  TrialRecord r = record_of(op, seed);
  r.identities["general_residual"] = frob(op.matrix - build_general(gfn::square_diff(), p, q, dims).matrix);
  return r;
}

inline TrialRecord run_lr_cs(const SpaceDims& dims, std::uint64_t seed, bool normalize) {
  Rng rng = make_rng(seed);
  const Matrix x = random_matrix(dims.total(), rng);
  const Matrix q = random_pd(dims.total(), rng, normalize);
  return record_of(partial_trace_cs(x, q, dims), seed);
}

inline TrialRecord run_xhalf(const SpaceDims& dims, std::uint64_t seed, bool normalize) {
  Rng rng = make_rng(seed);
  const Matrix rho = random_state(dims.total(), rng).matrix();
  const Matrix gamma = random_pd(dims.dA * dims.dB, rng, normalize);
  const BuiltOperator op = xhalf_operator(rho, gamma, dims);
  TrialRecord r = record_of(op, seed);
  r.identities["general_residual"] = frob(op.matrix - build_general(gfn::inv_sqrt(), gamma, rho, dims).matrix);
  return r;
}

inline TrialRecord run_general(const GFunction& g, const SpaceDims& dims, std::uint64_t seed, bool normalize) {
  Rng rng = make_rng(seed);
  const Matrix p = random_pd(dims.dA * dims.dB, rng, normalize);
  const Matrix q = random_state(dims.total(), rng).matrix();
  const BuiltOperator op = build_general(g, p, q, dims);
  TrialRecord r = record_of(op, seed);
  r.identities["adjoint_residual"] =
      frob(op.matrix - build_general_rev(tilde(g), q, p, dims).matrix.adjoint());
  return r;
}

inline TrialRecord run_nonherm(const SpaceDims& dims, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  const Matrix rho = random_state(dims.total(), rng).matrix();
  const Matrix gamma = random_state(dims.total(), rng).matrix();
  TrialRecord r = record_of(non_hermitian_probe(rho, gamma, dims), seed);
  r.verdict = r.herm_defect > 1e-6;
  return r;
}

/// Draws xpq inputs of size d: X1, X2 arbitrary; P, Q positive definite; t log-uniform in [0.1, 10].
struct XpqInstance {
  Matrix x1, p1, q1, x2, p2, q2;
  double t = 1.0;
};

inline XpqInstance draw_xpq(Eigen::Index d, Rng& rng, bool normalize) {
  XpqInstance in;
  in.x1 = random_matrix(d, rng);
  in.x2 = random_matrix(d, rng);
  in.p1 = random_pd(d, rng, normalize);
  in.p2 = random_pd(d, rng, normalize);
  in.q1 = random_pd(d, rng, normalize);
  in.q2 = random_pd(d, rng, normalize);
  in.t = std::exp(std::uniform_real_distribution<double>(std::log(0.1), std::log(10.0))(rng));
  return in;
}

inline TrialRecord run_xpq(const SpaceDims& dims, std::uint64_t seed, bool normalize) {
  Rng rng = make_rng(seed);
  const XpqInstance in = draw_xpq(dims.dC, rng, normalize);
  const double avg = 0.5 * (xpq_value(in.x1, in.p1, in.q1, in.t) + xpq_value(in.x2, in.p2, in.q2, in.t));
  const double mixed = xpq_value(0.5 * (in.x1 + in.x2), 0.5 * (in.p1 + in.p2), 0.5 * (in.q1 + in.q2), in.t);
  Matrix slack(1, 1);
  slack(0, 0) = avg - mixed;
  TrialRecord r = record_of(detail::make_op(slack, "xpq", digest({&in.x1, &in.x2})), seed);
  r.identities["t"] = in.t;
  return r;
}

inline TrialRecord run_xpq_probe(const SpaceDims& dims, std::uint64_t seed, bool normalize) {
  Rng rng = make_rng(seed);
  const XpqInstance in = draw_xpq(dims.dC, rng, normalize);
  TrialRecord r = record_of(xpq_operator_probe(in.x1, in.p1, in.q1, in.x2, in.p2, in.q2, in.t), seed);
  r.identities["t"] = in.t;
  // trace of the defect is the (scalar) joint-convexity slack
  r.identities["trace_slack"] = r.trace;
  r.verdict = r.min_eig < -1e-8;
  return r;
}

}  // namespace detail

/// Fixed builder ids; "wyd:<t>" and "general:<g-id>" are resolved on demand.
inline std::vector<std::string> builder_id_forms() {
  return {"ssa", "ssa_kim", "ssa_rev", "subadd", "mpt", "cond_info_bound", "wyd:<t>", "cs",
          "lr_cs", "xpq", "xpq_probe", "xhalf", "general:<g-id>", "nonherm_probe"};
}

/// Positivity-claim builders exercised by default.
inline std::vector<std::string> default_psd_builders() {
  std::vector<std::string> ids{"ssa", "ssa_kim", "ssa_rev", "subadd", "mpt", "cond_info_bound"};
  for (double t : catalog_wyd_params()) ids.push_back("wyd:" + gfn::detail::format_param(t));
  for (const char* id : {"cs", "lr_cs", "xpq", "xhalf", "general:bures"}) ids.emplace_back(id);
  return ids;
}

inline BuilderSpec find_builder(const std::string& id) {
  using namespace detail;
  BuilderSpec s;
  s.id = id;
  if (id == "ssa" || id == "ssa_kim" || id == "ssa_rev") {
    s.run = [id](const SpaceDims& d, std::uint64_t seed, const TrialConfig&) { return run_ssa_family(id, d, seed); };
  } else if (id == "subadd") {
    s.bipartite = true;
    s.run = [](const SpaceDims& d, std::uint64_t seed, const TrialConfig&) { return run_subadd(d, seed); };
  } else if (id == "cond_info_bound") {
    s.bipartite = true;
    s.run = [](const SpaceDims& d, std::uint64_t seed, const TrialConfig&) { return run_cond_info(d, seed); };
  } else if (id == "mpt") {
    s.run = [](const SpaceDims& d, std::uint64_t seed, const TrialConfig& c) { return run_mpt(d, seed, c.normalize); };
  } else if (id.rfind("wyd:", 0) == 0) {
    const double t = parse_real(id.substr(4), "wyd");
    gfn::check_wyd_param(t);
    s.run = [t](const SpaceDims& d, std::uint64_t seed, const TrialConfig& c) {
      return run_wyd(t, d, seed, c.normalize);
    };
  } else if (id == "cs") {
    s.run = [](const SpaceDims& d, std::uint64_t seed, const TrialConfig& c) { return run_cs(d, seed, c.normalize); };
  } else if (id == "lr_cs") {
    s.bipartite = true;
    s.run = [](const SpaceDims& d, std::uint64_t seed, const TrialConfig& c) {
      return run_lr_cs(d, seed, c.normalize);
    };
  } else if (id == "xpq") {
    s.run = [](const SpaceDims& d, std::uint64_t seed, const TrialConfig& c) { return run_xpq(d, seed, c.normalize); };
  } else if (id == "xpq_probe") {
    s.psd_claim = false;
    s.run = [](const SpaceDims& d, std::uint64_t seed, const TrialConfig& c) {
      return run_xpq_probe(d, seed, c.normalize);
    };
  } else if (id == "xhalf") {
    s.run = [](const SpaceDims& d, std::uint64_t seed, const TrialConfig& c) {
      return run_xhalf(d, seed, c.normalize);
    };
  } else if (id.rfind("general:", 0) == 0) {
    const GFunction g = parse_g(id.substr(8));
    s.run = [g](const SpaceDims& d, std::uint64_t seed, const TrialConfig& c) {
      return run_general(g, d, seed, c.normalize);
    };
  } else if (id == "nonherm_probe") {
    s.psd_claim = false;
    s.bipartite = true;
    s.run = [](const SpaceDims& d, std::uint64_t seed, const TrialConfig&) { return run_nonherm(d, seed); };
  } else {
    std::string valid;
    for (const auto& f : builder_id_forms()) valid += (valid.empty() ? "" : ", ") + f;
    throw UnknownIdError("unknown builder id '" + id + "'; valid ids: " + valid);
  }
  return s;
}

/// Runs `builder_id` on cfg.trials random instances at cfg.dims (bipartite
/// builders use (dA, 1, dC)). PSD builders pass when every trial has
/// min_eig >= -tol_psd and herm_defect <= tol_psd; probes pass when some
/// trial witnesses the violation.
inline VerificationReport verify_psd(const std::string& builder_id, const TrialConfig& cfg) {
  cfg.validate();
  const BuilderSpec spec = find_builder(builder_id);
  const SpaceDims dims = spec.bipartite ? cfg.dims.bipartite() : cfg.dims;
  VerificationReport rep;
  rep.name = builder_id;
  rep.kind = spec.psd_claim ? ReportKind::kPsd : ReportKind::kCounterexample;
  rep.dims = dims;
  rep.records = parallel_map<TrialRecord>(cfg.trials, [&](int i) {
    TrialRecord r = spec.run(dims, trial_seed(cfg.seed, static_cast<std::uint64_t>(i)), cfg);
    r.builder = builder_id;
    if (spec.psd_claim) r.verdict = psd_verdict(r, cfg.tol_psd);
    return r;
  });
  finalize(rep);
  if (!spec.psd_claim) {
    rep.notes.push_back("counterexample search; budget " + std::to_string(cfg.trials) + " trials");
    for (int i = 0; i < cfg.trials; ++i) {
      const std::uint64_t s = trial_seed(cfg.seed, static_cast<std::uint64_t>(i));
      auto it = std::find_if(rep.records.begin(), rep.records.end(), [s](const TrialRecord& r) { return r.seed == s; });
      if (it != rep.records.end() && it->verdict) {
        rep.witness_seed = s;
        break;
      }
    }
  }
  if (builder_id == "ssa_rev") rep.notes.push_back("full trace is not the SSA gap");
  return rep;
}

// ---------------------------------------------------------------------------
// equality

/// Builders whose equality case is rho_ABC on the equality manifold with
/// P_AB = rho_AB (no gamma).
inline std::vector<std::string> equality_builders() {
  std::vector<std::string> ids{"ssa", "ssa_kim", "ssa_rev"};
  for (const auto& g : catalog()) ids.push_back("general:" + g.id());
  return ids;
}

/// Builders taking a block-matched gamma_AB.
inline std::vector<std::string> gamma_equality_builders() {
  std::vector<std::string> ids{"mpt", "xhalf"};
  for (double t : catalog_wyd_params()) ids.push_back("wyd:" + gfn::detail::format_param(t));
  for (const auto& g : catalog()) ids.push_back("general:" + g.id());
  return ids;
}

namespace detail {

inline BuiltOperator build_with_gamma(const std::string& id, const Matrix& rho, const Matrix& gamma,
                                      const SpaceDims& dims) {
  if (id == "mpt") return mpt_operator(rho, gamma, dims);
  if (id == "xhalf") return xhalf_operator(rho, gamma, dims);
  if (id.rfind("wyd:", 0) == 0) return wyd_operator(parse_real(id.substr(4), "wyd"), rho, gamma, dims);
  if (id.rfind("general:", 0) == 0) return build_general(parse_g(id.substr(8)), gamma, rho, dims);
  if (id == "ssa") return ssa_operator(rho, dims);
  if (id == "ssa_kim") return ssa_operator_kim(rho, dims);
  if (id == "ssa_rev") return ssa_rev_operator(rho, dims);
  throw UnknownIdError("no equality construction for builder '" + id + "'");
}

inline TrialRecord equality_record(const BuiltOperator& op, std::uint64_t seed, const TrialConfig& cfg) {
  TrialRecord r = record_of(op, seed);
  r.identities["abs_trace"] = std::abs(r.trace);
  r.verdict = r.op_norm <= cfg.tol_eq && std::abs(r.trace) <= cfg.tol_eq;
  return r;
}

}  // namespace detail

/// Equality forward direction for gamma-free builders: every builder in
/// equality_builders() vanishes on equality-structured states, judged by
/// operator norm and by trace (both <= tol_eq).
inline VerificationReport verify_equality(const TrialConfig& cfg) {
  cfg.validate();
  const auto layouts = equality_layouts(cfg.dims.dB);
  const auto ids = cfg.builders.empty() ? equality_builders() : cfg.builders;
  VerificationReport rep;
  rep.name = "equality";
  rep.kind = ReportKind::kEquality;
  rep.dims = cfg.dims;
  auto per_trial = parallel_map<std::vector<TrialRecord>>(cfg.trials, [&](int i) {
    const std::uint64_t seed = trial_seed(cfg.seed, static_cast<std::uint64_t>(i));
    const EqualityState s = equality_state(cfg.dims, layouts[static_cast<std::size_t>(i) % layouts.size()], seed);
    const Matrix rho_ab = marginal(s.rho, cfg.dims, "AB");
    std::vector<TrialRecord> out;
    for (const auto& id : ids) {
      TrialRecord r = detail::equality_record(detail::build_with_gamma(id, s.rho, rho_ab, cfg.dims), seed, cfg);
      r.builder = id;
      r.identities["blocks"] = static_cast<double>(s.layout.size());
      out.push_back(std::move(r));
    }
    return out;
  });
  for (auto& v : per_trial)
    for (auto& r : v) rep.records.push_back(std::move(r));
  std::stable_sort(rep.records.begin(), rep.records.end(),
                   [](const TrialRecord& a, const TrialRecord& b) { return a.builder < b.builder; });
  finalize(rep);
  return rep;
}

/// Equality with a block-matched gamma_AB (gamma's AB' blocks equal rho's).
/// Also searches for a trial where a mismatched gamma gives operator norm
/// above 1e-4; the report fails if none is found.
inline VerificationReport verify_equality_gamma(const TrialConfig& cfg) {
  cfg.validate();
  const auto layouts = equality_layouts(cfg.dims.dB);
  const auto ids = cfg.builders.empty() ? gamma_equality_builders() : cfg.builders;
  VerificationReport rep;
  rep.name = "equality_gamma";
  rep.kind = ReportKind::kEquality;
  rep.dims = cfg.dims;
  struct Out {
    std::vector<TrialRecord> matched;
    std::vector<double> mismatch_norms;
  };
  auto per_trial = parallel_map<Out>(cfg.trials, [&](int i) {
    const std::uint64_t seed = trial_seed(cfg.seed, static_cast<std::uint64_t>(i));
    Rng rng = make_rng(seed);
    const EqualityState s = equality_state(cfg.dims, layouts[static_cast<std::size_t>(i) % layouts.size()], rng);
    const Matrix gamma = block_matched_gamma(s, rng, cfg.normalize);
    const Matrix bad = block_matched_gamma(s, rng, cfg.normalize, true);
    Out out;
    for (const auto& id : ids) {
      TrialRecord r = detail::equality_record(detail::build_with_gamma(id, s.rho, gamma, cfg.dims), seed, cfg);
      r.builder = id;
      const BuiltOperator mis = detail::build_with_gamma(id, s.rho, bad, cfg.dims);
      r.identities["mismatch_norm"] = operator_norm(mis.matrix);
      r.identities["mismatch_min_eig"] = min_eigenvalue(mis.matrix);
      out.mismatch_norms.push_back(r.identities["mismatch_norm"]);
      out.matched.push_back(std::move(r));
    }
    return out;
  });
  // per builder: does some trial witness strict inequality for a mismatched gamma?
  std::map<std::string, bool> witnessed;
  for (auto& o : per_trial)
    for (auto& r : o.matched) {
      witnessed[r.builder] = witnessed[r.builder] || r.identities["mismatch_norm"] > 1e-4;
      rep.records.push_back(std::move(r));
    }
  std::stable_sort(rep.records.begin(), rep.records.end(),
                   [](const TrialRecord& a, const TrialRecord& b) { return a.builder < b.builder; });
  finalize(rep);
  for (const auto& [id, ok] : witnessed)
    if (!ok) {
      rep.passed = false;
      rep.notes.push_back("mismatched gamma never exceeded norm 1e-4 for " + id);
    }
  return rep;
}

/// Strict-inequality smoke check: (1 - eps) rho_eq + eps sigma with a random
/// state sigma must stay PSD within tol_psd and have operator norm > 1e-5.
inline VerificationReport verify_perturbed_equality(const TrialConfig& cfg, double eps = 1e-3) {
  cfg.validate();
  const auto layouts = equality_layouts(cfg.dims.dB);
  const std::vector<std::string> ids = cfg.builders.empty() ? std::vector<std::string>{"ssa"} : cfg.builders;
  VerificationReport rep;
  rep.name = "equality_perturbed";
  rep.kind = ReportKind::kEquality;
  rep.dims = cfg.dims;
  auto per_trial = parallel_map<std::vector<TrialRecord>>(cfg.trials, [&](int i) {
    const std::uint64_t seed = trial_seed(cfg.seed, static_cast<std::uint64_t>(i));
    Rng rng = make_rng(seed);
    const EqualityState s = equality_state(cfg.dims, layouts[static_cast<std::size_t>(i) % layouts.size()], rng);
    const Matrix sigma = random_state(cfg.dims.total(), rng).matrix();
    const Matrix rho = (1.0 - eps) * s.rho.matrix() + eps * sigma;
    const Matrix rho_ab = marginal(rho, cfg.dims, "AB");
    std::vector<TrialRecord> out;
    for (const auto& id : ids) {
      TrialRecord r = record_of(detail::build_with_gamma(id, rho, rho_ab, cfg.dims), seed);
      r.builder = id;
      r.identities["eps"] = eps;
      r.verdict = r.min_eig >= -cfg.tol_psd && r.op_norm > 1e-5;
      out.push_back(std::move(r));
    }
    return out;
  });
  for (auto& v : per_trial)
    for (auto& r : v) rep.records.push_back(std::move(r));
  std::stable_sort(rep.records.begin(), rep.records.end(),
                   [](const TrialRecord& a, const TrialRecord& b) { return a.builder < b.builder; });
  finalize(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// counterexample searches

/// One instance of the h(rho, gamma) midpoint test at dimension d.
inline TrialRecord h_nonconvexity_probe(std::uint64_t seed, Eigen::Index d = 2) {
  Rng rng = make_rng(seed);
  const Matrix r1 = random_state(d, rng).matrix();
  const Matrix g1 = random_state(d, rng).matrix();
  const Matrix r2 = random_state(d, rng).matrix();
  const Matrix g2 = random_state(d, rng).matrix();
  TrialRecord r = record_of(h_defect(r1, g1, r2, g2), seed);
  r.identities["trace_slack"] = r.trace;
  r.verdict = r.min_eig < -1e-8;
  return r;
}

/// Searches cfg.trials seeds (at d = dC) for a negative eigenvalue of the h
/// midpoint defect. Passes iff a witness is found and the traced defect is
/// >= -tol_psd on every instance.
inline VerificationReport search_h_nonconvexity(const TrialConfig& cfg) {
  cfg.validate();
  VerificationReport rep;
  rep.name = "h_probe";
  rep.kind = ReportKind::kCounterexample;
  rep.dims = cfg.dims;
  rep.records = parallel_map<TrialRecord>(cfg.trials, [&](int i) {
    return h_nonconvexity_probe(trial_seed(cfg.seed, static_cast<std::uint64_t>(i)), cfg.dims.dC);
  });
  finalize(rep);
  for (int i = 0; i < cfg.trials && !rep.witness_seed; ++i) {
    const std::uint64_t s = trial_seed(cfg.seed, static_cast<std::uint64_t>(i));
    for (const auto& r : rep.records)
      if (r.seed == s && r.verdict) rep.witness_seed = s;
  }
  rep.notes.push_back("counterexample search; budget " + std::to_string(cfg.trials) + " trials");
  for (const auto& r : rep.records)
    if (r.identities.at("trace_slack") < -cfg.tol_psd) {
      rep.passed = false;
      rep.notes.push_back("traced defect negative at seed " + std::to_string(r.seed));
    }
  return rep;
}

/// xpq_probe search plus the traced-convexity side condition.
inline VerificationReport search_xpq(const TrialConfig& cfg) {
  VerificationReport rep = verify_psd("xpq_probe", cfg);
  for (const auto& r : rep.records)
    if (r.identities.at("trace_slack") < -cfg.tol_psd) {
      rep.passed = false;
      rep.notes.push_back("traced defect negative at seed " + std::to_string(r.seed));
    }
  return rep;
}

inline VerificationReport search_nonhermitian(const TrialConfig& cfg) { return verify_psd("nonherm_probe", cfg); }

// ---------------------------------------------------------------------------
// joint convexity and monotonicity of H_g

/// For random (P1,Q1), (P2,Q2), K on the full space and 20 weights s in
/// [0,1]: s H(K,P1,Q1) + (1-s) H(K,P2,Q2) - H(K, sP1+(1-s)P2, sQ1+(1-s)Q2).
/// Records the smallest slack.
inline TrialRecord convexity_trial(const GFunction& g, const SpaceDims& dims, std::uint64_t seed, bool normalize,
                                   int mixtures = 20) {
  Rng rng = make_rng(seed);
  const Eigen::Index d = dims.total();
  const Matrix p1 = random_pd(d, rng, normalize), q1 = random_pd(d, rng, normalize);
  const Matrix p2 = random_pd(d, rng, normalize), q2 = random_pd(d, rng, normalize);
  const Matrix k = random_matrix(d, rng);
  const double h1 = quasi_entropy(g, k, p1, q1), h2 = quasi_entropy(g, k, p2, q2);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = std::numeric_limits<double>::infinity();
  for (int m = 0; m < mixtures; ++m) {
    const double s = unif(rng);
    const double mixed = quasi_entropy(g, k, s * p1 + (1 - s) * p2, s * q1 + (1 - s) * q2);
    worst = std::min(worst, s * h1 + (1 - s) * h2 - mixed);
  }
  TrialRecord r;
  r.builder = g.id();
  r.seed = seed;
  r.min_eig = worst;
  r.trace = worst;
  return r;
}

/// H_g(I_A (x) K_BC, P_ABC, Q_ABC) - H_g(K_BC, P_BC, Q_BC) for random inputs.
inline TrialRecord monotonicity_trial(const GFunction& g, const SpaceDims& dims, std::uint64_t seed, bool normalize) {
  Rng rng = make_rng(seed);
  const Matrix p = random_pd(dims.total(), rng, normalize), q = random_pd(dims.total(), rng, normalize);
  const Matrix k_bc = random_matrix(dims.dB * dims.dC, rng);
  const double full = quasi_entropy(g, embed(k_bc, dims, "BC"), p, q);
  const double reduced = quasi_entropy(g, k_bc, marginal(p, dims, "BC"), marginal(q, dims, "BC"));
  TrialRecord r;
  r.builder = g.id();
  r.seed = seed;
  r.min_eig = full - reduced;
  r.trace = full - reduced;
  r.identities["full"] = full;
  r.identities["reduced"] = reduced;
  return r;
}

inline VerificationReport convexity_trials(const std::string& g_id, const TrialConfig& cfg) {
  cfg.validate();
  const GFunction g = parse_g(g_id);
  VerificationReport rep;
  rep.name = g_id;
  rep.kind = ReportKind::kConvexity;
  rep.dims = cfg.dims;
  rep.records = parallel_map<TrialRecord>(cfg.trials, [&](int i) {
    TrialRecord r = convexity_trial(g, cfg.dims, trial_seed(cfg.seed, static_cast<std::uint64_t>(i)), cfg.normalize);
    r.builder = g_id;
    r.verdict = r.min_eig >= -cfg.tol_psd;
    return r;
  });
  finalize(rep);
  return rep;
}

inline VerificationReport monotonicity_trials(const std::string& g_id, const TrialConfig& cfg) {
  cfg.validate();
  const GFunction g = parse_g(g_id);
  VerificationReport rep;
  rep.name = g_id;
  rep.kind = ReportKind::kMonotonicity;
  rep.dims = cfg.dims;
  rep.records = parallel_map<TrialRecord>(cfg.trials, [&](int i) {
    TrialRecord r =
        monotonicity_trial(g, cfg.dims, trial_seed(cfg.seed, static_cast<std::uint64_t>(i)), cfg.normalize);
    r.builder = g_id;
    r.verdict = r.min_eig >= -cfg.tol_psd;
    return r;
  });
  finalize(rep);
  return rep;
}

}  // namespace modineq
