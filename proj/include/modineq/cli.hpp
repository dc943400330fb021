#pragma once

// Command-line front end. run() is the whole program; tools/modineq.cpp only
// forwards argv to it, so the tests drive the CLI in-process.
//
// Exit codes: 0 every requested suite passed, 1 a verification failed,
// 2 usage error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "modineq/report.hpp"

namespace modineq::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

/// Parses "a,b,c" into SpaceDims.
inline SpaceDims parse_dims(const std::string& s) {
  std::vector<Eigen::Index> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const double v = parse_real(item, "dims");
    if (v != std::floor(v) || v < 1 || v > 64) throw ParameterError("dims: '" + s + "' must be three integers in [1,64]");
    parts.push_back(static_cast<Eigen::Index>(v));
  }
  if (parts.size() != 3) throw ParameterError("dims: expected a,b,c, got '" + s + "'");
  return {parts[0], parts[1], parts[2]};
}

struct Options {
  std::vector<std::string> builders;
  std::vector<std::string> gs;
  std::vector<std::string> dims;
  int trials = 100;
  std::uint64_t seed = 42;
  double tol = tol::kInequality;
  double tol_eq = tol::kEquality;
  std::string normalize = "on";
  std::string out = "modineq_report.json";
  std::string format = "json";
};

namespace detail {

inline void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--dims", o.dims, "tensor factor dimensions a,b,c (repeatable; default 2,2,2)");
  sub->add_option("--trials", o.trials, "trials per suite (counterexample budget)")->check(CLI::PositiveNumber);
  sub->add_option("--seed", o.seed, "base RNG seed");
  sub->add_option("--tol", o.tol, "PSD tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--tol-eq", o.tol_eq, "equality tolerance (operator norm)")->check(CLI::PositiveNumber);
  sub->add_option("--normalize", o.normalize, "normalize gamma / P inputs to trace 1")
      ->check(CLI::IsMember({"on", "off"}));
  sub->add_option("--out", o.out, "report path (csv goes next to it with a .csv extension)");
  sub->add_option("--format", o.format, "report format")->check(CLI::IsMember({"json", "csv", "both"}));
}

inline std::string summary_line(const VerificationReport& r) {
  std::ostringstream os;
  os << (r.passed ? "[PASS] " : "[FAIL] ") << std::left << std::setw(15) << to_string(r.kind) << std::setw(26)
     << r.name << " dims=" << r.dims.str() << "  " << r.pass_count << "/" << r.records.size();
  os << (r.kind == ReportKind::kCounterexample ? " witnessed" : " pass");
  os << "  worst_min_eig=" << std::scientific << std::setprecision(3) << r.worst_min_eig;
  if (r.witness_seed) os << "  witness_seed=" << *r.witness_seed;
  for (const auto& n : r.notes) os << "\n       note: " << n;
  return os.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw Error("failed writing '" + path + "'");
}

inline std::string csv_path(const std::string& out) {
  std::filesystem::path p(out);
  p.replace_extension(".csv");
  return p.string();
}

inline void print_list(std::ostream& out) {
  out << "g functions (catalog):\n";
  for (const auto& g : catalog())
    out << "  " << std::left << std::setw(18) << g.id() << " g(1)=" << (g.value_at_one() + 0.0) << "  " << g.description()
        << "\n";
  out << "g id forms: ";
  for (const auto& f : g_id_forms()) out << f << " ";
  out << "\n  (wyd:<t> requires t in [-1,2], t not in {0,1})\n";
  out << "builders: ";
  for (const auto& b : builder_id_forms()) out << b << " ";
  out << "\ndefault verify builders: ";
  for (const auto& b : default_psd_builders()) out << b << " ";
  out << "\n";
}

}  // namespace detail

/// Runs one CLI invocation. args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Operator inequalities from quasi-entropy monotonicity: builders and randomized verification",
               "modineq"};
  app.require_subcommand(1);
  Options o;
  auto* verify = app.add_subcommand("verify", "PSD verification of builders x dims x trials");
  verify->add_option("--builder", o.builders, "builder id (repeatable or comma separated)")->delimiter(',');
  detail::add_common(verify, o);
  auto* equality = app.add_subcommand("equality", "equality conditions on block-structured states");
  detail::add_common(equality, o);
  auto* counter = app.add_subcommand("counterexample", "searches witnessing the untraced failures");
  detail::add_common(counter, o);
  auto* convex = app.add_subcommand("convexity", "joint convexity and partial-trace monotonicity of H_g");
  convex->add_option("--g", o.gs, "g id (repeatable or comma separated)")->delimiter(',');
  detail::add_common(convex, o);
  auto* list = app.add_subcommand("list", "print the catalog of g functions and builder ids");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  if (list->parsed()) {
    detail::print_list(out);
    return kExitPass;
  }

  RunManifest manifest;
  TrialConfig cfg;
  std::vector<SpaceDims> dims_list;
  try {
    for (const auto& d : o.dims) dims_list.push_back(parse_dims(d));
    if (dims_list.empty()) dims_list.push_back(SpaceDims{2, 2, 2});
    cfg.trials = o.trials;
    cfg.seed = o.seed;
    cfg.tol_psd = o.tol;
    cfg.tol_eq = o.tol_eq;
    cfg.normalize = o.normalize == "on";
    cfg.validate();
    if (verify->parsed()) {
      if (o.builders.empty()) o.builders = default_psd_builders();
      for (const auto& b : o.builders) find_builder(b);
    }
    if (convex->parsed()) {
      if (o.gs.empty())
        for (const auto& g : catalog()) o.gs.push_back(g.id());
      for (const auto& g : o.gs) parse_g(g);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  RunConfigEcho& echo = manifest.config;
  echo.command = app.get_subcommands().front()->get_name();
  echo.dims = dims_list;
  echo.trials = cfg.trials;
  echo.seed = cfg.seed;
  echo.tol_psd = cfg.tol_psd;
  echo.tol_eq = cfg.tol_eq;
  echo.normalize = cfg.normalize;
  echo.builders = o.builders;
  echo.gs = o.gs;
  echo.format = o.format;

  const auto start = std::chrono::steady_clock::now();
  try {
    for (const SpaceDims& dims : dims_list) {
      cfg.dims = dims;
      if (verify->parsed()) {
        for (const auto& b : o.builders) manifest.reports.push_back(verify_psd(b, cfg));
      } else if (equality->parsed()) {
        manifest.reports.push_back(verify_equality(cfg));
        manifest.reports.push_back(verify_equality_gamma(cfg));
        manifest.reports.push_back(verify_perturbed_equality(cfg));
      } else if (counter->parsed()) {
        manifest.reports.push_back(search_nonhermitian(cfg));
        manifest.reports.push_back(search_xpq(cfg));
        manifest.reports.push_back(search_h_nonconvexity(cfg));
      } else if (convex->parsed()) {
        for (const auto& g : o.gs) {
          manifest.reports.push_back(convexity_trials(g, cfg));
          manifest.reports.push_back(monotonicity_trials(g, cfg));
        }
      }
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFail;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  bool all = true;
  for (const auto& r : manifest.reports) all = all && r.passed;
  manifest.exit_status = all ? kExitPass : kExitFail;

  try {
    if (o.format == "json" || o.format == "both") detail::write_file(o.out, to_json_text(manifest));
    if (o.format == "csv" || o.format == "both") detail::write_file(detail::csv_path(o.out), to_csv(manifest));
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  for (const auto& r : manifest.reports) out << detail::summary_line(r) << "\n";
  out << (all ? "all suites passed" : "verification FAILED") << " (" << manifest.reports.size() << " reports, "
      << std::fixed << std::setprecision(2) << wall << " s)\n";
  return manifest.exit_status;
}

}  // namespace modineq::cli
