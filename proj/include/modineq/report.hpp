#pragma once

// Run manifest and its JSON / CSV serialization.

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "modineq/verification.hpp"

namespace modineq {

struct RunConfigEcho {
  std::string command;
  std::vector<SpaceDims> dims;
  int trials = 100;
  std::uint64_t seed = 42;
  double tol_psd = tol::kInequality;
  double tol_eq = tol::kEquality;
  bool normalize = true;
  std::vector<std::string> builders;
  std::vector<std::string> gs;
  std::string format = "json";

  friend bool operator==(const RunConfigEcho&, const RunConfigEcho&) = default;
};

struct RunManifest {
  RunConfigEcho config;
  std::string version = kVersion;
  std::vector<VerificationReport> reports;
  int exit_status = 0;

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

inline void to_json(nlohmann::ordered_json& j, const SpaceDims& d) { j = {d.dA, d.dB, d.dC}; }
inline void from_json(const nlohmann::ordered_json& j, SpaceDims& d) {
  d = SpaceDims(j.at(0).get<Eigen::Index>(), j.at(1).get<Eigen::Index>(), j.at(2).get<Eigen::Index>());
}

inline void to_json(nlohmann::ordered_json& j, const TrialRecord& r) {
  j = nlohmann::ordered_json{{"builder", r.builder},     {"seed", r.seed},         {"min_eig", r.min_eig},
                             {"herm_defect", r.herm_defect}, {"op_norm", r.op_norm}, {"trace", r.trace},
                             {"identities", r.identities}, {"verdict", r.verdict ? "pass" : "fail"}};
}
inline void from_json(const nlohmann::ordered_json& j, TrialRecord& r) {
  r.builder = j.at("builder").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.min_eig = j.at("min_eig").get<double>();
  r.herm_defect = j.at("herm_defect").get<double>();
  r.op_norm = j.at("op_norm").get<double>();
  r.trace = j.at("trace").get<double>();
  r.identities = j.at("identities").get<std::map<std::string, double>>();
  r.verdict = j.at("verdict").get<std::string>() == "pass";
}

inline void to_json(nlohmann::ordered_json& j, const VerificationReport& r) {
  j = nlohmann::ordered_json{{"name", r.name},
                             {"kind", to_string(r.kind)},
                             {"dims", r.dims},
                             {"passed", r.passed},
                             {"pass_count", r.pass_count},
                             {"trial_count", r.records.size()},
                             {"worst_min_eig", r.worst_min_eig},
                             {"witness_seed", nullptr},
                             {"notes", r.notes},
                             {"records", r.records}};
  if (r.witness_seed) j["witness_seed"] = *r.witness_seed;
}
inline void from_json(const nlohmann::ordered_json& j, VerificationReport& r) {
  r.name = j.at("name").get<std::string>();
  r.kind = report_kind_from_string(j.at("kind").get<std::string>());
  r.dims = j.at("dims").get<SpaceDims>();
  r.passed = j.at("passed").get<bool>();
  r.pass_count = j.at("pass_count").get<int>();
  r.worst_min_eig = j.at("worst_min_eig").get<double>();
  r.witness_seed.reset();
  if (!j.at("witness_seed").is_null()) r.witness_seed = j.at("witness_seed").get<std::uint64_t>();
  r.notes = j.at("notes").get<std::vector<std::string>>();
  r.records = j.at("records").get<std::vector<TrialRecord>>();
}

inline void to_json(nlohmann::ordered_json& j, const RunConfigEcho& c) {
  j = nlohmann::ordered_json{{"command", c.command},   {"dims", c.dims},       {"trials", c.trials},
                             {"seed", c.seed},         {"tol", c.tol_psd},     {"tol_eq", c.tol_eq},
                             {"normalize", c.normalize ? "on" : "off"},        {"builders", c.builders},
                             {"g", c.gs},              {"format", c.format}};
}
inline void from_json(const nlohmann::ordered_json& j, RunConfigEcho& c) {
  c.command = j.at("command").get<std::string>();
  c.dims = j.at("dims").get<std::vector<SpaceDims>>();
  c.trials = j.at("trials").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.tol_psd = j.at("tol").get<double>();
  c.tol_eq = j.at("tol_eq").get<double>();
  c.normalize = j.at("normalize").get<std::string>() == "on";
  c.builders = j.at("builders").get<std::vector<std::string>>();
  c.gs = j.at("g").get<std::vector<std::string>>();
  c.format = j.at("format").get<std::string>();
}

inline void to_json(nlohmann::ordered_json& j, const RunManifest& m) {
  j = nlohmann::ordered_json{{"version", m.version},
                             {"config", m.config},
                             {"exit_status", m.exit_status},
                             {"reports", m.reports}};
}
inline void from_json(const nlohmann::ordered_json& j, RunManifest& m) {
  m.version = j.at("version").get<std::string>();
  m.config = j.at("config").get<RunConfigEcho>();
  m.exit_status = j.at("exit_status").get<int>();
  m.reports = j.at("reports").get<std::vector<VerificationReport>>();
}

inline std::string to_json_text(const RunManifest& m) { return nlohmann::ordered_json(m).dump(2) + "\n"; }

inline RunManifest parse_manifest(const std::string& text) {
  return nlohmann::ordered_json::parse(text).get<RunManifest>();
}

/// %.17g, which round-trips every double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// One row per trial: report, kind, builder, seed, min_eig, herm_defect, verdict.
inline std::string to_csv(const RunManifest& m) {
  std::string out = "report,kind,dims,builder,seed,min_eig,herm_defect,verdict\n";
  for (const auto& rep : m.reports)
    for (const auto& r : rep.records) {
      out += rep.name + "," + to_string(rep.kind) + "," + std::to_string(rep.dims.dA) + "x" +
             std::to_string(rep.dims.dB) + "x" + std::to_string(rep.dims.dC) + "," + r.builder + "," +
             std::to_string(r.seed) + "," + format_double(r.min_eig) + "," + format_double(r.herm_defect) + "," +
             (r.verdict ? "pass" : "fail") + "\n";
    }
  return out;
}

}  // namespace modineq
