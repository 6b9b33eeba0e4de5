#pragma once

// Verification reports for the command-line tool: named residual checks with a
// pass polarity, torus verdicts, and their JSON and human renderings.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace lck::cli {

enum class Polarity { Below, Above };

struct Check {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  Polarity polarity = Polarity::Below;
  bool pass = false;
  std::string paper_anchor;
};

struct VerdictEntry {
  std::string kind;
  std::vector<std::string> witness;
};

struct Options {
  int points = 200;
  std::uint64_t seed = 42;
  double tol = 1e-8;
  int nodes = 512;
};

enum ExitCode { kPass = 0, kFail = 1, kUnknown = 2, kNumerical = 3, kInadmissible = 4 };

struct VerificationReport {
  std::string fixture;
  std::string command;
  Options options;
  std::vector<Check> checks;
  std::vector<VerdictEntry> verdicts;
  nlohmann::ordered_json diagnostics = nlohmann::ordered_json::object();
  std::string error;
  int exit_code = kPass;
  double runtime_ms = 0.0;

  // Adds a check that passes when residual < tolerance (Below) or residual > tolerance (Above).
  void add(const std::string& name, double residual, double tolerance, Polarity polarity,
           const std::string& anchor);
  const Check* find(const std::string& name) const;
  bool all_pass() const;
  // exit_code from the checks unless an error code was already set.
  void finish();
  nlohmann::ordered_json to_json() const;
};

VerificationReport run_verify(const std::string& fixture, const Options& opt);
// f is "const:k" or "cos:eps".
VerificationReport run_potential_first_order(const std::string& f, const Options& opt);
VerificationReport run_potential_orbit(const std::string& fixture, const Options& opt);
// Every fixture of the gallery in id order, with a summary of exit codes.
nlohmann::ordered_json run_report(const Options& opt);

// One line per check, residuals with 3 significant digits.
std::string human_summary(const VerificationReport& r);
std::string report_summary(const nlohmann::ordered_json& report);

// Keys that change between identical runs.
nlohmann::ordered_json strip_volatile(nlohmann::ordered_json j);

}  // namespace lck::cli
