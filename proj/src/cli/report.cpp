#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <sstream>

#include "lck/cli/report.hpp"
#include "lck/potential/potential.hpp"

namespace lck::cli {

namespace {

std::string polarity_name(Polarity p) { return p == Polarity::Below ? "below" : "above"; }

std::string sig3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void VerificationReport::add(const std::string& name, double residual, double tolerance, Polarity polarity,
                             const std::string& anchor) {
  const bool pass = polarity == Polarity::Below ? residual < tolerance : residual > tolerance;
  checks.push_back({name, residual, tolerance, polarity, pass, anchor});
}

const Check* VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

bool VerificationReport::all_pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

void VerificationReport::finish() {
  if (exit_code == kPass && !all_pass()) exit_code = kFail;
}

nlohmann::ordered_json VerificationReport::to_json() const {
  nlohmann::ordered_json j;
  j["fixture"] = fixture;
  j["command"] = command;
  j["seed"] = options.seed;
  j["points"] = options.points;
  j["nodes"] = options.nodes;
  j["tol"] = options.tol;
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["residual"] = c.residual;
    e["tolerance"] = c.tolerance;
    e["polarity"] = polarity_name(c.polarity);
    e["pass"] = c.pass;
    e["paper_anchor"] = c.paper_anchor;
    j["checks"].push_back(e);
  }
  j["verdicts"] = nlohmann::ordered_json::array();
  for (const auto& v : verdicts) j["verdicts"].push_back({{"kind", v.kind}, {"witness", v.witness}});
  j["diagnostics"] = diagnostics;
  j["exit_code"] = exit_code;
  if (!error.empty()) j["error"] = error;
  j["runtime_ms"] = runtime_ms;
  return j;
}

nlohmann::ordered_json run_report(const Options& opt) {
  const auto start = std::chrono::steady_clock::now();
  nlohmann::ordered_json out;
  out["command"] = "report";
  out["timestamp"] = utc_timestamp();
  out["seed"] = opt.seed;
  out["points"] = opt.points;
  out["nodes"] = opt.nodes;
  out["tol"] = opt.tol;
  out["reports"] = nlohmann::ordered_json::array();
  nlohmann::ordered_json table = nlohmann::ordered_json::array();
  int passed = 0;
  const auto ids = pot::fixture_ids();
  for (const auto& id : ids) {
    const VerificationReport r = run_verify(id, opt);
    int failed = 0;
    for (const auto& c : r.checks) failed += c.pass ? 0 : 1;
    passed += r.exit_code == kPass ? 1 : 0;
    table.push_back({{"fixture", r.fixture},
                     {"exit_code", r.exit_code},
                     {"checks", r.checks.size()},
                     {"failed", failed},
                     {"verdicts", [&] {
                        std::vector<std::string> v;
                        for (const auto& e : r.verdicts) v.push_back(e.kind);
                        return v;
                      }()}});
    out["reports"].push_back(r.to_json());
  }
  out["summary"] = {{"fixtures", ids.size()},
                    {"passed", passed},
                    {"failed", static_cast<int>(ids.size()) - passed},
                    {"table", table}};
  out["runtime_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::string human_summary(const VerificationReport& r) {
  std::ostringstream s;
  s << r.command << " " << r.fixture << "\n";
  std::size_t width = 0;
  for (const auto& c : r.checks) width = std::max(width, c.name.size());
  for (const auto& c : r.checks) {
    s << "  " << (c.pass ? "PASS" : "FAIL") << "  " << c.name << std::string(width - c.name.size() + 2, ' ')
      << sig3(c.residual) << (c.polarity == Polarity::Below ? " < " : " > ") << sig3(c.tolerance);
    if (c.polarity == Polarity::Above && c.tolerance > 0.0) s << "  (expected large)";
    s << "\n";
  }
  for (const auto& v : r.verdicts) {
    s << "  verdict " << v.kind;
    for (const auto& w : v.witness) s << "; " << w;
    s << "\n";
  }
  if (!r.error.empty()) s << "  error: " << r.error << "\n";
  s << "  exit " << r.exit_code << " (" << sig3(r.runtime_ms) << " ms)\n";
  return s.str();
}

std::string report_summary(const nlohmann::ordered_json& report) {
  std::ostringstream s;
  const auto& sum = report.at("summary");
  for (const auto& row : sum.at("table")) {
    s << "  " << (row.at("exit_code").get<int>() == kPass ? "PASS" : "FAIL") << "  "
      << row.at("fixture").get<std::string>() << "  exit " << row.at("exit_code").get<int>() << ", "
      << row.at("failed").get<int>() << "/" << row.at("checks").get<int>() << " checks failed";
    for (const auto& v : row.at("verdicts")) s << ", " << v.get<std::string>();
    s << "\n";
  }
  s << sum.at("passed").get<int>() << "/" << sum.at("fixtures").get<int>() << " fixtures passed\n";
  return s.str();
}

nlohmann::ordered_json strip_volatile(nlohmann::ordered_json j) {
  if (j.is_object()) {
    j.erase("timestamp");
    j.erase("runtime_ms");
    for (auto& [k, v] : j.items()) v = strip_volatile(v);
  } else if (j.is_array()) {
    for (auto& v : j) v = strip_volatile(v);
  }
  return j;
}

}  // namespace lck::cli
