#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "lck/cli/report.hpp"

namespace {

int write_json(const nlohmann::ordered_json& j, const std::string& path) {
  if (path.empty()) return 0;
  std::ofstream out(path);
  if (!out) {
    std::cerr << "cannot write " << path << "\n";
    return 1;
  }
  out << j.dump(2) << "\n";
  return 0;
}

void add_common(CLI::App* app, lck::cli::Options& opt, std::string& json) {
  app->add_option("--points", opt.points, "Sample points per check")->check(CLI::PositiveNumber);
  app->add_option("--seed", opt.seed, "Sampler seed");
  app->add_option("--tol", opt.tol, "Tolerance of the exact identities")->check(CLI::PositiveNumber);
  app->add_option("--nodes", opt.nodes, "Quadrature nodes of the periodic solver")->check(CLI::Range(512, 1 << 20));
  app->add_option("--json", json, "Write the JSON report to this path");
}

int emit(const lck::cli::VerificationReport& r, const std::string& json) {
  std::cout << lck::cli::human_summary(r);
  if (write_json(r.to_json(), json) != 0) return lck::cli::kFail;
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verification of locally conformally Kaehler structures"};
  app.require_subcommand(1);
  lck::cli::Options opt;
  std::string json;

  std::string fixture;
  auto* verify = app.add_subcommand("verify", "Run the check suite of a fixture");
  verify->add_option("fixture", fixture, "Fixture id, e.g. hopf_diag:n=2,beta=0.5")->required();
  add_common(verify, opt, json);

  auto* potential = app.add_subcommand("potential", "Constructive potentials");
  potential->require_subcommand(1);
  std::string f;
  auto* first = potential->add_subcommand("first-order", "Periodic solution of g' = g(1 + f) - 1");
  first->add_option("--f", f, "const:<k> or cos:<eps>")->required();
  add_common(first, opt, json);
  std::string orbit_fixture;
  auto* orbit = potential->add_subcommand("orbit", "Potential averaged along the flow of JC");
  orbit->add_option("--fixture", orbit_fixture, "Fixture id")->required();
  add_common(orbit, opt, json);

  bool all = false;
  auto* report = app.add_subcommand("report", "Run every fixture and aggregate the reports");
  report->add_flag("--all", all, "Run every gallery fixture")->required();
  add_common(report, opt, json);

  CLI11_PARSE(app, argc, argv);

  if (verify->parsed()) return emit(lck::cli::run_verify(fixture, opt), json);
  if (first->parsed()) return emit(lck::cli::run_potential_first_order(f, opt), json);
  if (orbit->parsed()) return emit(lck::cli::run_potential_orbit(orbit_fixture, opt), json);
  const auto j = lck::cli::run_report(opt);
  std::cout << lck::cli::report_summary(j);
  if (write_json(j, json) != 0) return lck::cli::kFail;
  return j.at("summary").at("failed").get<int>() == 0 ? lck::cli::kPass : lck::cli::kFail;
}
