// fieldelim: run scenarios, compare run directories, run acceptance suites.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "fieldelim/acceptance.hpp"
#include "fieldelim/errors.hpp"
#include "fieldelim/scenario.hpp"

namespace fe = fieldelim;

namespace {

int report(const fe::Error& e) {
  std::cerr << e.to_json().dump() << "\n";
  return fe::exit_code(e.kind());
}

int cmd_run(const std::string& config, const std::string& out) {
  const auto outcome = fe::run_scenario(config, out);
  if (outcome.exit_code != 0) {
    std::cerr << outcome.error.dump() << "\n";
  } else {
    std::cout << "run complete: " << out << "/manifest.json\n";
  }
  return outcome.exit_code;
}

int cmd_compare(const std::string& a, const std::string& b,
                const std::string& quantity, double threshold) {
  try {
    const auto c = fe::compare_runs(a, b, quantity);
    std::cout << fmt::format("{:>8} {:>14} {:>14}\n", "step", "t", "rel_diff");
    for (const auto& row : c.rows) {
      std::cout << fmt::format("{:>8} {:>14.6g} {:>14.6e}\n", row.step, row.t, row.rel_diff);
    }
    const bool ok = c.max_rel_diff <= threshold;
    std::cout << fmt::format("max rel_diff {:.6e} (threshold {:.3e}): {}\n",
                             c.max_rel_diff, threshold, ok ? "ok" : "over threshold");
    return ok ? 0 : fe::exit_code(fe::ErrorKind::Mismatch);
  } catch (const fe::Error& e) {
    return report(e);
  }
}

int cmd_verify(const std::string& suite, bool mutate, const std::string& json_out) {
  fe::SuiteOptions opts;
  opts.mutate_scalar = mutate;
  try {
    const auto results = fe::run_suite(suite, opts, [](const fe::CriterionResult& r) {
      std::cout << fe::format_result(r) << std::endl;
    });
    std::size_t passed = 0;
    nlohmann::json all = nlohmann::json::array();
    for (const auto& r : results) {
      passed += r.passed;
      all.push_back({{"id", r.id}, {"title", r.title}, {"passed", r.passed},
                     {"seconds", r.seconds}, {"measured", r.measured}});
    }
    std::cout << fmt::format("{}/{} criteria pass\n", passed, results.size());
    if (!json_out.empty()) std::ofstream(json_out) << all.dump(2) << "\n";
    return passed == results.size() ? 0 : fe::exit_code(fe::ErrorKind::Mismatch);
  } catch (const fe::Error& e) {
    return report(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"field elimination toolkit"};
  app.require_subcommand(1);

  std::string config, out;
  auto* run = app.add_subcommand("run", "run a scenario from a TOML config");
  run->add_option("--config", config, "scenario file")->required();
  run->add_option("--out", out, "output directory")->required();

  std::string dir_a, dir_b, quantity;
  double threshold = 1e-4;
  auto* compare = app.add_subcommand("compare", "per-time rel_diff between two runs");
  compare->add_option("dirA", dir_a)->required();
  compare->add_option("dirB", dir_b)->required();
  compare->add_option("--quantity", quantity, "snapshot group or diagnostic name")->required();
  compare->add_option("--threshold", threshold, "largest acceptable rel_diff")
      ->capture_default_str();

  std::string suite = "all", json_out;
  bool mutate = false;
  auto* verify = app.add_subcommand("verify", "run an acceptance suite");
  verify->add_option("--suite", suite, "scalar, spinor, fock or all")->capture_default_str();
  verify->add_flag("--mutate", mutate, "use the sign-flipped scalar closure (mutation fixture)");
  verify->add_option("--json", json_out, "also write results as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fe::exit_code(fe::ErrorKind::ConfigInvalid);
  }
  if (*run) return cmd_run(config, out);
  if (*compare) return cmd_compare(dir_a, dir_b, quantity, threshold);
  return cmd_verify(suite, mutate, json_out);
}
