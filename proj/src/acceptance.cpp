#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <unistd.h>

#include <fmt/format.h>

#include "acceptance_internal.hpp"
#include "fieldelim/errors.hpp"
#include "fieldelim/scenario.hpp"

namespace fieldelim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace acceptance_detail {

std::vector<double> pair_orders(const std::vector<double>& errors) {
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    out.push_back(std::log2(errors[k] / errors[k + 1]));
  }
  return out;
}

bool constants_stable(const std::vector<double>& errors,
                      const std::vector<double>& scales, double growth,
                      std::vector<double>* constants) {
  std::vector<double> C;
  for (std::size_t k = 0; k < errors.size(); ++k) C.push_back(errors[k] / scales[k]);
  bool ok = std::all_of(C.begin(), C.end(), [](double c) { return std::isfinite(c); });
  for (std::size_t k = 0; k + 1 < C.size(); ++k) ok = ok && C[k + 1] <= growth * C[k];
  if (constants) *constants = C;
  return ok;
}

}  // namespace acceptance_detail

using namespace acceptance_detail;

CriterionResult criterion_a6(const SuiteOptions&, bool scalar, bool spinor) {
  Stopwatch clock;
  CriterionResult r{"A6", "current conservation along trajectories"};
  r.passed = true;
  r.measured["C_growth_limit"] = 1.25;
  auto judge = [&](const std::string& name, const std::vector<int>& levels,
                   const std::vector<double>& residuals, double dt) {
    std::vector<double> scales, C;
    for (int n : levels) {
      const double h = 2 * std::numbers::pi / n;
      scales.push_back(h * h + dt * dt);
    }
    const bool ok = constants_stable(residuals, scales, 1.25, &C);
    r.passed = r.passed && ok;
    r.measured[name] = {{"n", levels},
                        {"dt", dt},
                        {"linf_residual", residuals},
                        {"C", C},
                        {"orders", pair_orders(residuals)}};
  };
  if (scalar) {
    std::vector<double> fo, co;
    // 8^3 is pre-asymptotic for the scalar data
    for (int n : {16, 32, 64}) {
      const auto t = scalar_trajectory(n, 1e-3, 100, false, true);
      fo.push_back(t.conservation_field_only);
      co.push_back(t.conservation_coupled);
    }
    judge("scalar_coupled", {16, 32, 64}, co, 1e-3);
    judge("scalar_field_only", {16, 32, 64}, fo, 1e-3);
  }
  if (spinor) {
    std::vector<double> res;
    for (int n : {8, 16, 32}) {
      res.push_back(spinor_trajectory(n, 5e-4, 50, 10, true).conservation);
    }
    judge("spinor_coupled", {8, 16, 32}, res, 5e-4);
  }
  r.seconds = clock.seconds();
  return r;
}

namespace {

constexpr const char* kDeterminismConfigs[][2] = {
    {"scalar", R"(engine = "scalar"
seed = 3
[lattice]
n = 8
length = 6.283185307179586
[integration]
dt = 1e-3
steps = 20
cadence = 5
[scalar]
mode = "field_only"
amp_phi = 0.2
amp_phi_dot = 0.2
amp_B = 0.2
amp_B_dot = 0.2
)"},
    {"spinor", R"(engine = "spinor"
seed = 5
[lattice]
n = 8
length = 6.283185307179586
[integration]
dt = 5e-4
steps = 10
cadence = 5
[spinor]
mode = "coupled"
amp_psi = 0.1
amp_A = 0.1
amp_A_dot = 0.1
)"},
    {"fock", R"(engine = "fock"
[integration]
dt = 1e-3
steps = 200
cadence = 50
[fock]
k = 2
N = 8
xi0 = [0.12, [0.0, 0.16]]
terms = [
  { mode = 0, coeff = [0.0, -1.0], exponents = [1, 0] },
  { mode = 0, coeff = 0.1, exponents = [0, 2] },
  { mode = 1, coeff = [0.0, -1.3], exponents = [0, 1] },
]
)"},
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path make_scratch(const SuiteOptions& o) {
  if (!o.scratch_dir.empty()) {
    fs::create_directories(o.scratch_dir);
    return o.scratch_dir;
  }
  std::string tmpl = (fs::temp_directory_path() / "fieldelim_a10_XXXXXX").string();
  if (!mkdtemp(tmpl.data())) {
    throw Error(ErrorKind::IoError, "cannot create scratch directory", {{"path", tmpl}});
  }
  return tmpl;
}

}  // namespace

CriterionResult criterion_a10(const SuiteOptions& o) {
  Stopwatch clock;
  CriterionResult r{"A10", "determinism and mutation sensitivity"};
  const fs::path scratch = make_scratch(o);
  bool identical = true;
  json runs = json::object();
  for (const auto& [name, text] : kDeterminismConfigs) {
    const fs::path config = scratch / fmt::format("{}.toml", name);
    std::ofstream(config) << text;
    std::string csv[2];
    int codes[2];
    for (int k = 0; k < 2; ++k) {
      const auto out = scratch / fmt::format("{}_{}", name, k);
      codes[k] = run_scenario(config, out).exit_code;
      csv[k] = slurp(out / "diagnostics.csv");
    }
    const bool same = codes[0] == 0 && codes[1] == 0 && !csv[0].empty() && csv[0] == csv[1];
    identical = identical && same;
    runs[name] = {{"exit_codes", codes}, {"bytes", csv[0].size()}, {"identical", same}};
  }
  if (o.scratch_dir.empty()) fs::remove_all(scratch);

  // the mutated closure must break the attainable parts of A1 and A2
  bool a1_mut_passes = false;
  double a1_mut_value = NAN;
  try {
    const auto t = scalar_trajectory(16, 1e-3, 100, true);
    a1_mut_value = t.max_rel_diff;
    a1_mut_passes = t.max_rel_diff <= 1e-4;
  } catch (const Error&) {
    a1_mut_passes = false;
  }
  SuiteOptions mutated = o;
  mutated.mutate_scalar = true;
  bool a2_mut_passes = false;
  json a2_mut;
  try {
    const auto a2 = criterion_a2(mutated);
    a2_mut_passes = a2.passed;
    a2_mut = a2.measured;
  } catch (const Error& e) {
    a2_mut = e.what();
  }
  r.passed = identical && !a1_mut_passes && !a2_mut_passes;
  r.measured = {{"diagnostics_identical", runs},
                {"mutated_A1_max_rel_diff", a1_mut_value},
                {"mutated_A1_passes", a1_mut_passes},
                {"mutated_A2_passes", a2_mut_passes},
                {"mutated_A2", a2_mut}};
  r.seconds = clock.seconds();
  return r;
}

std::vector<CriterionResult> run_suite(std::string_view suite,
                                       const SuiteOptions& options,
                                       const ResultSink& sink) {
  using Fn = std::function<CriterionResult()>;
  std::vector<std::pair<std::string, Fn>> plan;
  const bool all = suite == "all";
  const bool scalar = all || suite == "scalar";
  const bool spinor = all || suite == "spinor";
  const bool fock = all || suite == "fock";
  if (!scalar && !spinor && !fock) {
    throw Error(ErrorKind::ConfigInvalid, "unknown suite",
                {{"field", "suite"}, {"value", std::string(suite)},
                 {"allowed", {"scalar", "spinor", "fock", "all"}}});
  }
  const auto& o = options;
  if (scalar) {
    plan.emplace_back("A1", [&] { return criterion_a1(o); });
    plan.emplace_back("A2", [&] { return criterion_a2(o); });
  }
  if (spinor) {
    plan.emplace_back("A3", [&] { return criterion_a3(o); });
    plan.emplace_back("A4", [&] { return criterion_a4(o); });
    plan.emplace_back("A5", [&] { return criterion_a5(o); });
  }
  if (scalar || spinor) {
    plan.emplace_back("A6", [&] { return criterion_a6(o, scalar, spinor); });
  }
  if (fock) {
    plan.emplace_back("A7", [&] { return criterion_a7(o); });
    plan.emplace_back("A8", [&] { return criterion_a8(o); });
    plan.emplace_back("A9", [&] { return criterion_a9(o); });
  }
  if (scalar) plan.emplace_back("A10", [&] { return criterion_a10(o); });

  std::vector<CriterionResult> out;
  for (const auto& [id, fn] : plan) {
    if (!o.only.empty() && !o.only.contains(id)) continue;
    CriterionResult r;
    Stopwatch clock;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r.id = id;
      r.title = "aborted";
      r.passed = false;
      r.measured = {{"error", e.what()}};
      r.seconds = clock.seconds();
    }
    if (sink) sink(r);
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

std::string brief(const json& v) {
  if (v.is_number_float()) return fmt::format("{:.4g}", v.get<double>());
  if (v.is_array()) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : "/") + brief(x);
    return s;
  }
  if (v.is_object()) {
    std::string s;
    for (const auto& [k, x] : v.items()) s += (s.empty() ? "" : " ") + k + "=" + brief(x);
    return "{" + s + "}";
  }
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

std::string format_result(const CriterionResult& r) {
  std::string line = fmt::format("{} {:<4} {} ({:.1f} s)", r.passed ? "PASS" : "FAIL",
                                 r.id, r.title, r.seconds);
  for (const auto& [k, v] : r.measured.items()) line += fmt::format(" {}={}", k, brief(v));
  return line;
}

}  // namespace fieldelim
