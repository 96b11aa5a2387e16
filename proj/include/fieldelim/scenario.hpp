#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fieldelim/fock.hpp"
#include "fieldelim/scalar_ed.hpp"
#include "fieldelim/spinor_ed.hpp"

namespace fieldelim {

enum class Engine { Scalar, Spinor, Fock };

struct ScalarScenario {
  bool coupled = false;
  ScalarParams params;
  ScalarInitialSpec initial;
};

struct SpinorScenario {
  bool coupled = false;
  SpinorParams params;
  SpinorInitialSpec initial;
};

struct FockScenario {
  ModeSystem system;
  int cutoff = 10;
  std::vector<cplx> xi0;
  double tail_tol = 1e-12;
  double eps_vac = 1e-12;
  double max_norm_growth = 1e6;
};

/// A validated run description. Exactly one engine section is populated.
struct Scenario {
  Engine engine = Engine::Scalar;
  std::uint64_t seed = 1;
  std::array<int, 3> n{8, 8, 8};
  std::array<double, 3> length{};
  double dt = 1e-3;
  std::size_t steps = 0;
  std::size_t cadence = 1;           // diagnostics
  std::size_t snapshot_cadence = 0;  // 0: initial and final slice only
  std::optional<ScalarScenario> scalar;
  std::optional<SpinorScenario> spinor;
  std::optional<FockScenario> fock;

  Lattice lattice() const;
};

/// Parses TOML text. Throws ConfigInvalid whose detail lists every
/// offending field as {"field": ..., "problem": ...}.
Scenario parse_scenario(std::string_view toml_text);

/// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string config_hash(std::string_view bytes);

struct RunOutcome {
  int exit_code = 0;
  nlohmann::json error;  // null on success
};

/// Runs a scenario from a config file into `out_dir`: snapshots/*.fld,
/// diagnostics.csv, manifest.json (written last, atomically) and, on
/// failure, error.json. Config and engine failures never throw; they are
/// reported in the outcome and the manifest.
RunOutcome run_scenario(const std::filesystem::path& config,
                        const std::filesystem::path& out_dir);

struct ComparisonRow {
  std::size_t step;
  double t;
  double rel_diff;
};

struct Comparison {
  std::string quantity;
  std::vector<ComparisonRow> rows;
  double max_rel_diff = 0.0;
};

/// Per-time rel_diff of a snapshot group (e.g. "B") or a diagnostic column
/// between two run directories. Throws Mismatch (lattice, dt or cadences
/// differ) and MissingQuantity.
Comparison compare_runs(const std::filesystem::path& a,
                        const std::filesystem::path& b,
                        const std::string& quantity);

}  // namespace fieldelim
