#pragma once

#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fieldelim {

struct CriterionResult {
  std::string id;     // "A1" .. "A10"
  std::string title;
  bool passed = false;
  /// Measured values and the thresholds they were held to.
  nlohmann::json measured = nlohmann::json::object();
  double seconds = 0.0;
};

struct SuiteOptions {
  /// Run the scalar criteria against the sign-flipped spatial closure.
  bool mutate_scalar = false;
  /// Scratch directory for the determinism check (defaults to a temp dir).
  std::string scratch_dir;
  /// If non-empty, run only these criteria ("A3", ...) of the suite.
  std::set<std::string> only;
};

using ResultSink = std::function<void(const CriterionResult&)>;

/// suite: "scalar", "spinor", "fock" or "all". Unknown names throw
/// ConfigInvalid. Each criterion is reported to `sink` as soon as it
/// finishes; a criterion that throws is reported as failed with the error.
std::vector<CriterionResult> run_suite(std::string_view suite,
                                       const SuiteOptions& options = {},
                                       const ResultSink& sink = {});

/// One line: "PASS A1  <title>  key=value ...".
std::string format_result(const CriterionResult& r);

// Individual criteria (exposed for the acceptance binary and tests).
CriterionResult criterion_a1(const SuiteOptions& o);
CriterionResult criterion_a2(const SuiteOptions& o);
CriterionResult criterion_a3(const SuiteOptions& o);
CriterionResult criterion_a4(const SuiteOptions& o);
CriterionResult criterion_a5(const SuiteOptions& o);
CriterionResult criterion_a6(const SuiteOptions& o, bool scalar, bool spinor);
CriterionResult criterion_a7(const SuiteOptions& o);
CriterionResult criterion_a8(const SuiteOptions& o);
CriterionResult criterion_a9(const SuiteOptions& o);
CriterionResult criterion_a10(const SuiteOptions& o);

namespace acceptance_detail {

/// log2(e_k / e_{k+1}) for successive halvings of h.
std::vector<double> pair_orders(const std::vector<double>& errors);
/// C_k = e_k / scale_k and whether C_{k+1} <= growth * C_k for all k.
bool constants_stable(const std::vector<double>& errors,
                      const std::vector<double>& scales, double growth,
                      std::vector<double>* constants = nullptr);

}  // namespace acceptance_detail

}  // namespace fieldelim
