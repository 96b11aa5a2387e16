#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace fieldelim {

/// Every guard violation in the library maps to one of these names.
enum class ErrorKind {
  LatticeMismatch,
  NonConvergence,
  NullSpace,
  SingularB0,
  SingularPhi,
  SingularF,
  SingularPsi1,
  BranchCutAmbiguity,
  NonPositiveDensity,
  ChainFailure,
  PreconditionViolated,
  NonFinite,
  TruncationTooSevere,
  DegreeVsCutoff,
  Instability,
  VacuumDepleted,
  ConfigInvalid,
  Mismatch,
  MissingQuantity,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Process exit code for a failure of this kind (0 is reserved for success).
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        nlohmann::json detail = nlohmann::json::object());

  ErrorKind kind() const noexcept { return kind_; }
  const nlohmann::json& detail() const noexcept { return detail_; }

  /// {"error": "<Kind>", "message": ..., "detail": {...}}
  nlohmann::json to_json() const;

 private:
  ErrorKind kind_;
  nlohmann::json detail_;
};

}  // namespace fieldelim
