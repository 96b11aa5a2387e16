#include "fieldelim/errors.hpp"

namespace fieldelim {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::LatticeMismatch: return "LatticeMismatch";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::NullSpace: return "NullSpace";
    case ErrorKind::SingularB0: return "SingularB0";
    case ErrorKind::SingularPhi: return "SingularPhi";
    case ErrorKind::SingularF: return "SingularF";
    case ErrorKind::SingularPsi1: return "SingularPsi1";
    case ErrorKind::BranchCutAmbiguity: return "BranchCutAmbiguity";
    case ErrorKind::NonPositiveDensity: return "NonPositiveDensity";
    case ErrorKind::ChainFailure: return "ChainFailure";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::TruncationTooSevere: return "TruncationTooSevere";
    case ErrorKind::DegreeVsCutoff: return "DegreeVsCutoff";
    case ErrorKind::Instability: return "Instability";
    case ErrorKind::VacuumDepleted: return "VacuumDepleted";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::Mismatch: return "Mismatch";
    case ErrorKind::MissingQuantity: return "MissingQuantity";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigInvalid:
    case ErrorKind::IoError:
      return 2;
    case ErrorKind::Mismatch:
    case ErrorKind::MissingQuantity:
      return 4;
    default:
      return 3;
  }
}

Error::Error(ErrorKind kind, const std::string& message, nlohmann::json detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      detail_(std::move(detail)) {}

nlohmann::json Error::to_json() const {
  return {{"error", std::string(to_string(kind_))},
          {"message", what()},
          {"detail", detail_}};
}

}  // namespace fieldelim
