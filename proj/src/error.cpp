#include "poseth2/error.hpp"

namespace poseth2 {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::CycleDetected: return "CycleDetected";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::DuplicateLabel: return "DuplicateLabel";
    case ErrorKind::NotComparable: return "NotComparable";
    case ErrorKind::SingularDiagonalBlock: return "SingularDiagonalBlock";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ResolventSingular: return "ResolventSingular";
    case ErrorKind::PartitionInvalid: return "PartitionInvalid";
    case ErrorKind::EigendecompositionFailure: return "EigendecompositionFailure";
    case ErrorKind::UnstableA: return "UnstableA";
    case ErrorKind::UnstableSystem: return "UnstableSystem";
    case ErrorKind::NotStabilizable: return "NotStabilizable";
    case ErrorKind::CrossTermNonzero: return "CrossTermNonzero";
    case ErrorKind::InputWeightSingular: return "InputWeightSingular";
    case ErrorKind::SubspaceExtractionFailure: return "SubspaceExtractionFailure";
    case ErrorKind::NotPosetCausal: return "NotPosetCausal";
    case ErrorKind::FNotBlockDiagonal: return "FNotBlockDiagonal";
    case ErrorKind::FRankDeficient: return "FRankDeficient";
    case ErrorKind::SubsystemNotStabilizable: return "SubsystemNotStabilizable";
    case ErrorKind::AssemblyIdentityViolated: return "AssemblyIdentityViolated";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

namespace {

// "(1,2) ..." details attach directly to the kind name: "NotPosetCausal(1,2) ...".
std::string format_message(ErrorKind kind, const std::string& detail) {
  std::string msg(to_string(kind));
  if (detail.empty()) return msg;
  if (detail.front() != '(') msg += ": ";
  return msg + detail;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(format_message(kind, detail)), kind_(kind), detail_(detail) {}

}  // namespace poseth2
