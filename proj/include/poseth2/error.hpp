#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace poseth2 {

enum class ErrorKind {
  // poset
  CycleDetected,
  UnknownLabel,
  DuplicateLabel,
  NotComparable,
  SingularDiagonalBlock,
  DimensionMismatch,
  // statespace
  ResolventSingular,
  PartitionInvalid,
  EigendecompositionFailure,
  UnstableA,
  UnstableSystem,
  // riccati
  NotStabilizable,
  CrossTermNonzero,
  InputWeightSingular,
  SubspaceExtractionFailure,
  // synthesis
  NotPosetCausal,
  FNotBlockDiagonal,
  FRankDeficient,
  SubsystemNotStabilizable,
  AssemblyIdentityViolated,
  // io
  ParseError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure the library reports. `what()` starts with the kind name,
/// followed by the detail, e.g. "NotPosetCausal(1,2): block A[1,2] ...".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace poseth2
