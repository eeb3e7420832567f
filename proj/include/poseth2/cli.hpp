#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "poseth2/config.hpp"
#include "poseth2/io.hpp"

namespace poseth2::cli {

/// Exit codes shared by the commands.
enum ExitCode : int {
  kOk = 0,
  kInputError = 1,       // unreadable or malformed file, plant/result mismatch
  kRejected = 2,         // plant fails validation or synthesis cannot proceed
  kVerdictFailed = 3,    // some verification check failed
};

/// Reads POSET_H2_LOG (error, info, debug; default error) and sets the
/// logger level.
void configure_logging();

/// Validates and synthesizes, runs the verification suite and writes the
/// result file. Prints a short summary on `out`, errors on `err`.
int cmd_synth(const std::filesystem::path& plant_path, const std::filesystem::path& out_path,
              const Config& config, std::ostream& out, std::ostream& err);

/// Re-checks the stored controller realizations against the plant with the
/// tolerances echoed in the result file and prints the verdict table.
int cmd_verify(const std::filesystem::path& plant_path, const std::filesystem::path& result_path,
               std::ostream& out, std::ostream& err);

/// Prints render_report() of a stored result.
int cmd_report(const std::filesystem::path& result_path, std::ostream& out, std::ostream& err);

/// Human-readable summary. Byte-for-byte deterministic for a given result;
/// numbers carry 6 significant digits.
std::string render_report(const ResultFile& result);

/// %.6g with negative zero printed as 0.
std::string format_number(double v);

}  // namespace poseth2::cli
