#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "poseth2/config.hpp"
#include "poseth2/synthesis.hpp"
#include "poseth2/verify.hpp"

namespace poseth2 {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Plant file:
///
///   { "poset": {"elements": [...], "hasse_edges": [[a, b], ...]},
///     "partition": {"state_dims": [...], "input_dims": [...],
///                   "disturbance_dims": [...],      (optional)
///                   "output_dim": q},
///     "A": [[...], ...], "B": ..., "C": ..., "D": ..., "F": ... }
///
/// Dimensions and matrix blocks follow the order of "elements"; the result is
/// permuted to linear-extension order. disturbance_dims defaults to
/// state_dims. Throws ParseError naming the offending JSON location, and the
/// Poset errors for bad order data.
PlantSpec plant_from_json(std::string_view text);
PlantSpec load_plant(const std::filesystem::path& path);

/// Plant file text in linear-extension order (parses back to the same plant).
std::string plant_to_json(const PlantSpec& plant);

struct GainRecord {
  std::string element;
  Matrix K;  // gain on the downstream set, inputs x states
  Matrix X;  // Riccati solution
};

/// Everything a synthesis run produces. Matrices are in linear-extension
/// order, listed by `elements`.
struct ResultFile {
  std::string version{kToolVersion};
  std::vector<std::string> elements;
  std::vector<std::pair<std::string, std::string>> hasse_edges;
  std::vector<Eigen::Index> state_dims;
  std::vector<Eigen::Index> input_dims;
  std::vector<Eigen::Index> disturbance_dims;
  Eigen::Index output_dim = 0;
  ControllerArtifacts artifacts;
  std::vector<GainRecord> gains;
  Eigen::Index degree_bound = 0;
  std::vector<std::string> controller_states;
  NormReport norms;
  std::vector<Verdict> verdicts;
  Config config;

  Poset poset() const;
};

ResultFile make_result(const PlantData& plant, const SynthesisResult& synthesis,
                       const VerifyReport& report, const Config& config);

/// Doubles are written in shortest round-trip form; an infinite norm is null.
std::string result_to_json(const ResultFile& result);
ResultFile result_from_json(std::string_view text);
ResultFile load_result(const std::filesystem::path& path);
void save_text(const std::filesystem::path& path, const std::string& text);

}  // namespace poseth2
