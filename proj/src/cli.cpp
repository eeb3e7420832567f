#include "poseth2/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "poseth2/error.hpp"
#include "poseth2/synthesis.hpp"
#include "poseth2/verify.hpp"

namespace poseth2::cli {

namespace {

int exit_code_for(const Error& e) {
  return e.kind() == ErrorKind::ParseError ? kInputError : kRejected;
}

void print_verdicts(const std::vector<Verdict>& verdicts, std::ostream& out) {
  std::size_t width = 0;
  for (const auto& v : verdicts) width = std::max(width, v.check_name.size());
  for (const auto& v : verdicts) {
    out << "  " << (v.passed ? "PASS" : "FAIL") << "  " << std::left
        << std::setw(static_cast<int>(width)) << v.check_name << std::right
        << "  measured " << format_number(v.measured) << "  tolerance "
        << format_number(v.tolerance) << "\n";
  }
}

std::size_t count_passed(const std::vector<Verdict>& verdicts) {
  std::size_t n = 0;
  for (const auto& v : verdicts) n += v.passed ? 1 : 0;
  return n;
}

void print_matrix(const Matrix& m, const std::string& indent, std::ostream& out) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << indent << "[";
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << " " << std::setw(12) << format_number(m(r, c));
    out << " ]\n";
  }
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string s;
  for (std::size_t k = 0; k < parts.size(); ++k) s += (k ? sep : "") + parts[k];
  return s;
}

std::string dims_text(const std::vector<Eigen::Index>& dims) {
  std::vector<std::string> parts;
  for (auto d : dims) parts.push_back(std::to_string(d));
  return join(parts, " ");
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  std::string s(buf);
  if (s == "-0") s = "0";
  return s;
}

void configure_logging() {
  auto logger = spdlog::get("poseth2");
  if (!logger) {
    logger = spdlog::stderr_color_mt("poseth2");
    spdlog::set_default_logger(logger);
  }
  const char* env = std::getenv("POSET_H2_LOG");
  const std::string level = env ? env : "error";
  if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else {
    spdlog::set_level(spdlog::level::err);
  }
}

int cmd_synth(const std::filesystem::path& plant_path, const std::filesystem::path& out_path,
              const Config& config, std::ostream& out, std::ostream& err) {
  ResultFile result;
  try {
    spdlog::info("reading plant {}", plant_path.string());
    const PlantData plant = validate_plant(load_plant(plant_path), config);
    spdlog::info("plant valid: {} elements, {} states", plant.poset().size(),
                 plant.partition().states.total());
    const SynthesisResult synthesis = synthesize(plant, config);
    spdlog::debug("controller degree {}", synthesis.artifacts.K_star.order());
    const VerifyReport report = run_all(plant, synthesis.artifacts, config);
    result = make_result(plant, synthesis, report, config);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code_for(e);
  }

  try {
    save_text(out_path, result_to_json(result));
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kInputError;
  }

  out << "controller degree " << result.artifacts.K_star.order() << " (bound "
      << result.degree_bound << ")\n";
  out << "h_open " << format_number(result.norms.h_open) << "  h_centralized "
      << format_number(result.norms.h_centralized) << "  h_decentralized "
      << format_number(result.norms.h_decentralized) << "\n";
  const std::size_t passed = count_passed(result.verdicts);
  out << "verdicts " << passed << "/" << result.verdicts.size() << " passed\n";
  if (passed != result.verdicts.size()) {
    for (const auto& v : result.verdicts) {
      if (!v.passed) err << "check failed: " << v.check_name << "\n";
    }
    return kVerdictFailed;
  }
  return kOk;
}

int cmd_verify(const std::filesystem::path& plant_path, const std::filesystem::path& result_path,
               std::ostream& out, std::ostream& err) {
  ResultFile stored;
  try {
    stored = load_result(result_path);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kInputError;
  }

  VerifyReport report;
  try {
    const PlantData plant = validate_plant(load_plant(plant_path), stored.config);
    const auto& part = plant.partition();
    if (stored.elements != plant.poset().labels() || stored.state_dims != part.states.sizes() ||
        stored.input_dims != part.inputs.sizes() ||
        stored.disturbance_dims != part.disturbances.sizes() ||
        stored.output_dim != part.output_dim) {
      err << to_string(ErrorKind::DimensionMismatch)
          << ": result file does not describe this plant's elements and block sizes\n";
      return kInputError;
    }
    report = run_all(plant, stored.artifacts, stored.config);
  } catch (const Error& e) {
    err << e.what() << "\n";
    if (e.kind() == ErrorKind::DimensionMismatch) return kInputError;
    return exit_code_for(e);
  }

  out << "verdicts:\n";
  print_verdicts(report.verdicts, out);
  const std::size_t passed = count_passed(report.verdicts);
  out << passed << "/" << report.verdicts.size() << " passed\n";
  return passed == report.verdicts.size() ? kOk : kVerdictFailed;
}

int cmd_report(const std::filesystem::path& result_path, std::ostream& out, std::ostream& err) {
  try {
    out << render_report(load_result(result_path));
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}

std::string render_report(const ResultFile& r) {
  const Poset poset = r.poset();
  const std::size_t p = poset.size();
  auto label = [&](ElementIndex i) { return poset.label(i); };
  std::ostringstream out;

  out << "poseth2 result (version " << r.version << ")\n\n";
  out << "poset: " << p << " elements, linear extension " << join(poset.labels(), " ") << "\n";
  std::vector<std::string> edges;
  for (auto [a, b] : poset.hasse_edges()) edges.push_back(label(a) + " -> " + label(b));
  out << "hasse edges: " << (edges.empty() ? std::string("none") : join(edges, ", ")) << "\n";
  out << "sigma_P: " << poset.sigma() << "\n";
  out << "state dims: " << dims_text(r.state_dims) << "\n";
  out << "input dims: " << dims_text(r.input_dims) << "\n";
  out << "disturbance dims: " << dims_text(r.disturbance_dims) << "\n";
  out << "output dim: " << r.output_dim << "\n\n";

  out << "gains K(dj,dj):\n";
  for (ElementIndex j = 0; j < p && j < r.gains.size(); ++j) {
    std::vector<std::string> down;
    for (auto k : poset.downstream(j)) down.push_back(label(k));
    out << "  K_" << r.gains[j].element << " on {" << join(down, ", ") << "}:\n";
    print_matrix(r.gains[j].K, "    ", out);
  }
  out << "\n";

  Eigen::Index n_max = 0;
  for (auto d : r.state_dims) n_max = std::max(n_max, d);
  out << "controller degree: " << r.artifacts.K_star.order() << " (expected " << r.degree_bound
      << ", bound sigma_P*n_max = " << static_cast<Eigen::Index>(poset.sigma()) * n_max << ")\n";
  out << "controller states: "
      << (r.controller_states.empty() ? std::string("none") : join(r.controller_states, " "))
      << "\n\n";

  out << "norms:\n";
  out << "  h_open          " << format_number(r.norms.h_open) << "\n";
  out << "  h_centralized   " << format_number(r.norms.h_centralized) << "\n";
  out << "  h_decentralized " << format_number(r.norms.h_decentralized) << "\n";
  const double gap = r.norms.h_decentralized - r.norms.h_centralized;
  out << "  decentralization gap: " << (std::abs(gap) <= 1e-8 ? std::string("0") : format_number(gap))
      << "\n\n";

  out << "local control laws: u = sum_j -K_j e(j)\n";
  for (ElementIndex j = 0; j < p; ++j) {
    std::vector<std::string> terms{"x_" + label(j)};
    for (auto i : poset.strict_upstream(j)) terms.push_back("q_" + label(j) + "(" + label(i) + ")");
    out << "  (Gamma x)_" << label(j) << " = " << join(terms, " - ") << "\n";
  }
  for (ElementIndex j = 0; j < p; ++j) {
    std::vector<std::string> parts{"(Gamma x)_" + label(j)};
    for (auto k : poset.strict_downstream(j)) parts.push_back("q_" + label(k) + "(" + label(j) + ")");
    out << "  e(" << label(j) << ") = [" << join(parts, "; ") << "]\n";
  }
  for (ElementIndex i = 0; i < p; ++i) {
    std::vector<std::string> terms;
    for (auto j : poset.upstream(i)) {
      terms.push_back("K_" + label(j) + "[u_" + label(i) + "] e(" + label(j) + ")");
    }
    out << "  u_" << label(i) << " = -" << join(terms, " - ") << "\n";
  }
  out << "\n";

  out << "verdicts:\n";
  print_verdicts(r.verdicts, out);
  out << count_passed(r.verdicts) << "/" << r.verdicts.size() << " passed\n";
  return out.str();
}

}  // namespace poseth2::cli
