#include "poseth2/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "poseth2/error.hpp"

namespace poseth2 {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::ParseError, "at " + (where.empty() ? std::string("/") : where) + ": " + what);
}

const json& field(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, "missing key \"" + key + "\"");
  return *it;
}

std::string read_string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

double read_number(const json& j, const std::string& where) {
  if (j.is_null()) return std::numeric_limits<double>::infinity();
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

std::vector<std::string> read_strings(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(read_string(j[k], where + "/" + std::to_string(k)));
  return out;
}

std::vector<std::pair<std::string, std::string>> read_edges(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of [from, to] pairs");
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string at = where + "/" + std::to_string(k);
    if (!j[k].is_array() || j[k].size() != 2) fail(at, "expected a [from, to] pair");
    out.emplace_back(read_string(j[k][0], at + "/0"), read_string(j[k][1], at + "/1"));
  }
  return out;
}

std::vector<Eigen::Index> read_dims(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of block sizes");
  std::vector<Eigen::Index> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number_integer()) fail(where + "/" + std::to_string(k), "expected an integer");
    out.push_back(j[k].get<Eigen::Index>());
  }
  return out;
}

// Row-major nested arrays with the expected shape. A matrix with no rows is
// written as [], one with no columns as a list of empty rows.
Matrix read_matrix(const json& j, const std::string& where, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array()) fail(where, "expected a nested array");
  if (static_cast<Eigen::Index>(j.size()) != rows) {
    fail(where, "expected " + std::to_string(rows) + " rows, found " + std::to_string(j.size()));
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    const std::string at = where + "/" + std::to_string(r);
    if (!row.is_array()) fail(at, "expected a row array");
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      fail(at, "expected " + std::to_string(cols) + " columns, found " + std::to_string(row.size()));
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) fail(at + "/" + std::to_string(c), "expected a number");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

// Shape from the data itself.
Matrix read_matrix(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected a nested array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = 0;
  if (rows > 0) {
    if (!j[0].is_array()) fail(where + "/0", "expected a row array");
    cols = static_cast<Eigen::Index>(j[0].size());
  }
  return read_matrix(j, where, rows, cols);
}

json write_matrix(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

json write_realization(const StateSpace& sys) {
  return json{{"A", write_matrix(sys.A)},
              {"B", write_matrix(sys.B)},
              {"C", write_matrix(sys.C)},
              {"D", write_matrix(sys.D)}};
}

StateSpace read_realization(const json& j, const std::string& where) {
  const Matrix d = read_matrix(field(j, "D", where), where + "/D");
  const auto n = static_cast<Eigen::Index>(field(j, "A", where).is_array() ? field(j, "A", where).size() : 0);
  Matrix a = read_matrix(field(j, "A", where), where + "/A", n, n);
  Matrix b = read_matrix(field(j, "B", where), where + "/B", n, d.cols());
  Matrix c = read_matrix(field(j, "C", where), where + "/C", d.rows(), n);
  return StateSpace(std::move(a), std::move(b), std::move(c), d);
}

json parse_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, std::string(e.what()));
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<Eigen::Index> to_internal(const Poset& poset, const std::vector<Eigen::Index>& dims) {
  std::vector<Eigen::Index> out(dims.size());
  for (ElementIndex i = 0; i < poset.size(); ++i) out[i] = dims[poset.input_position(i)];
  return out;
}

json dims_json(const BlockDims& dims) { return json(dims.sizes()); }

}  // namespace

PlantSpec plant_from_json(std::string_view text) {
  const json doc = parse_text(text);
  const json& pj = field(doc, "poset", "");
  Poset poset = Poset::build(read_strings(field(pj, "elements", "/poset"), "/poset/elements"),
                             read_edges(field(pj, "hasse_edges", "/poset"), "/poset/hasse_edges"));
  const std::size_t p = poset.size();

  const json& part = field(doc, "partition", "");
  auto dims = [&](const char* key) {
    const std::string at = std::string("/partition/") + key;
    auto d = read_dims(field(part, key, "/partition"), at);
    if (d.size() != p) {
      fail(at, "expected " + std::to_string(p) + " block sizes, found " + std::to_string(d.size()));
    }
    return d;
  };
  const auto state_in = dims("state_dims");
  const auto input_in = dims("input_dims");
  const auto dist_in = part.contains("disturbance_dims") ? dims("disturbance_dims") : state_in;
  const json& q_json = field(part, "output_dim", "/partition");
  if (!q_json.is_number_integer()) fail("/partition/output_dim", "expected an integer");
  const auto q = q_json.get<Eigen::Index>();

  auto total = [](const std::vector<Eigen::Index>& d) {
    Eigen::Index t = 0;
    for (auto v : d) t += v;
    return t;
  };
  const Eigen::Index n = total(state_in), m = total(input_in), w = total(dist_in);

  const Matrix a = read_matrix(field(doc, "A", ""), "/A", n, n);
  const Matrix b = read_matrix(field(doc, "B", ""), "/B", n, m);
  const Matrix c = read_matrix(field(doc, "C", ""), "/C", q, n);
  const Matrix d = read_matrix(field(doc, "D", ""), "/D", q, m);
  const Matrix f = read_matrix(field(doc, "F", ""), "/F", n, w);

  const auto ps = input_to_internal(poset, state_in);
  const auto pu = input_to_internal(poset, input_in);
  const auto pw = input_to_internal(poset, dist_in);

  BlockPartition partition{BlockDims(to_internal(poset, state_in)),
                           BlockDims(to_internal(poset, input_in)),
                           BlockDims(to_internal(poset, dist_in)), q};
  return PlantSpec{std::move(poset),
                   std::move(partition),
                   ps * a * ps.transpose(),
                   ps * b * pu.transpose(),
                   c * ps.transpose(),
                   d * pu.transpose(),
                   ps * f * pw.transpose()};
}

PlantSpec load_plant(const std::filesystem::path& path) { return plant_from_json(read_file(path)); }

std::string plant_to_json(const PlantSpec& plant) {
  json edges = json::array();
  for (auto [a, b] : plant.poset.hasse_edges()) {
    edges.push_back({plant.poset.label(a), plant.poset.label(b)});
  }
  json doc{
      {"poset", {{"elements", plant.poset.labels()}, {"hasse_edges", edges}}},
      {"partition",
       {{"state_dims", dims_json(plant.partition.states)},
        {"input_dims", dims_json(plant.partition.inputs)},
        {"disturbance_dims", dims_json(plant.partition.disturbances)},
        {"output_dim", plant.partition.output_dim}}},
      {"A", write_matrix(plant.A)},
      {"B", write_matrix(plant.B)},
      {"C", write_matrix(plant.C)},
      {"D", write_matrix(plant.D)},
      {"F", write_matrix(plant.F)}};
  return doc.dump(2) + "\n";
}

Poset ResultFile::poset() const { return Poset::build(elements, hasse_edges); }

ResultFile make_result(const PlantData& plant, const SynthesisResult& synthesis,
                       const VerifyReport& report, const Config& config) {
  ResultFile r;
  const Poset& poset = plant.poset();
  r.elements = poset.labels();
  for (auto [a, b] : poset.hasse_edges()) r.hasse_edges.emplace_back(poset.label(a), poset.label(b));
  r.state_dims = plant.partition().states.sizes();
  r.input_dims = plant.partition().inputs.sizes();
  r.disturbance_dims = plant.partition().disturbances.sizes();
  r.output_dim = plant.partition().output_dim;
  r.artifacts = synthesis.artifacts;
  for (ElementIndex j = 0; j < poset.size(); ++j) {
    GainRecord g{poset.label(j), synthesis.assembly.gain(j), Matrix()};
    if (j < synthesis.gains.size()) g.X = synthesis.gains[j].X;
    r.gains.push_back(std::move(g));
  }
  r.degree_bound = synthesis.degree_bound;
  r.controller_states = controller_state_labels(plant);
  r.norms = report.norms;
  r.verdicts = report.verdicts;
  r.config = config;
  return r;
}

std::string result_to_json(const ResultFile& r) {
  json edges = json::array();
  for (const auto& [a, b] : r.hasse_edges) edges.push_back({a, b});
  json gains = json::array();
  for (const auto& g : r.gains) {
    gains.push_back({{"element", g.element}, {"K", write_matrix(g.K)}, {"X", write_matrix(g.X)}});
  }
  json verdicts = json::array();
  for (const auto& v : r.verdicts) {
    verdicts.push_back({{"check", v.check_name},
                        {"passed", v.passed},
                        {"measured", number_or_null(v.measured)},
                        {"tolerance", number_or_null(v.tolerance)},
                        {"reference", v.reference}});
  }
  const Config& c = r.config;
  json doc{
      {"version", r.version},
      {"poset", {{"elements", r.elements}, {"hasse_edges", edges}}},
      {"partition",
       {{"state_dims", r.state_dims},
        {"input_dims", r.input_dims},
        {"disturbance_dims", r.disturbance_dims},
        {"output_dim", r.output_dim}}},
      {"controller", write_realization(r.artifacts.K_star)},
      {"phi", write_realization(r.artifacts.Phi)},
      {"gamma", write_realization(r.artifacts.Gamma)},
      {"k_phi", write_realization(r.artifacts.K_Phi)},
      {"q_star", write_realization(r.artifacts.Q_star)},
      {"gains", gains},
      {"degree", r.artifacts.K_star.order()},
      {"degree_bound", r.degree_bound},
      {"controller_states", r.controller_states},
      {"norms",
       {{"h_open", number_or_null(r.norms.h_open)},
        {"h_centralized", number_or_null(r.norms.h_centralized)},
        {"h_decentralized", number_or_null(r.norms.h_decentralized)}}},
      {"verdicts", verdicts},
      {"config",
       {{"atol", c.atol},
        {"stability_margin", c.stability_margin},
        {"freq_samples", c.freq_samples},
        {"parallel", c.parallel},
        {"identity_tol", c.identity_tol},
        {"transfer_atol", c.transfer_atol},
        {"inversion_tol", c.inversion_tol},
        {"path_formula_tol", c.path_formula_tol},
        {"factorization_tol", c.factorization_tol},
        {"spectrum_tol", c.spectrum_tol},
        {"norm_order_tol", c.norm_order_tol}}}};
  return doc.dump(2) + "\n";
}

ResultFile result_from_json(std::string_view text) {
  const json doc = parse_text(text);
  ResultFile r;
  r.version = read_string(field(doc, "version", ""), "/version");
  const json& pj = field(doc, "poset", "");
  r.elements = read_strings(field(pj, "elements", "/poset"), "/poset/elements");
  r.hasse_edges = read_edges(field(pj, "hasse_edges", "/poset"), "/poset/hasse_edges");
  const json& part = field(doc, "partition", "");
  r.state_dims = read_dims(field(part, "state_dims", "/partition"), "/partition/state_dims");
  r.input_dims = read_dims(field(part, "input_dims", "/partition"), "/partition/input_dims");
  r.disturbance_dims =
      read_dims(field(part, "disturbance_dims", "/partition"), "/partition/disturbance_dims");
  const json& q = field(part, "output_dim", "/partition");
  if (!q.is_number_integer()) fail("/partition/output_dim", "expected an integer");
  r.output_dim = q.get<Eigen::Index>();

  r.artifacts.K_star = read_realization(field(doc, "controller", ""), "/controller");
  r.artifacts.Phi = read_realization(field(doc, "phi", ""), "/phi");
  r.artifacts.Gamma = read_realization(field(doc, "gamma", ""), "/gamma");
  r.artifacts.K_Phi = read_realization(field(doc, "k_phi", ""), "/k_phi");
  r.artifacts.Q_star = read_realization(field(doc, "q_star", ""), "/q_star");

  const json& gains = field(doc, "gains", "");
  if (!gains.is_array()) fail("/gains", "expected an array");
  for (std::size_t k = 0; k < gains.size(); ++k) {
    const std::string at = "/gains/" + std::to_string(k);
    r.gains.push_back(GainRecord{read_string(field(gains[k], "element", at), at + "/element"),
                                 read_matrix(field(gains[k], "K", at), at + "/K"),
                                 read_matrix(field(gains[k], "X", at), at + "/X")});
  }
  const json& bound = field(doc, "degree_bound", "");
  if (!bound.is_number_integer()) fail("/degree_bound", "expected an integer");
  r.degree_bound = bound.get<Eigen::Index>();
  r.controller_states = read_strings(field(doc, "controller_states", ""), "/controller_states");

  const json& norms = field(doc, "norms", "");
  r.norms.h_open = read_number(field(norms, "h_open", "/norms"), "/norms/h_open");
  r.norms.h_centralized = read_number(field(norms, "h_centralized", "/norms"), "/norms/h_centralized");
  r.norms.h_decentralized =
      read_number(field(norms, "h_decentralized", "/norms"), "/norms/h_decentralized");

  const json& verdicts = field(doc, "verdicts", "");
  if (!verdicts.is_array()) fail("/verdicts", "expected an array");
  for (std::size_t k = 0; k < verdicts.size(); ++k) {
    const std::string at = "/verdicts/" + std::to_string(k);
    const json& v = verdicts[k];
    const json& passed = field(v, "passed", at);
    if (!passed.is_boolean()) fail(at + "/passed", "expected a boolean");
    r.verdicts.push_back(Verdict{read_string(field(v, "check", at), at + "/check"),
                                 passed.get<bool>(),
                                 read_number(field(v, "measured", at), at + "/measured"),
                                 read_number(field(v, "tolerance", at), at + "/tolerance"),
                                 read_string(field(v, "reference", at), at + "/reference")});
  }

  const json& cj = field(doc, "config", "");
  auto num = [&](const char* key) { return read_number(field(cj, key, "/config"), std::string("/config/") + key); };
  Config& c = r.config;
  c.atol = num("atol");
  c.stability_margin = num("stability_margin");
  c.freq_samples = static_cast<int>(num("freq_samples"));
  const json& par = field(cj, "parallel", "/config");
  if (!par.is_boolean()) fail("/config/parallel", "expected a boolean");
  c.parallel = par.get<bool>();
  c.identity_tol = num("identity_tol");
  c.transfer_atol = num("transfer_atol");
  c.inversion_tol = num("inversion_tol");
  c.path_formula_tol = num("path_formula_tol");
  c.factorization_tol = num("factorization_tol");
  c.spectrum_tol = num("spectrum_tol");
  c.norm_order_tol = num("norm_order_tol");
  return r;
}

ResultFile load_result(const std::filesystem::path& path) { return result_from_json(read_file(path)); }

void save_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ParseError, "cannot write " + path.string());
  out << text;
}

}  // namespace poseth2
