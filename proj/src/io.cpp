#include "envar/io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace envar::io {

namespace {

[[noreturn]] void parse_fail(const std::string& msg) { throw Error(ErrorKind::Parse, msg); }

/// Typed access to a JSON object that rejects unknown keys.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string context) : j_(j), context_(std::move(context)) {
    if (!j_.is_object()) parse_fail(context_ + ": expected a JSON object");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw std::invalid_argument("expected a boolean");
      } else if constexpr (std::is_arithmetic_v<T>) {
        if (!it->is_number()) throw std::invalid_argument("expected a number");
        if constexpr (std::is_integral_v<T>) {
          const double d = it->template get<double>();
          if (d != std::floor(d)) throw std::invalid_argument("expected an integer");
        }
      }
      out = it->template get<T>();
    } catch (const std::exception& e) {
      parse_fail(context_ + "." + key + ": " + e.what());
    }
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) parse_fail(context_ + "." + it.key() + ": unknown field");
  }

 private:
  const json& j_;
  std::string context_;
  std::set<std::string> seen_;
};

void check_version(const json& j, const std::string& context) {
  auto it = j.find("format_version");
  if (it == j.end()) return;
  if (!it->is_string() || it->get<std::string>() != kFormatVersion)
    parse_fail(context + ".format_version: expected \"" + std::string(kFormatVersion) + "\"");
}

json correlation_value(const Correlation& c) { return c.r ? json(*c.r) : json(nullptr); }

}  // namespace

std::string format_double(double v) { return fmt::format("{}", v); }

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) parse_fail(field + ": expected a non-empty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) parse_fail(field + "[0]: expected a non-empty row");
  const std::size_t cols = j[0].size();
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      parse_fail(fmt::format("{}[{}]: expected {} entries", field, i, cols));
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) parse_fail(fmt::format("{}[{}][{}]: expected a number", field, i, k));
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
    }
  }
  return m;
}

json vector_to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) parse_fail(field + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) parse_fail(fmt::format("{}[{}]: expected a number", field, i));
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

json model_to_json(const StructuralModel& m, const std::string& method) {
  json j;
  j["format_version"] = kFormatVersion;
  if (!method.empty()) j["method"] = method;
  j["p"] = m.p();
  j["A0"] = matrix_to_json(m.a0);
  j["A1"] = matrix_to_json(m.a1);
  j["sigma"] = m.sigma;
  return j;
}

StructuralModel model_from_json(const json& j) {
  if (!j.is_object()) parse_fail("model: expected a JSON object");
  check_version(j, "model");
  for (const char* key : {"A0", "A1", "sigma"})
    if (!j.contains(key)) parse_fail(std::string("model: missing field '") + key + "'");
  if (!j["sigma"].is_number()) parse_fail("model.sigma: expected a number");
  return StructuralModel(matrix_from_json(j["A0"], "model.A0"), matrix_from_json(j["A1"], "model.A1"),
                         j["sigma"].get<double>());
}

json generator_to_json(const GeneratorConfig& c) {
  return json{{"p", c.p},
              {"t_len", c.t_len},
              {"edge_prob", c.edge_prob},
              {"weight_low", c.weight_low},
              {"weight_high", c.weight_high},
              {"spectral_cap", c.spectral_cap},
              {"sigma_nom", c.sigma_nom},
              {"sigma_std", c.sigma_std},
              {"seed", c.seed},
              {"episodes", c.episodes},
              {"burn_in", c.burn_in},
              {"fresh_graph", c.fresh_graph}};
}

GeneratorConfig generator_from_json(const json& j, GeneratorConfig c) {
  ObjectReader r(j, "generator");
  r.get("p", c.p);
  r.get("t_len", c.t_len);
  r.get("edge_prob", c.edge_prob);
  r.get("weight_low", c.weight_low);
  r.get("weight_high", c.weight_high);
  r.get("spectral_cap", c.spectral_cap);
  r.get("sigma_nom", c.sigma_nom);
  r.get("sigma_std", c.sigma_std);
  r.get("seed", c.seed);
  r.get("episodes", c.episodes);
  r.get("burn_in", c.burn_in);
  r.get("fresh_graph", c.fresh_graph);
  r.finish();
  c.validate();
  return c;
}

json envar_config_to_json(const EnvarConfig& c) {
  return json{{"lambda0", c.lambda0},
              {"lambda1", c.lambda1},
              {"mu", c.mu},
              {"c_min", c.c_min},
              {"c_max", c.c_max},
              {"learn_rate_base", c.learn_rate_base},
              {"max_steps", c.max_steps},
              {"grad_clip", c.grad_clip},
              {"seed", c.seed},
              {"restarts", c.restarts},
              {"convergence_tol", c.convergence_tol},
              {"patience", c.patience},
              {"w_recons", c.w_recons}};
}

EnvarConfig envar_config_from_json(const json& j, EnvarConfig c) {
  ObjectReader r(j, "envar");
  r.get("lambda0", c.lambda0);
  r.get("lambda1", c.lambda1);
  r.get("mu", c.mu);
  r.get("c_min", c.c_min);
  r.get("c_max", c.c_max);
  r.get("learn_rate_base", c.learn_rate_base);
  r.get("max_steps", c.max_steps);
  r.get("grad_clip", c.grad_clip);
  r.get("seed", c.seed);
  r.get("restarts", c.restarts);
  r.get("convergence_tol", c.convergence_tol);
  r.get("patience", c.patience);
  r.get("w_recons", c.w_recons);
  r.finish();
  c.validate();
  return c;
}

json truth_to_json(const GroundTruthInstance& inst, std::uint64_t seed) {
  json j = model_to_json(inst.model);
  j["per_node_sigmas"] = vector_to_json(inst.per_node_sigmas);
  j["seed"] = seed;
  j["episode"] = inst.episode_index;
  return j;
}

GroundTruthInstance truth_from_json(const json& j) {
  GroundTruthInstance inst;
  inst.model = model_from_json(j);
  if (j.contains("per_node_sigmas")) {
    inst.per_node_sigmas = vector_from_json(j["per_node_sigmas"], "truth.per_node_sigmas");
    if (inst.per_node_sigmas.size() != inst.model.p() || (inst.per_node_sigmas.array() <= 0.0).any())
      parse_fail("truth.per_node_sigmas: expected p positive entries");
  } else {
    inst.per_node_sigmas = Vector::Constant(inst.model.p(), inst.model.sigma);
  }
  if (j.contains("episode")) {
    if (!j["episode"].is_number_integer()) parse_fail("truth.episode: expected an integer");
    inst.episode_index = j["episode"].get<int>();
  }
  return inst;
}

json score_to_json(const ScoreReport& r) {
  json j;
  j["format_version"] = kFormatVersion;
  j["method_name"] = r.method_name;
  j["p"] = r.p;
  j["episode"] = r.episode;
  j["sf_oad"] = r.sf_oad;
  j["obs_oad"] = r.obs_oad;
  j["pearson_phi"] = correlation_value(r.phi);
  j["pearson_sigma_u"] = correlation_value(r.sigma_u);
  j["pearson_a0"] = correlation_value(r.a0);
  j["pearson_a1"] = correlation_value(r.a1);
  j["p_values"] = json{{"phi", r.phi.p_value},
                       {"sigma_u", r.sigma_u.p_value},
                       {"a0", r.a0.p_value},
                       {"a1", r.a1.p_value}};
  return j;
}

json centralities_to_json(const CentralityReport& r) {
  return json{{"in_degree", r.in_degree}, {"out_degree", r.out_degree}, {"net_flow", r.net_flow}};
}

void write_series_csv(const fs::path& path, const TimeSeries& ts) {
  std::ostringstream os;
  os << 't';
  for (int i = 0; i < ts.p(); ++i) os << ",x" << (i + 1);
  os << '\n';
  for (int t = 0; t < ts.t_len(); ++t) {
    os << t;
    for (int i = 0; i < ts.p(); ++i) os << ',' << format_double(ts.data(i, t));
    os << '\n';
  }
  write_text_file(path, os.str());
}

TimeSeries parse_series_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) parse_fail(source + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header[0] != "t") parse_fail(source + ": line 1: header must be t,x1,...,xp");
  const std::size_t p = header.size() - 1;
  for (std::size_t i = 1; i < header.size(); ++i)
    if (header[i] != "x" + std::to_string(i))
      parse_fail(fmt::format("{}: line 1: expected column 'x{}', got '{}'", source, i, header[i]));

  std::vector<double> values;
  std::size_t rows = 0;
  double prev_t = -std::numeric_limits<double>::infinity();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      try {
        std::size_t used = 0;
        v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        parse_fail(fmt::format("{}: line {}: column {}: '{}' is not a number", source, line_no, col + 1, cell));
      }
      if (!std::isfinite(v)) parse_fail(fmt::format("{}: line {}: non-finite value", source, line_no));
      if (col == 0) {
        if (!(v > prev_t)) parse_fail(fmt::format("{}: line {}: t must be strictly increasing", source, line_no));
        prev_t = v;
      } else {
        values.push_back(v);
      }
      ++col;
    }
    if (col != p + 1)
      parse_fail(fmt::format("{}: line {}: expected {} columns, got {}", source, line_no, p + 1, col));
    ++rows;
  }
  TimeSeries ts;
  ts.data = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(p),
                                     static_cast<Eigen::Index>(rows));
  return ts;
}

TimeSeries read_series_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open series file " + path.string());
  return parse_series_csv(in, path.string());
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

void write_json_file(const fs::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

EnvarConfig ExperimentManifest::envar_config(int p) const {
  return envar_config_from_json(envar_overrides, default_config(p));
}

ExperimentManifest manifest_from_json(const json& j) {
  ExperimentManifest m;
  ObjectReader r(j, "manifest");
  r.get("format_version", m.format_version);
  if (m.format_version != kFormatVersion)
    parse_fail("manifest.format_version: expected \"" + std::string(kFormatVersion) + "\"");
  if (const json* g = r.find("generator")) m.generator = generator_from_json(*g);
  if (const json* e = r.find("envar")) {
    if (!e->is_object()) parse_fail("manifest.envar: expected a JSON object");
    m.envar_overrides = *e;
    (void)m.envar_config(m.generator.p);  // validate early
  }
  if (const json* b = r.find("baselines")) {
    if (!b->is_array()) parse_fail("manifest.baselines: expected an array");
    for (std::size_t i = 0; i < b->size(); ++i) {
      ObjectReader br((*b)[i], fmt::format("manifest.baselines[{}]", i));
      BaselineSpec spec;
      br.get("name", spec.name);
      if (const json* params = br.find("params")) spec.params = *params;
      br.finish();
      if (spec.name != "eqvar-gds" && spec.name != "ols-only" && spec.name != "envar")
        parse_fail(fmt::format("manifest.baselines[{}].name: unknown method '{}'", i, spec.name));
      m.baselines.push_back(std::move(spec));
    }
  }
  if (const json* mt = r.find("metrics")) {
    ObjectReader mr(*mt, "manifest.metrics");
    mr.get("eta", m.metrics.eta);
    mr.get("binarize_mass", m.metrics.binarize_mass);
    mr.get("alpha", m.metrics.alpha);
    mr.finish();
    if (!(m.metrics.eta >= 0.0)) parse_fail("manifest.metrics.eta: must be nonnegative");
    if (!(m.metrics.binarize_mass > 0.0 && m.metrics.binarize_mass <= 1.0))
      parse_fail("manifest.metrics.binarize_mass: must lie in (0, 1]");
    if (!(m.metrics.alpha > 0.0 && m.metrics.alpha < 1.0)) parse_fail("manifest.metrics.alpha: must lie in (0, 1)");
  }
  r.get("output_dir", m.output_dir);
  if (const json* g = r.find("grid")) {
    ObjectReader gr(*g, "manifest.grid");
    gr.get("p", m.grid_p);
    gr.get("sigma_std", m.grid_sigma_std);
    gr.finish();
  }
  r.finish();
  if (m.grid_p.empty()) m.grid_p = {m.generator.p};
  if (m.grid_sigma_std.empty()) m.grid_sigma_std = {m.generator.sigma_std};
  for (int p : m.grid_p)
    if (p < 1) parse_fail("manifest.grid.p: entries must be positive");
  for (double s : m.grid_sigma_std)
    if (!(s >= 0.0)) parse_fail("manifest.grid.sigma_std: entries must be nonnegative");
  return m;
}

json manifest_to_json(const ExperimentManifest& m) {
  json j;
  j["format_version"] = m.format_version;
  j["generator"] = generator_to_json(m.generator);
  j["envar"] = m.envar_overrides;
  json b = json::array();
  for (const auto& s : m.baselines) b.push_back(json{{"name", s.name}, {"params", s.params}});
  j["baselines"] = b;
  j["metrics"] = json{{"eta", m.metrics.eta}, {"binarize_mass", m.metrics.binarize_mass}, {"alpha", m.metrics.alpha}};
  j["output_dir"] = m.output_dir;
  j["grid"] = json{{"p", m.grid_p}, {"sigma_std", m.grid_sigma_std}};
  return j;
}

ExperimentManifest read_manifest(const fs::path& path) {
  try {
    return manifest_from_json(read_json_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace envar::io
