#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "envar/envar_optimizer.hpp"
#include "envar/eval_metrics.hpp"
#include "envar/synth.hpp"

namespace envar::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline constexpr const char* kFormatVersion = "envar-kit/1";

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j, const std::string& field);
json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j, const std::string& field);

json model_to_json(const StructuralModel& m, const std::string& method = "");
StructuralModel model_from_json(const json& j);

json generator_to_json(const GeneratorConfig& cfg);
/// Missing fields keep their defaults; unknown fields are rejected.
GeneratorConfig generator_from_json(const json& j, GeneratorConfig base = {});

json envar_config_to_json(const EnvarConfig& cfg);
EnvarConfig envar_config_from_json(const json& j, EnvarConfig base);

json truth_to_json(const GroundTruthInstance& inst, std::uint64_t seed);
/// The series is not part of the truth file and is left empty.
GroundTruthInstance truth_from_json(const json& j);

json score_to_json(const ScoreReport& r);
json centralities_to_json(const CentralityReport& r);

/// CSV with header "t,x1,...,xp", one row per time step.
void write_series_csv(const fs::path& path, const TimeSeries& ts);
TimeSeries read_series_csv(const fs::path& path);
TimeSeries parse_series_csv(std::istream& in, const std::string& source = "<stream>");

json read_json_file(const fs::path& path);
void write_json_file(const fs::path& path, const json& j);
void write_text_file(const fs::path& path, const std::string& text);

struct BaselineSpec {
  std::string name;
  json params = json::object();
};

struct MetricsConfig {
  double eta = 1.0;
  double binarize_mass = 0.85;
  double alpha = 0.05;
};

struct ExperimentManifest {
  GeneratorConfig generator;
  json envar_overrides = json::object();  // applied on top of default_config(p)
  std::vector<BaselineSpec> baselines;
  MetricsConfig metrics;
  std::string output_dir = "envar-out";
  std::string format_version = kFormatVersion;
  std::vector<int> grid_p;             // defaults to {generator.p}
  std::vector<double> grid_sigma_std;  // defaults to {generator.sigma_std}

  EnvarConfig envar_config(int p) const;
  std::vector<int> ps() const { return grid_p.empty() ? std::vector<int>{generator.p} : grid_p; }
  std::vector<double> sigma_stds() const {
    return grid_sigma_std.empty() ? std::vector<double>{generator.sigma_std} : grid_sigma_std;
  }
};

ExperimentManifest manifest_from_json(const json& j);
json manifest_to_json(const ExperimentManifest& m);
ExperimentManifest read_manifest(const fs::path& path);

}  // namespace envar::io
