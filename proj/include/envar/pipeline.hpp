#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "envar/io.hpp"

namespace envar::pipeline {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericalFailure = 3 };

ExitCode exit_code_for(ErrorKind kind);

struct Preprocess {
  bool center = true;
  bool detrend = false;
  bool zscore = false;
};

TimeSeries preprocess(const TimeSeries& raw, const Preprocess& opts);

struct FitOptions {
  std::string method = "envar";  // envar | eqvar-gds | ols-only
  double ridge_tau = 0.0;
  double alpha = 0.05;
  Preprocess prep;
  std::optional<std::uint64_t> seed;  // overrides the envar seed
  io::json envar_overrides = io::json::object();
};

struct FitOutcome {
  StructuralModel model;
  io::json report;
};

/// Fits a preprocessed series with the requested method.
FitOutcome fit_series(const TimeSeries& series, const FitOptions& opts);

/// Writes one directory per (p, sigma_std, episode) with series.csv,
/// truth_model.json and instance_meta.json. Returns the directories.
std::vector<fs::path> cmd_simulate(const io::ExperimentManifest& manifest, const fs::path& out_dir);

/// Writes model.json and fit_report.json into out_dir.
FitOutcome cmd_fit(const fs::path& series_path, const FitOptions& opts, const fs::path& out_dir);

struct EvaluateOptions {
  double eta = 1.0;
  double binarize_mass = 0.85;
};

io::json cmd_evaluate(const fs::path& model_path, const fs::path& truth_path,
                      const EvaluateOptions& opts, const fs::path& out_path);

struct BenchmarkOptions {
  int jobs = 1;
  bool timing = false;  // wall_ms is written as NA unless enabled
};

struct BenchmarkRow {
  int p = 0;
  double sigma_std = 0.0;
  std::string method;
  int episode = 0;
  std::optional<ScoreReport> score;
  double wall_ms = 0.0;
  std::string status = "ok";
};

/// simulate -> fit each method -> evaluate over the manifest grid. Writes
/// summary.csv, summary_agg.csv (mean and SEM per p, sigma_std, method) and
/// per-run score/model files. A failing run yields an error row.
std::vector<BenchmarkRow> cmd_benchmark(const io::ExperimentManifest& manifest, const fs::path& out_dir,
                                        const BenchmarkOptions& opts = {});

std::vector<std::string> benchmark_methods(const io::ExperimentManifest& manifest);

std::string summary_csv(const std::vector<BenchmarkRow>& rows, bool timing);
std::string aggregate_csv(const std::vector<BenchmarkRow>& rows);

}  // namespace envar::pipeline
