// envar-kit: simulate, fit, evaluate and benchmark structural VAR(1) models.

#include <iostream>

#include <CLI11.hpp>

#include "envar/log.hpp"
#include "envar/pipeline.hpp"

namespace fs = std::filesystem;
using namespace envar;

int main(int argc, char** argv) {
  CLI::App app{"Causal discovery for equal-variance structural VAR(1) models"};
  app.require_subcommand(1);

  std::string manifest_path, output, series_path, model_path, truth_path, method = "envar";
  std::optional<std::uint64_t> seed;
  double eta = 1.0, alpha = 0.05, binarize_mass = 0.85, ridge_tau = 0.0;
  bool center = true, detrend_flag = false, zscore_flag = false, timing = false;
  int jobs = 1;

  auto* sim = app.add_subcommand("simulate", "Generate ground-truth instances from a manifest");
  sim->add_option("--manifest", manifest_path, "Experiment manifest (JSON)")->required()->check(CLI::ExistingFile);
  sim->add_option("--output", output, "Output directory (default: manifest output_dir)");
  sim->add_option("--seed", seed, "Override generator seed");

  auto* fit = app.add_subcommand("fit", "Fit a model to a series CSV");
  fit->add_option("series", series_path, "Series CSV (t,x1,...,xp)")->required();
  fit->add_option("--method", method, "envar | eqvar-gds | ols-only")
      ->check(CLI::IsMember({"envar", "eqvar-gds", "ols-only"}));
  fit->add_option("--output", output, "Output directory")->required();
  fit->add_option("--seed", seed, "Optimizer seed");
  fit->add_option("--alpha", alpha, "EqVarGDS significance level")->check(CLI::Range(0.0, 1.0));
  fit->add_option("--ridge-tau", ridge_tau, "Ridge added to the residual covariance")->check(CLI::NonNegativeNumber);
  fit->add_option("--manifest", manifest_path, "Take ENVAR settings from this manifest")->check(CLI::ExistingFile);
  fit->add_flag("--center,!--no-center", center, "Subtract row means (default on)");
  fit->add_flag("--detrend,!--no-detrend", detrend_flag, "Remove a linear trend per row");
  fit->add_flag("--zscore,!--no-zscore", zscore_flag, "Scale rows to unit variance");

  auto* eval = app.add_subcommand("evaluate", "Score a fitted model against a truth file");
  eval->add_option("model", model_path, "model.json")->required();
  eval->add_option("truth", truth_path, "truth_model.json")->required();
  eval->add_option("--eta", eta, "Noise-scale weight of the observational discrepancy")->check(CLI::NonNegativeNumber);
  eval->add_option("--binarize-mass", binarize_mass, "Cumulative weight kept when binarizing")
      ->check(CLI::Range(0.0, 1.0));
  eval->add_option("--output", output, "score.json path (default: stdout only)");

  auto* bench = app.add_subcommand("benchmark", "Run simulate -> fit -> evaluate over a grid");
  bench->add_option("--manifest", manifest_path, "Experiment manifest (JSON)")->required()->check(CLI::ExistingFile);
  bench->add_option("--output", output, "Output directory (default: manifest output_dir)");
  bench->add_option("--jobs", jobs, "Parallel workers")->check(CLI::PositiveNumber);
  bench->add_option("--seed", seed, "Override generator seed");
  bench->add_flag("--timing", timing, "Record wall_ms (makes summary.csv non-reproducible)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? pipeline::kOk : pipeline::kUsage;
  }

  try {
    if (*sim) {
      auto manifest = io::read_manifest(manifest_path);
      if (seed) manifest.generator.seed = *seed;
      const fs::path out = output.empty() ? fs::path(manifest.output_dir) : fs::path(output);
      for (const auto& dir : pipeline::cmd_simulate(manifest, out)) std::cout << dir.string() << '\n';
    } else if (*fit) {
      pipeline::FitOptions opts;
      opts.method = method;
      opts.alpha = alpha;
      opts.ridge_tau = ridge_tau;
      opts.seed = seed;
      opts.prep = {center, detrend_flag, zscore_flag};
      if (!manifest_path.empty()) opts.envar_overrides = io::read_manifest(manifest_path).envar_overrides;
      pipeline::cmd_fit(series_path, opts, output);
      std::cout << (fs::path(output) / "model.json").string() << '\n';
    } else if (*eval) {
      const auto j = pipeline::cmd_evaluate(model_path, truth_path, {eta, binarize_mass}, output);
      std::cout << j.dump(2) << '\n';
    } else if (*bench) {
      auto manifest = io::read_manifest(manifest_path);
      if (seed) manifest.generator.seed = *seed;
      const fs::path out = output.empty() ? fs::path(manifest.output_dir) : fs::path(output);
      const auto rows = pipeline::cmd_benchmark(manifest, out, {jobs, timing});
      std::size_t failed = 0;
      for (const auto& r : rows) failed += r.score ? 0 : 1;
      std::cout << (out / "summary.csv").string() << " (" << rows.size() << " runs, " << failed << " failed)\n";
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return pipeline::exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error [io]: " << e.what() << '\n';
    return pipeline::kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return pipeline::kNumericalFailure;
  }
  return pipeline::kOk;
}
