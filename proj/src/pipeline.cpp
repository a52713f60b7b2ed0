#include "envar/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "envar/eqvar_gds.hpp"
#include "envar/log.hpp"

namespace envar::pipeline {

using io::json;

ExitCode exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfig:
      return kUsage;
    case ErrorKind::Parse:
    case ErrorKind::Io:
    case ErrorKind::Dimension:
      return kDataError;
    case ErrorKind::Admissibility:
    case ErrorKind::Stability:
    case ErrorKind::Factorization:
    case ErrorKind::Rank:
    case ErrorKind::NotPositiveDefinite:
    case ErrorKind::Diverged:
    case ErrorKind::Generation:
      return kNumericalFailure;
  }
  return kNumericalFailure;
}

TimeSeries preprocess(const TimeSeries& raw, const Preprocess& opts) {
  TimeSeries ts = raw;
  if (opts.detrend) ts = detrend(ts);
  if (opts.center) ts = center(ts);
  if (opts.zscore) ts = zscore(ts);
  return ts;
}

namespace {

std::string sstd_dir(int p, double s) { return fmt::format("p{}_sstd{}", p, io::format_double(s)); }

json vector_json(const std::vector<double>& v) { return json(v); }

}  // namespace

FitOutcome fit_series(const TimeSeries& series, const FitOptions& opts) {
  const OlsFit fit = fit_ols(series, opts.ridge_tau);
  json report;
  report["format_version"] = io::kFormatVersion;
  report["method"] = opts.method;
  report["p"] = series.p();
  report["t_len"] = series.t_len();
  report["preprocessing"] = json{{"center", opts.prep.center}, {"detrend", opts.prep.detrend},
                                 {"zscore", opts.prep.zscore}};
  report["phi"] = io::matrix_to_json(fit.phi_hat);
  report["sigma_u"] = io::matrix_to_json(fit.sigma_u_hat);
  report["ridge_tau"] = fit.ridge_tau;
  report["auto_ridge"] = fit.auto_ridge;

  if (opts.method == "ols-only") {
    const CanonicalRepresentative cr = canonical_representative(fit);
    return {cr.model(), report};
  }
  if (opts.method == "eqvar-gds") {
    const GdsResult gds = fit_eqvar_gds(series, fit, opts.alpha);
    report["eqvar_gds"] = json{{"ordering", gds.ordering},
                               {"alpha", gds.alpha},
                               {"conditional_variances", gds.conditional_variances}};
    return {gds.model(), report};
  }
  if (opts.method == "envar") {
    const CanonicalRepresentative cr = canonical_representative(fit);
    EnvarConfig cfg = io::envar_config_from_json(opts.envar_overrides, default_config(series.p()));
    if (opts.seed) cfg.seed = *opts.seed;
    const EnvarSolution sol = solve_envar(cr, cfg, &series);
    report["envar"] = json{{"config", io::envar_config_to_json(cfg)},
                           {"objective", sol.objective},
                           {"c_hat", sol.c_hat},
                           {"q_hat", io::matrix_to_json(sol.q_hat)},
                           {"diag_residual", sol.diag_residual},
                           {"restart_index", sol.restart_index},
                           {"restart_objectives", vector_json(sol.restart_objectives)},
                           {"terms", json{{"a0", sol.terms.a0},
                                          {"a1", sol.terms.a1},
                                          {"hollow", sol.terms.hollow},
                                          {"recons", sol.terms.raw_recons},
                                          {"norm_a0", sol.terms.norms.a0},
                                          {"norm_a1", sol.terms.norms.a1},
                                          {"norm_hollow", sol.terms.norms.hollow}}},
                           {"objective_trace", vector_json(sol.objective_trace)}};
    return {sol.model, report};
  }
  throw Error(ErrorKind::InvalidConfig, "unknown method '" + opts.method + "'");
}

std::vector<fs::path> cmd_simulate(const io::ExperimentManifest& manifest, const fs::path& out_dir) {
  std::vector<fs::path> dirs;
  for (int p : manifest.ps())
    for (double s : manifest.sigma_stds()) {
      GeneratorConfig cfg = manifest.generator;
      cfg.p = p;
      cfg.sigma_std = s;
      for (int e = 0; e < cfg.episodes; ++e) {
        const GroundTruthInstance inst = generate_instance(cfg, e);
        const fs::path dir = out_dir / sstd_dir(p, s) / fmt::format("ep{}", e);
        fs::create_directories(dir);
        io::write_series_csv(dir / "series.csv", inst.series);
        io::write_json_file(dir / "truth_model.json", io::truth_to_json(inst, cfg.seed));
        const ReducedForm rf = inst.reduced_form();
        json meta{{"format_version", io::kFormatVersion},
                  {"generator", io::generator_to_json(cfg)},
                  {"episode", e},
                  {"spectral_radius_a0", spectral_radius(inst.model.a0)},
                  {"spectral_radius_phi", spectral_radius(rf.phi)},
                  {"sigma_truncations", inst.truncations},
                  {"phi", io::matrix_to_json(rf.phi)},
                  {"sigma_u", io::matrix_to_json(rf.sigma_u)}};
        io::write_json_file(dir / "instance_meta.json", meta);
        dirs.push_back(dir);
      }
    }
  return dirs;
}

FitOutcome cmd_fit(const fs::path& series_path, const FitOptions& opts, const fs::path& out_dir) {
  const TimeSeries raw = io::read_series_csv(series_path);
  FitOutcome out = fit_series(preprocess(raw, opts.prep), opts);
  out.report["series"] = series_path.string();
  fs::create_directories(out_dir);
  io::write_json_file(out_dir / "model.json", io::model_to_json(out.model, opts.method));
  io::write_json_file(out_dir / "fit_report.json", out.report);
  return out;
}

json cmd_evaluate(const fs::path& model_path, const fs::path& truth_path, const EvaluateOptions& opts,
                  const fs::path& out_path) {
  const json model_json = io::read_json_file(model_path);
  const StructuralModel estimate = io::model_from_json(model_json);
  const GroundTruthInstance truth = io::truth_from_json(io::read_json_file(truth_path));
  if (estimate.p() != truth.model.p())
    throw Error(ErrorKind::Dimension, fmt::format("evaluate: model has p = {} but truth has p = {}",
                                                  estimate.p(), truth.model.p()));
  const std::string method = model_json.value("method", std::string());
  json j = io::score_to_json(score(estimate, truth, opts.eta, method));
  j["eta"] = opts.eta;
  j["binarize_mass"] = opts.binarize_mass;
  j["centralities"] = io::centralities_to_json(centralities(binarize_cumulative(estimate, opts.binarize_mass)));
  if (!out_path.empty()) io::write_json_file(out_path, j);
  return j;
}

std::vector<std::string> benchmark_methods(const io::ExperimentManifest& manifest) {
  std::vector<std::string> methods{"envar"};
  for (const auto& b : manifest.baselines)
    if (std::find(methods.begin(), methods.end(), b.name) == methods.end()) methods.push_back(b.name);
  return methods;
}

namespace {

FitOptions method_options(const io::ExperimentManifest& manifest, const std::string& method) {
  FitOptions opts;
  opts.method = method;
  opts.alpha = manifest.metrics.alpha;
  opts.envar_overrides = manifest.envar_overrides;
  for (const auto& b : manifest.baselines) {
    if (b.name != method) continue;
    if (b.params.contains("alpha")) opts.alpha = b.params["alpha"].get<double>();
    if (b.params.contains("ridge_tau")) opts.ridge_tau = b.params["ridge_tau"].get<double>();
  }
  return opts;
}

std::string csv_value(const std::optional<double>& v) { return v ? io::format_double(*v) : "NA"; }

std::string sanitize(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ';';
  return s;
}

}  // namespace

std::vector<BenchmarkRow> cmd_benchmark(const io::ExperimentManifest& manifest, const fs::path& out_dir,
                                        const BenchmarkOptions& opts) {
  struct Task {
    int p;
    double s;
    int episode;
  };
  std::vector<Task> tasks;
  for (int p : manifest.ps())
    for (double s : manifest.sigma_stds())
      for (int e = 0; e < manifest.generator.episodes; ++e) tasks.push_back({p, s, e});
  const auto methods = benchmark_methods(manifest);
  std::vector<BenchmarkRow> rows(tasks.size() * methods.size());

  auto run_task = [&](std::size_t ti) {
    const Task& task = tasks[ti];
    GeneratorConfig cfg = manifest.generator;
    cfg.p = task.p;
    cfg.sigma_std = task.s;
    std::optional<GroundTruthInstance> inst;
    std::string gen_error;
    try {
      inst = generate_instance(cfg, task.episode);
    } catch (const std::exception& e) {
      gen_error = e.what();
    }
    const fs::path run_dir = out_dir / "runs" / sstd_dir(task.p, task.s) / fmt::format("ep{}", task.episode);
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      BenchmarkRow& row = rows[ti * methods.size() + mi];
      row.p = task.p;
      row.sigma_std = task.s;
      row.method = methods[mi];
      row.episode = task.episode;
      if (!inst) {
        row.status = "error: " + sanitize(gen_error);
        continue;
      }
      const auto start = std::chrono::steady_clock::now();
      try {
        const FitOptions fo = method_options(manifest, methods[mi]);
        const FitOutcome fit = fit_series(preprocess(inst->series, fo.prep), fo);
        row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        row.score = score(fit.model, *inst, manifest.metrics.eta, methods[mi]);
        const fs::path dir = run_dir / methods[mi];
        io::write_json_file(dir / "model.json", io::model_to_json(fit.model, methods[mi]));
        json sj = io::score_to_json(*row.score);
        sj["centralities"] = io::centralities_to_json(
            centralities(binarize_cumulative(fit.model, manifest.metrics.binarize_mass)));
        io::write_json_file(dir / "score.json", sj);
      } catch (const std::exception& e) {
        row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        row.score.reset();
        row.status = "error: " + sanitize(e.what());
        log::warn("benchmark: p={} sigma_std={} episode={} method={} failed: {}", task.p, task.s,
                  task.episode, methods[mi], e.what());
      }
    }
  };

  const int jobs = std::max(1, opts.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) run_task(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) run_task(i);
      });
    for (auto& t : pool) t.join();
  }

  std::map<std::string, std::size_t> method_rank;
  for (std::size_t i = 0; i < methods.size(); ++i) method_rank[methods[i]] = i;
  std::stable_sort(rows.begin(), rows.end(), [&](const BenchmarkRow& a, const BenchmarkRow& b) {
    return std::tie(a.p, a.sigma_std, method_rank[a.method], a.episode) <
           std::tie(b.p, b.sigma_std, method_rank[b.method], b.episode);
  });

  io::write_text_file(out_dir / "summary.csv", summary_csv(rows, opts.timing));
  io::write_text_file(out_dir / "summary_agg.csv", aggregate_csv(rows));
  return rows;
}

std::string summary_csv(const std::vector<BenchmarkRow>& rows, bool timing) {
  std::ostringstream os;
  os << "p,sigma_std,method,episode,sf_oad,obs_oad,pearson_phi,pearson_sigma_u,pearson_a0,pearson_a1,wall_ms,status\n";
  for (const auto& r : rows) {
    os << r.p << ',' << io::format_double(r.sigma_std) << ',' << r.method << ',' << r.episode << ',';
    if (r.score) {
      os << io::format_double(r.score->sf_oad) << ',' << io::format_double(r.score->obs_oad) << ','
         << csv_value(r.score->phi.r) << ',' << csv_value(r.score->sigma_u.r) << ','
         << csv_value(r.score->a0.r) << ',' << csv_value(r.score->a1.r) << ',';
    } else {
      os << "NA,NA,NA,NA,NA,NA,";
    }
    os << (timing ? io::format_double(r.wall_ms) : std::string("NA")) << ',' << r.status << '\n';
  }
  return os.str();
}

std::string aggregate_csv(const std::vector<BenchmarkRow>& rows) {
  using Getter = std::optional<double> (*)(const ScoreReport&);
  const std::vector<std::pair<const char*, Getter>> metrics{
      {"sf_oad", [](const ScoreReport& s) -> std::optional<double> { return s.sf_oad; }},
      {"obs_oad", [](const ScoreReport& s) -> std::optional<double> { return s.obs_oad; }},
      {"pearson_phi", [](const ScoreReport& s) { return s.phi.r; }},
      {"pearson_sigma_u", [](const ScoreReport& s) { return s.sigma_u.r; }},
      {"pearson_a0", [](const ScoreReport& s) { return s.a0.r; }},
      {"pearson_a1", [](const ScoreReport& s) { return s.a1.r; }},
  };
  std::ostringstream os;
  os << "p,sigma_std,method,n_runs,n_ok";
  for (const auto& [name, _] : metrics) os << ',' << name << "_mean," << name << "_sem," << name << "_n";
  os << '\n';

  // rows arrive sorted by (p, sigma_std, method, episode), so groups are contiguous
  for (std::size_t i = 0; i < rows.size();) {
    std::size_t j = i;
    while (j < rows.size() && rows[j].p == rows[i].p && rows[j].sigma_std == rows[i].sigma_std &&
           rows[j].method == rows[i].method)
      ++j;
    std::size_t ok = 0;
    for (std::size_t k = i; k < j; ++k) ok += rows[k].score ? 1 : 0;
    os << rows[i].p << ',' << io::format_double(rows[i].sigma_std) << ',' << rows[i].method << ','
       << (j - i) << ',' << ok;
    for (const auto& [name, get] : metrics) {
      std::vector<double> v;
      for (std::size_t k = i; k < j; ++k)
        if (rows[k].score)
          if (auto x = get(*rows[k].score)) v.push_back(*x);
      const std::size_t n = v.size();
      if (n == 0) {
        os << ",NA,NA,0";
        continue;
      }
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(n);
      os << ',' << io::format_double(mean) << ',';
      if (n >= 2) {
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        os << io::format_double(std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n)));
      } else {
        os << "NA";
      }
      os << ',' << n;
    }
    os << '\n';
    i = j;
  }
  return os.str();
}

}  // namespace envar::pipeline
