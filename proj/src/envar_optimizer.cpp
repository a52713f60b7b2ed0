#include "envar/envar_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "envar/log.hpp"
#include "envar/orthogonal.hpp"

namespace envar {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kNormFloor = 1e-12;
constexpr std::uint64_t kNormStream = 0x6e6f726dULL;

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

std::mt19937_64 sub_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

double offdiag_l1(const Matrix& m) { return m.cwiseAbs().sum() - m.diagonal().cwiseAbs().sum(); }

struct Evaluation {
  double value = 0.0;
  Vector grad;  // [skew params..., log c]
  Matrix q;
  double c = 1.0;
};

Evaluation evaluate(const Vector& theta, const Vector& signs, const Matrix& b, const Matrix& gamma,
                    const EnvarConfig& cfg, const NormConstants& norms, double recons_scale) {
  const int p = static_cast<int>(b.rows());
  const int m = skew_dim(p);
  const Matrix k = skew_from_params(theta.head(m), p);
  Evaluation ev;
  ev.q = expm(k) * signs.asDiagonal();
  ev.c = std::exp(theta(m));
  const double c = ev.c;

  const Matrix qb = ev.q * b;
  const Matrix qg = ev.q * gamma;
  const Matrix m0 = c * qb;
  const Matrix m1 = c * qg;

  // d/dM0 and d/dM1 of the normalized objective
  Matrix g0(p, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < p; ++i)
      g0(i, j) = i == j ? cfg.mu * (m0(i, i) - 1.0) / norms.hollow
                        : cfg.lambda0 * sign(m0(i, j)) / norms.a0;
  const Matrix g1 = (cfg.lambda1 / norms.a1) * m1.unaryExpr([](double x) { return sign(x); });

  ev.value = cfg.lambda0 * offdiag_l1(m0) / norms.a0 + cfg.lambda1 * m1.cwiseAbs().sum() / norms.a1 +
             0.5 * cfg.mu * (m0.diagonal().array() - 1.0).square().sum() / norms.hollow +
             cfg.w_recons * c * c * recons_scale;

  const Matrix g_q = c * (g0 * b.transpose() + g1 * gamma.transpose());
  const double d_c = g0.cwiseProduct(qb).sum() + g1.cwiseProduct(qg).sum() +
                     2.0 * cfg.w_recons * c * recons_scale;

  ev.grad.resize(m + 1);
  // Q = exp(K) D, so df/d exp(K) = G_Q D^T = G_Q D.
  ev.grad.head(m) = expm_skew_gradient(k, g_q * signs.asDiagonal());
  ev.grad(m) = c * d_c;
  return ev;
}

RestartResult run_restart(int restart, const Matrix& b, const Matrix& gamma, const EnvarConfig& cfg,
                          const NormConstants& norms, double recons_scale) {
  const int p = static_cast<int>(b.rows());
  const int m = skew_dim(p);
  auto rng = sub_rng(cfg.seed, static_cast<std::uint64_t>(restart) + 1);

  Vector theta = Vector::Zero(m + 1);
  Vector signs = Vector::Ones(p);
  if (restart > 0) {
    std::normal_distribution<double> init(0.0, 0.1);
    for (int i = 0; i < m; ++i) theta(i) = init(rng);
    std::bernoulli_distribution flip(0.5);
    for (int i = 0; i < p; ++i) signs(i) = flip(rng) ? -1.0 : 1.0;
  }
  const double log_c_min = std::log(cfg.c_min);
  const double log_c_max = std::log(cfg.c_max);
  {
    // start c at the least-squares fit of diag(c Q b) to 1
    const Vector d = (expm(skew_from_params(theta.head(m), p)) * signs.asDiagonal() * b).diagonal();
    const double c0 = d.sum() > 0.0 ? d.sum() / d.squaredNorm() : 1.0;
    theta(m) = std::clamp(std::log(c0), log_c_min, log_c_max);
  }

  const double lr = cfg.learn_rate(p);
  Vector mom = Vector::Zero(m + 1);
  Vector vel = Vector::Zero(m + 1);

  RestartResult out;
  out.objective = std::numeric_limits<double>::infinity();
  out.trace.reserve(static_cast<std::size_t>(cfg.max_steps));
  double reference = out.objective;
  int last_improvement = 0;

  for (int step = 1; step <= cfg.max_steps; ++step) {
    Evaluation ev = evaluate(theta, signs, b, gamma, cfg, norms, recons_scale);
    if (!std::isfinite(ev.value) || !ev.grad.allFinite()) {
      std::ostringstream os;
      os << "solve_envar: optimizer diverged at restart " << restart << ", step " << step
         << " (last objectives:";
      const std::size_t n = out.trace.size();
      for (std::size_t i = n > 5 ? n - 5 : 0; i < n; ++i) os << ' ' << out.trace[i];
      os << ")";
      throw Error(ErrorKind::Diverged, os.str());
    }
    out.trace.push_back(ev.value);
    out.max_orthogonality_defect = std::max(out.max_orthogonality_defect, orthogonality_defect(ev.q));
    if (ev.value < out.objective) {
      out.objective = ev.value;
      out.q = ev.q;
      out.c = ev.c;
    }
    out.steps = step;
    if (out.objective < reference - cfg.convergence_tol) {
      reference = out.objective;
      last_improvement = step;
    } else if (step - last_improvement >= cfg.patience) {
      break;
    }

    Vector g = ev.grad;
    const double gnorm = g.norm();
    if (gnorm > cfg.grad_clip) g *= cfg.grad_clip / gnorm;
    mom = kBeta1 * mom + (1.0 - kBeta1) * g;
    vel = kBeta2 * vel + (1.0 - kBeta2) * g.cwiseAbs2();
    const double bc1 = 1.0 - std::pow(kBeta1, step);
    const double bc2 = 1.0 - std::pow(kBeta2, step);
    theta.array() -= lr * (mom.array() / bc1) / ((vel.array() / bc2).sqrt() + kAdamEps);
    theta(m) = std::clamp(theta(m), log_c_min, log_c_max);
  }
  return out;
}

}  // namespace

void EnvarConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidConfig, "EnvarConfig: " + msg); };
  if (!(lambda0 >= 0.0)) fail("lambda0 must be nonnegative");
  if (!(lambda1 >= 0.0)) fail("lambda1 must be nonnegative");
  if (!(mu > 0.0)) fail("mu must be positive");
  if (!(c_min > 0.0) || !(c_max > c_min) || !std::isfinite(c_max)) fail("need 0 < c_min < c_max < inf");
  if (!(learn_rate_base > 0.0)) fail("learn_rate_base must be positive");
  if (max_steps < 1) fail("max_steps must be positive");
  if (!(grad_clip > 0.0)) fail("grad_clip must be positive");
  if (restarts < 1) fail("restarts must be positive");
  if (!(convergence_tol > 0.0)) fail("convergence_tol must be positive");
  if (patience < 1) fail("patience must be positive");
  if (!(w_recons >= 0.0)) fail("w_recons must be nonnegative");
}

EnvarConfig default_config(int p) {
  if (p < 1) throw Error(ErrorKind::InvalidConfig, "default_config: p must be positive");
  EnvarConfig cfg;
  cfg.mu = p <= 25 ? 7.5 : (p <= 75 ? 5.0 : 2.5);
  cfg.max_steps = p > 10 ? 10000 : 5000;
  return cfg;
}

NormConstants baseline_norms(const Matrix& b, const Matrix& gamma, std::uint64_t seed) {
  auto rng = sub_rng(seed, kNormStream);
  const Matrix q0 = random_orthogonal(static_cast<int>(b.rows()), rng);
  const Matrix qb = q0 * b;
  NormConstants n;
  n.a0 = offdiag_l1(qb);
  n.a1 = (q0 * gamma).cwiseAbs().sum();
  n.hollow = (qb.diagonal().array() - 1.0).square().sum();
  auto floor = [](double& v, bool& flag, const char* name) {
    if (v < kNormFloor) {
      log::warn("baseline norm for {} is {:g}; using 1.0", name, v);
      v = 1.0;
      flag = true;
    }
  };
  floor(n.a0, n.a0_fallback, "A0");
  floor(n.a1, n.a1_fallback, "A1");
  floor(n.hollow, n.hollow_fallback, "hollowness");
  return n;
}

ObjectiveTerms envar_objective(const Matrix& q, double c, const Matrix& b, const Matrix& gamma,
                               const EnvarConfig& cfg, const NormConstants& norms,
                               double recons_scale) {
  if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorKind::InvalidConfig, "envar_objective: c must be positive");
  const int p = static_cast<int>(b.rows());
  const Matrix m0 = c * q * b;
  const Matrix m1 = c * q * gamma;
  ObjectiveTerms t;
  t.norms = norms;
  t.raw_a0 = cfg.lambda0 * offdiag_l1(Matrix::Identity(p, p) - m0);
  t.raw_a1 = cfg.lambda1 * m1.cwiseAbs().sum();
  t.raw_hollow = 0.5 * cfg.mu * (m0.diagonal().array() - 1.0).square().sum();
  t.raw_recons = cfg.w_recons * c * c * recons_scale;
  t.a0 = t.raw_a0 / norms.a0;
  t.a1 = t.raw_a1 / norms.a1;
  t.hollow = t.raw_hollow / norms.hollow;
  t.total = t.a0 + t.a1 + t.hollow + t.raw_recons;
  return t;
}

ObjectiveTerms envar_objective(const Matrix& q, double c, const CanonicalRepresentative& cr,
                               const EnvarConfig& cfg) {
  return envar_objective(q, c, cr.b_can, cr.gamma_can, cfg,
                         baseline_norms(cr.b_can, cr.gamma_can, cfg.seed));
}

std::vector<RestartResult> optimize_orbit(const Matrix& b, const Matrix& gamma,
                                          const EnvarConfig& cfg, const NormConstants& norms,
                                          double recons_scale) {
  cfg.validate();
  if (b.rows() != b.cols() || gamma.rows() != b.rows() || gamma.cols() != b.cols())
    throw Error(ErrorKind::Dimension, "optimize_orbit: b and gamma must be p x p");
  std::vector<RestartResult> results;
  results.reserve(static_cast<std::size_t>(cfg.restarts));
  for (int r = 0; r < cfg.restarts; ++r)
    results.push_back(run_restart(r, b, gamma, cfg, norms, recons_scale));
  return results;
}

double reconstruction_scale(const Matrix& b, const Matrix& gamma, const TimeSeries& data) {
  const int n = data.t_len() - 1;
  if (n < 1 || data.p() != b.rows()) throw Error(ErrorKind::Dimension, "reconstruction_scale: bad series");
  const Matrix r = b * data.data.rightCols(n) - gamma * data.data.leftCols(n);
  return r.squaredNorm() / n;
}

EnvarSolution solve_envar(const CanonicalRepresentative& cr, const EnvarConfig& cfg,
                          const TimeSeries* data) {
  cfg.validate();
  double recons_scale = 0.0;
  if (cfg.w_recons > 0.0) {
    if (data == nullptr)
      throw Error(ErrorKind::InvalidConfig, "solve_envar: w_recons > 0 requires the time series");
    recons_scale = reconstruction_scale(cr.b_can, cr.gamma_can, *data);
  }
  const NormConstants norms = baseline_norms(cr.b_can, cr.gamma_can, cfg.seed);
  auto runs = optimize_orbit(cr.b_can, cr.gamma_can, cfg, norms, recons_scale);

  EnvarSolution sol;
  std::size_t best = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    sol.restart_objectives.push_back(runs[r].objective);
    sol.max_orthogonality_defect = std::max(sol.max_orthogonality_defect, runs[r].max_orthogonality_defect);
    if (runs[r].objective < runs[best].objective) best = r;
  }
  RestartResult& winner = runs[best];
  sol.restart_index = static_cast<int>(best);
  sol.q_hat = winner.q;
  sol.c_hat = winner.c;
  sol.objective = winner.objective;
  sol.objective_trace = std::move(winner.trace);
  const Matrix b_hat = sol.c_hat * sol.q_hat * cr.b_can;
  sol.model = from_b(b_hat, sol.c_hat * sol.q_hat * cr.gamma_can, sol.c_hat);
  sol.diag_residual = (b_hat.diagonal().array() - 1.0).matrix().norm();
  sol.terms = envar_objective(sol.q_hat, sol.c_hat, cr.b_can, cr.gamma_can, cfg, norms, recons_scale);
  log::debug("solve_envar: restart {} objective {:.6g} diag residual {:.3g}", sol.restart_index,
             sol.objective, sol.diag_residual);
  return sol;
}

}  // namespace envar
