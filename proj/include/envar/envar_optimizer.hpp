#pragma once

#include <cstdint>
#include <vector>

#include "envar/model.hpp"
#include "envar/reduced_estimation.hpp"

namespace envar {

/// Weights and optimizer settings for sparse representative selection.
struct EnvarConfig {
  double lambda0 = 1.0;  // off-diagonal A0 l1 weight
  double lambda1 = 1.0;  // A1 l1 weight
  double mu = 7.5;       // diagonal (hollowness) penalty weight
  double c_min = 1e-3;
  double c_max = 1e3;
  double learn_rate_base = 5e-3;
  int max_steps = 5000;
  double grad_clip = 1.0;
  std::uint64_t seed = 0;
  int restarts = 4;
  double convergence_tol = 1e-9;
  int patience = 500;
  double w_recons = 0.0;

  /// Throws InvalidConfig on violated positivity/ordering constraints.
  void validate() const;
  /// learn_rate_base * (5 / p)
  double learn_rate(int p) const { return learn_rate_base * (5.0 / p); }
};

/// Hyperparameters scaled by dimension: mu steps down at p = 25 and p = 75,
/// larger graphs get 10000 steps.
EnvarConfig default_config(int p);

/// Per-run normalization of the three penalty terms, taken from their
/// unweighted values at a fixed random orthogonal Q0 and c = 1. A constant
/// below 1e-12 is replaced by 1 and flagged.
struct NormConstants {
  double a0 = 1.0;
  double a1 = 1.0;
  double hollow = 1.0;
  bool a0_fallback = false;
  bool a1_fallback = false;
  bool hollow_fallback = false;
};

NormConstants baseline_norms(const Matrix& b, const Matrix& gamma, std::uint64_t seed);

struct ObjectiveTerms {
  // weighted, before normalization
  double raw_a0 = 0.0;      // lambda0 ||offdiag(I - c Q b)||_1
  double raw_a1 = 0.0;      // lambda1 ||c Q gamma||_1
  double raw_hollow = 0.0;  // mu/2 ||diag(c Q b) - 1||^2
  double raw_recons = 0.0;  // w_recons * mean_t ||B X_t - A1 X_{t-1}||^2
  // normalized
  double a0 = 0.0;
  double a1 = 0.0;
  double hollow = 0.0;
  double total = 0.0;
  NormConstants norms;
};

/// Objective with norm constants derived from cfg.seed.
ObjectiveTerms envar_objective(const Matrix& q, double c, const CanonicalRepresentative& cr,
                               const EnvarConfig& cfg);

/// Objective on an arbitrary orbit base (b, gamma). `recons_scale` is
/// mean_t ||b X_t - gamma X_{t-1}||^2 (zero when no data is attached).
ObjectiveTerms envar_objective(const Matrix& q, double c, const Matrix& b, const Matrix& gamma,
                               const EnvarConfig& cfg, const NormConstants& norms,
                               double recons_scale = 0.0);

struct RestartResult {
  Matrix q;  // best iterate
  double c = 1.0;
  double objective = 0.0;
  std::vector<double> trace;
  int steps = 0;
  double max_orthogonality_defect = 0.0;
};

/// Adam on (K, log c) with Q = exp(K) D, one run per restart. Restart 0 starts
/// at K = 0, D = I; later restarts draw K entrywise from N(0, 0.01) and a
/// random sign matrix D.
std::vector<RestartResult> optimize_orbit(const Matrix& b, const Matrix& gamma,
                                          const EnvarConfig& cfg, const NormConstants& norms,
                                          double recons_scale = 0.0);

struct EnvarSolution {
  StructuralModel model;
  Matrix q_hat;
  double c_hat = 1.0;
  double objective = 0.0;
  std::vector<double> objective_trace;  // of the returned restart
  double diag_residual = 0.0;           // ||diag(c Q b_can) - 1||_2
  int restart_index = 0;
  std::vector<double> restart_objectives;
  double max_orthogonality_defect = 0.0;  // over every evaluated iterate of every restart
  ObjectiveTerms terms;
};

/// Mean squared structural residual mean_t ||b X_t - gamma X_{t-1}||^2.
double reconstruction_scale(const Matrix& b, const Matrix& gamma, const TimeSeries& data);

/// Selects the sparse near-normalized member of the empirical orbit.
/// `data` is only needed when cfg.w_recons > 0.
EnvarSolution solve_envar(const CanonicalRepresentative& cr, const EnvarConfig& cfg,
                          const TimeSeries* data = nullptr);

}  // namespace envar
