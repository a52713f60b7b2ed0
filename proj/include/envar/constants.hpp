#pragma once

namespace envar {

/// Numerical tolerances shared across modules. Every operation that needs one
/// takes a `Tolerances` argument defaulting to these values.
struct Tolerances {
  double inv = 1e-10;        // min singular value / max singular value of B
  double sym = 1e-10;        // max abs asymmetry accepted for covariances
  double lyapunov = 1e-8;    // relative Lyapunov residual
  double orthogonal = 1e-8;  // ||Q^T Q - I||_F
  double gram = 1e-8;        // relative Gram mismatch for Q = D C^{-1} / sqrt(lambda)
  double zz_rank = 1e-12;    // OLS regressor Gram conditioning
  double pd = 1e-12;         // min eigenvalue of the residual covariance / mean data variance
  int lyapunov_direct_max_p = 60;
  int lyapunov_max_iter = 10000;
};

}  // namespace envar
