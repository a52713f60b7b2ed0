#pragma once

#include "envar/equivalence.hpp"
#include "envar/model.hpp"

namespace envar {

struct OlsFit {
  Matrix phi_hat;
  Matrix sigma_u_hat;
  int n_eff = 0;  // T - 1
  Matrix residuals;  // p x n
  double ridge_tau = 0.0;  // ridge actually applied (may exceed the request after fallback)
  bool auto_ridge = false;

  int p() const { return static_cast<int>(phi_hat.rows()); }
  ReducedForm reduced_form() const { return ReducedForm(phi_hat, sigma_u_hat); }
};

/// Base point of the empirical orbit: b_can upper triangular with
/// b_can^T b_can = omega_u_hat, gamma_can = b_can phi_hat.
struct CanonicalRepresentative {
  Matrix b_can;
  Matrix gamma_can;
  Matrix omega_u_hat;

  int p() const { return static_cast<int>(b_can.rows()); }
  /// (I - b_can, gamma_can, 1)
  StructuralModel model() const;
};

/// Subtract each row's mean. Throws Dimension when T < 2.
TimeSeries center(const TimeSeries& ts);

/// Remove a per-row least-squares line in t.
TimeSeries detrend(const TimeSeries& ts);

/// Scale each row to unit (population) standard deviation; constant rows are left at zero.
TimeSeries zscore(const TimeSeries& ts);

/// OLS of X_t on X_{t-1}: phi_hat = Y Z^T (Z Z^T)^{-1}. The ridge only enters
/// sigma_u_hat. If its smallest eigenvalue is below tol.pd times the mean data
/// variance, one retry is made with the ridge raised to 1e-8 trace(S)/p before
/// failing with NotPositiveDefinite.
OlsFit fit_ols(const TimeSeries& ts, double ridge_tau = 0.0, const Tolerances& tol = {});

CanonicalRepresentative canonical_representative(const OlsFit& fit);
CanonicalRepresentative canonical_representative(const Matrix& phi_hat, const Matrix& sigma_u_hat);

/// (I - c Q b_can, c Q gamma_can, c)
StructuralModel empirical_orbit_member(const CanonicalRepresentative& cr, const OrbitElement& e);

}  // namespace envar
