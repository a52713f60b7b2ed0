#pragma once

#include <vector>

#include "envar/reduced_estimation.hpp"

namespace envar {

/// Greedy equal-variance ordering baseline fitted on reduced-form residuals.
struct GdsResult {
  std::vector<int> ordering;  // 0-based node indices, first = most upstream
  Matrix a0_hat;
  Matrix a1_hat;
  double alpha = 0.05;
  std::vector<double> conditional_variances;  // at selection time, in ordering order
  double sigma_hat = 1.0;  // mean conditional standard deviation

  StructuralModel model() const;
};

/// Contemporaneous structure from fit.residuals; a1_hat = (I - a0_hat) phi_hat.
/// Throws Rank when a conditional variance is numerically zero.
GdsResult fit_eqvar_gds(const OlsFit& fit, double alpha = 0.05);

/// Same, after checking that `ts` is centered and matches the fit.
GdsResult fit_eqvar_gds(const TimeSeries& ts, const OlsFit& fit, double alpha = 0.05);

/// Two-sided p-value of a Student t statistic.
double t_test_p_value(double t_stat, double dof);

}  // namespace envar
