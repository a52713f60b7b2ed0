#include "envar/eqvar_gds.hpp"

#include <cmath>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

namespace envar {

namespace {

constexpr double kMinVariance = 1e-12;

struct Regression {
  Vector coef;
  double rss = 0.0;
  Matrix gram_inv;
};

/// Least squares of y (1 x n) on rows of x (k x n), no intercept.
Regression regress(const Eigen::Ref<const Vector>& y, const Matrix& x) {
  Regression r;
  if (x.rows() == 0) {
    r.coef.resize(0);
    r.rss = y.squaredNorm();
    return r;
  }
  const Matrix gram = x * x.transpose();
  Eigen::LDLT<Matrix> ldlt(gram);
  r.coef = ldlt.solve(x * y);
  r.rss = (y - x.transpose() * r.coef).squaredNorm();
  r.gram_inv = ldlt.solve(Matrix::Identity(gram.rows(), gram.cols()));
  return r;
}

Matrix rows_of(const Matrix& u, const std::vector<int>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), u.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = u.row(idx[k]);
  return out;
}

}  // namespace

double t_test_p_value(double t_stat, double dof) {
  if (!(dof > 0.0)) return 1.0;
  if (!std::isfinite(t_stat)) return 0.0;
  boost::math::students_t dist(dof);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t_stat)));
}

StructuralModel GdsResult::model() const { return StructuralModel(a0_hat, a1_hat, sigma_hat); }

GdsResult fit_eqvar_gds(const OlsFit& fit, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidConfig, "fit_eqvar_gds: alpha must lie in (0, 1)");
  const Matrix& u = fit.residuals;
  const int p = static_cast<int>(u.rows());
  const int n = static_cast<int>(u.cols());
  if (p != fit.p()) throw Error(ErrorKind::Dimension, "fit_eqvar_gds: residuals do not match phi_hat");
  if (n < p + 2) throw Error(ErrorKind::Rank, "fit_eqvar_gds: too few residuals for the regressions");

  GdsResult res;
  res.alpha = alpha;
  res.a0_hat = Matrix::Zero(p, p);
  std::vector<bool> used(static_cast<std::size_t>(p), false);

  for (int step = 0; step < p; ++step) {
    const Matrix x = rows_of(u, res.ordering);
    int best = -1;
    double best_var = 0.0;
    for (int j = 0; j < p; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double var = regress(u.row(j).transpose(), x).rss / n;
      if (best < 0 || var < best_var) {
        best = j;
        best_var = var;
      }
    }
    if (!(best_var > kMinVariance)) {
      std::ostringstream os;
      os << "fit_eqvar_gds: conditional variance of node " << best << " is " << best_var
         << "; residual covariance is degenerate";
      throw Error(ErrorKind::Rank, os.str());
    }
    used[static_cast<std::size_t>(best)] = true;
    res.conditional_variances.push_back(best_var);

    if (!res.ordering.empty()) {
      const Regression r = regress(u.row(best).transpose(), x);
      const int k = static_cast<int>(res.ordering.size());
      const double dof = static_cast<double>(n - k - 1);
      const double s2 = r.rss / dof;
      for (int c = 0; c < k; ++c) {
        const double se = std::sqrt(s2 * r.gram_inv(c, c));
        const double pval = t_test_p_value(r.coef(c) / se, dof);
        if (pval < alpha) res.a0_hat(best, res.ordering[static_cast<std::size_t>(c)]) = r.coef(c);
      }
    }
    res.ordering.push_back(best);
  }

  const Matrix b_hat = Matrix::Identity(p, p) - res.a0_hat;
  res.a1_hat = b_hat * fit.phi_hat;
  double sd = 0.0;
  for (double v : res.conditional_variances) sd += std::sqrt(v);
  res.sigma_hat = sd / p;
  return res;
}

GdsResult fit_eqvar_gds(const TimeSeries& ts, const OlsFit& fit, double alpha) {
  if (!ts.centered) throw Error(ErrorKind::InvalidConfig, "fit_eqvar_gds: series must be centered");
  if (ts.p() != fit.p() || ts.t_len() - 1 != fit.n_eff)
    throw Error(ErrorKind::Dimension, "fit_eqvar_gds: series does not match the OLS fit");
  return fit_eqvar_gds(fit, alpha);
}

}  // namespace envar
