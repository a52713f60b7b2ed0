#include "envar/reduced_estimation.hpp"

#include <sstream>

#include "envar/log.hpp"

namespace envar {

namespace {

// PD with the smallest eigenvalue above rel * scale
bool numerically_pd(const Matrix& m, double scale, double rel) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.info() == Eigen::Success && es.eigenvalues()(0) > rel * scale;
}

}  // namespace

StructuralModel CanonicalRepresentative::model() const {
  return from_b(b_can, gamma_can, 1.0);
}

TimeSeries center(const TimeSeries& ts) {
  if (ts.t_len() < 2) throw Error(ErrorKind::Dimension, "center: need at least 2 time points");
  TimeSeries out;
  out.data = ts.data.colwise() - ts.data.rowwise().mean();
  out.centered = true;
  return out;
}

TimeSeries detrend(const TimeSeries& ts) {
  const int t_len = ts.t_len();
  if (t_len < 3) throw Error(ErrorKind::Dimension, "detrend: need at least 3 time points");
  Vector t = Vector::LinSpaced(t_len, 0.0, t_len - 1.0);
  t.array() -= t.mean();
  const double tt = t.squaredNorm();
  TimeSeries out;
  out.data = ts.data.colwise() - ts.data.rowwise().mean();
  const Vector slope = out.data * t / tt;
  out.data -= slope * t.transpose();
  out.centered = true;
  return out;
}

TimeSeries zscore(const TimeSeries& ts) {
  if (ts.t_len() < 2) throw Error(ErrorKind::Dimension, "zscore: need at least 2 time points");
  TimeSeries out;
  out.data = ts.data.colwise() - ts.data.rowwise().mean();
  for (int i = 0; i < out.p(); ++i) {
    const double sd = std::sqrt(out.data.row(i).squaredNorm() / ts.t_len());
    if (sd > 0.0) out.data.row(i) /= sd;
  }
  out.centered = true;
  return out;
}

OlsFit fit_ols(const TimeSeries& ts, double ridge_tau, const Tolerances& tol) {
  const int p = ts.p();
  const int t_len = ts.t_len();
  if (p < 1) throw Error(ErrorKind::Dimension, "fit_ols: empty series");
  if (t_len < 3) throw Error(ErrorKind::Dimension, "fit_ols: need at least 3 time points");
  if (ridge_tau < 0.0) throw Error(ErrorKind::InvalidConfig, "fit_ols: ridge_tau must be nonnegative");
  if (!ts.centered) log::warn("fit_ols: series is not flagged as centered");
  if (t_len < 5 * p) log::warn("fit_ols: short series (T = {} < 5p = {})", t_len, 5 * p);

  const int n = t_len - 1;
  const auto y = ts.data.rightCols(n);
  const auto z = ts.data.leftCols(n);
  const Matrix zz = symmetrize(z * z.transpose());

  Eigen::JacobiSVD<Matrix> svd(zz);
  const auto& sv = svd.singularValues();
  if (!(sv(p - 1) > tol.zz_rank * sv(0))) {
    std::ostringstream os;
    os << "fit_ols: lagged Gram matrix Z Z^T is singular (T = " << t_len
       << "); a longer series is needed";
    throw Error(ErrorKind::Rank, os.str());
  }

  OlsFit fit;
  fit.n_eff = n;
  // (Z Z^T) Phi^T = Z Y^T
  fit.phi_hat = zz.ldlt().solve(z * y.transpose()).transpose();
  fit.residuals = y - fit.phi_hat * z;
  const Matrix s = symmetrize(fit.residuals * fit.residuals.transpose() / n);

  // residuals at roundoff level of the data count as zero
  const double data_scale = y.squaredNorm() / (static_cast<double>(n) * p);
  fit.ridge_tau = ridge_tau;
  fit.sigma_u_hat = s + ridge_tau * Matrix::Identity(p, p);
  if (!numerically_pd(fit.sigma_u_hat, data_scale, tol.pd)) {
    const double fallback = 1e-8 * s.trace() / p;
    if (fallback > ridge_tau) {
      log::warn("fit_ols: residual covariance not positive definite; applying ridge {}", fallback);
      fit.ridge_tau = fallback;
      fit.auto_ridge = true;
      fit.sigma_u_hat = s + fallback * Matrix::Identity(p, p);
    }
    if (!numerically_pd(fit.sigma_u_hat, data_scale, tol.pd))
      throw Error(ErrorKind::NotPositiveDefinite,
                  "fit_ols: residual covariance is not positive definite; increase ridge_tau");
  }
  return fit;
}

CanonicalRepresentative canonical_representative(const Matrix& phi_hat, const Matrix& sigma_u_hat) {
  const int p = static_cast<int>(sigma_u_hat.rows());
  Eigen::LLT<Matrix> llt(sigma_u_hat);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::NotPositiveDefinite, "canonical_representative: sigma_u_hat not positive definite");
  CanonicalRepresentative cr;
  cr.omega_u_hat = symmetrize(llt.solve(Matrix::Identity(p, p)));
  Eigen::LLT<Matrix> omega_llt(cr.omega_u_hat);
  if (omega_llt.info() != Eigen::Success)
    throw Error(ErrorKind::NotPositiveDefinite, "canonical_representative: precision not positive definite");
  // Omega = L L^T = R^T R with R = L^T upper triangular, positive diagonal.
  cr.b_can = omega_llt.matrixU();
  cr.gamma_can = cr.b_can * phi_hat;
  return cr;
}

CanonicalRepresentative canonical_representative(const OlsFit& fit) {
  return canonical_representative(fit.phi_hat, fit.sigma_u_hat);
}

StructuralModel empirical_orbit_member(const CanonicalRepresentative& cr, const OrbitElement& e) {
  return from_b(e.c * e.q * cr.b_can, e.c * e.q * cr.gamma_can, e.c);
}

}  // namespace envar
