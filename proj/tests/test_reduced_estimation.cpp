#include <doctest.h>

#include <algorithm>

#include "envar/reduced_estimation.hpp"
#include "oracles.hpp"

using namespace envar;
using envar::testing::gaussian_matrix;
using envar::testing::haar_orthogonal;
using envar::testing::random_model;

namespace {

Matrix random_spd(int p, std::mt19937_64& rng) {
  const Matrix g = gaussian_matrix(p, p, rng);
  return g * g.transpose() + 0.5 * Matrix::Identity(p, p);
}

// X_t = Phi X_{t-1} with a generic start, no noise
TimeSeries noiseless(const Matrix& phi, int t_len, std::mt19937_64& rng) {
  TimeSeries ts;
  ts.data.resize(phi.rows(), t_len);
  ts.data.col(0) = gaussian_matrix(phi.rows(), 1, rng);
  for (int t = 1; t < t_len; ++t) ts.data.col(t) = phi * ts.data.col(t - 1);
  ts.centered = true;
  return ts;
}

}  // namespace

TEST_SUITE("reduced_estimation") {

TEST_CASE("center examples") {
  TimeSeries constant{Matrix::Constant(2, 5, 3.5), false};
  CHECK(center(constant).data.cwiseAbs().maxCoeff() == 0.0);
  CHECK(center(constant).centered);

  TimeSeries row{Matrix(1, 3), false};
  row.data << 1, 2, 3;
  Matrix expected(1, 3);
  expected << -1, 0, 1;
  CHECK((center(row).data - expected).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(1);
  TimeSeries random{gaussian_matrix(3, 50, rng), false};
  const TimeSeries once = center(random);
  CHECK(once.data.rowwise().mean().cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((center(once).data - once.data).cwiseAbs().maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(center(TimeSeries{Matrix::Zero(2, 1), false}), Error);
}

TEST_CASE("detrend and zscore") {
  TimeSeries line{Matrix(2, 6), false};
  for (int t = 0; t < 6; ++t) {
    line.data(0, t) = 2.0 + 0.5 * t;
    line.data(1, t) = -1.0 * t;
  }
  CHECK(detrend(line).data.cwiseAbs().maxCoeff() <= 1e-12);

  std::mt19937_64 rng(2);
  TimeSeries g{3.0 * gaussian_matrix(2, 100, rng), false};
  const TimeSeries z = zscore(g);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(z.data.row(i).mean()) <= 1e-12);
    CHECK(z.data.row(i).squaredNorm() / 100.0 == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("fit_ols: noiseless recursion is recovered exactly") {
  std::mt19937_64 rng(3);
  for (int p : {1, 2, 4}) {
    const StructuralModel m = random_model(p, rng, 0.9);
    const Matrix phi = to_reduced_form(m).phi;
    const TimeSeries ts = noiseless(phi, p + 3, rng);
    const OlsFit fit = fit_ols(ts, 0.25);
    CHECK((fit.phi_hat - phi).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((fit.sigma_u_hat - 0.25 * Matrix::Identity(p, p)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(fit.ridge_tau == 0.25);
    CHECK(fit.n_eff == p + 2);
  }
}

TEST_CASE("fit_ols: geometric sequence") {
  TimeSeries ts{Matrix(1, 4), true};
  ts.data << 1.0, 0.5, 0.25, 0.125;
  const OlsFit fit = fit_ols(ts, 0.1);
  CHECK(fit.phi_hat(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("fit_ols: white noise at large T") {
  std::mt19937_64 rng(4);
  const TimeSeries ts = center(TimeSeries{gaussian_matrix(3, 50000, rng), false});
  const OlsFit fit = fit_ols(ts);
  CHECK(fit.phi_hat.cwiseAbs().maxCoeff() < 0.05);
  CHECK((fit.sigma_u_hat - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("fit_ols: normal equations and covariance definition") {
  std::mt19937_64 rng(5);
  const StructuralModel m = random_model(4, rng);
  const TimeSeries ts = center(simulate(m, 400, 11));
  const OlsFit fit = fit_ols(ts, 0.01);
  const int n = fit.n_eff;
  const Matrix y = ts.data.rightCols(n), z = ts.data.leftCols(n);
  CHECK(((y - fit.phi_hat * z) * z.transpose()).norm() <= 1e-8 * y.norm() * z.norm());
  CHECK((fit.residuals - (y - fit.phi_hat * z)).norm() <= 1e-10 * y.norm());
  const Matrix expected = fit.residuals * fit.residuals.transpose() / n + 0.01 * Matrix::Identity(4, 4);
  CHECK((fit.sigma_u_hat - expected).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(max_asymmetry(fit.sigma_u_hat) <= 1e-12);
}

TEST_CASE("fit_ols: error paths") {
  CHECK_THROWS_AS(fit_ols(TimeSeries{Matrix::Ones(2, 2), true}), Error);
  // a constant row makes Z Z^T singular
  TimeSeries flat{Matrix::Zero(2, 20), true};
  std::mt19937_64 rng(6);
  flat.data.row(0) = gaussian_matrix(1, 20, rng);
  try {
    fit_ols(flat);
    FAIL("expected a rank error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Rank);
  }
  CHECK_THROWS_AS(fit_ols(TimeSeries{gaussian_matrix(2, 20, rng), true}, -1.0), Error);
}

TEST_CASE("fit_ols: auto ridge when residuals are degenerate") {
  // noise only enters the first coordinate: rank-one residual covariance
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  Matrix phi(2, 2);
  phi << 0.5, 0.2, 0.0, 0.6;
  TimeSeries ts;
  ts.data.resize(2, 200);
  ts.data.col(0) = gaussian_matrix(2, 1, rng);
  for (int t = 1; t < 200; ++t) {
    ts.data.col(t) = phi * ts.data.col(t - 1);
    ts.data(0, t) += n01(rng);
  }
  ts.centered = true;
  const OlsFit fit = fit_ols(ts);
  CHECK(fit.auto_ridge);
  CHECK(fit.ridge_tau > 0.0);
  CHECK(fit.sigma_u_hat.llt().info() == Eigen::Success);

  // exactly zero residuals leave nothing to scale the ridge by
  try {
    fit_ols(noiseless(phi, 30, rng));
    FAIL("expected NotPositiveDefinite");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotPositiveDefinite);
  }
}

TEST_CASE("canonical_representative examples") {
  std::mt19937_64 rng(8);
  const Matrix p3 = gaussian_matrix(3, 3, rng);
  const auto id = canonical_representative(p3, Matrix::Identity(3, 3));
  CHECK((id.b_can - Matrix::Identity(3, 3)).norm() <= 1e-14);
  CHECK((id.gamma_can - p3).norm() <= 1e-14);

  const auto four = canonical_representative(p3, 4.0 * Matrix::Identity(3, 3));
  CHECK((four.b_can - 0.5 * Matrix::Identity(3, 3)).norm() <= 1e-14);

  for (int trial = 0; trial < 20; ++trial) {
    const Matrix s = random_spd(3, rng);
    const auto cr = canonical_representative(p3, s);
    const Matrix b_inv = cr.b_can.inverse();
    CHECK((b_inv * b_inv.transpose() - s).norm() <= 1e-9 * s.norm());
    CHECK((cr.b_can.transpose() * cr.b_can - cr.omega_u_hat).norm() <= 1e-8 * cr.omega_u_hat.norm());
    CHECK(cr.b_can.triangularView<Eigen::StrictlyLower>().toDenseMatrix().norm() == 0.0);
    CHECK((cr.b_can.diagonal().array() > 0.0).all());
    CHECK((cr.b_can.partialPivLu().solve(cr.gamma_can) - p3).norm() <= 1e-8 * (1.0 + p3.norm()));
  }

  Matrix not_pd = Matrix::Identity(2, 2);
  not_pd(1, 1) = -1.0;
  CHECK_THROWS_AS(canonical_representative(Matrix::Zero(2, 2), not_pd), Error);
}

TEST_CASE("empirical_orbit_member") {
  std::mt19937_64 rng(9);
  const StructuralModel m = random_model(3, rng);
  const OlsFit fit = fit_ols(center(simulate(m, 300, 3)));
  const auto cr = canonical_representative(fit);

  const StructuralModel base = empirical_orbit_member(cr, OrbitElement::identity(3));
  CHECK((base.b() - cr.b_can).norm() <= 1e-15);
  CHECK((base.a1 - cr.gamma_can).norm() == 0.0);
  CHECK(base.sigma == 1.0);

  std::uniform_real_distribution<double> cu(0.3, 3.0);
  const OrbitElement e1(haar_orthogonal(3, rng), cu(rng)), e2(haar_orthogonal(3, rng), cu(rng));
  const StructuralModel m1 = empirical_orbit_member(cr, e1), m2 = empirical_orbit_member(cr, e2);
  CHECK((m1.a0 - m2.a0).norm() > 1e-3);
  for (const auto* mm : {&m1, &m2}) {
    const ReducedForm rf = induced_reduced_form(*mm);
    CHECK((rf.phi - fit.phi_hat).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((rf.sigma_u - fit.sigma_u_hat).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("orbit completeness through the Gram factor") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const StructuralModel m = random_model(4, rng);
    const auto cr = canonical_representative(to_reduced_form(m).phi, to_reduced_form(m).sigma_u);
    // B^T B = sigma^2 Omega = sigma^2 b_can^T b_can, so B = sigma Q b_can
    const double lambda = m.sigma * m.sigma;
    const Matrix q = gram_orthogonal_factor(cr.b_can, m.b(), lambda);
    CHECK(orthogonality_defect(q) <= 1e-8);
    const StructuralModel back = empirical_orbit_member(cr, OrbitElement(q, m.sigma));
    CHECK((back.a0 - m.a0).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((back.a1 - m.a1).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("Phi estimation error shrinks with T") {
  std::mt19937_64 rng(11);
  const StructuralModel m = random_model(3, rng);
  const Matrix phi = to_reduced_form(m).phi;
  std::vector<double> med;
  for (int t_len : {1000, 10000, 100000}) {
    std::vector<double> err;
    for (int seed = 0; seed < 20; ++seed) {
      const OlsFit fit = fit_ols(center(simulate(m, t_len, 1000 + seed)));
      err.push_back((fit.phi_hat - phi).cwiseAbs().maxCoeff());
    }
    std::nth_element(err.begin(), err.begin() + 10, err.end());
    med.push_back(err[10]);
  }
  CHECK(med[0] > med[1]);
  CHECK(med[1] > med[2]);
}

}  // TEST_SUITE
