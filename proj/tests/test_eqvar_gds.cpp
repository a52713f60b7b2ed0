#include <doctest.h>

#include <algorithm>

#include "envar/eqvar_gds.hpp"
#include "oracles.hpp"

using namespace envar;
using envar::testing::gaussian_matrix;
using envar::testing::random_model;

namespace {

// OLS fit whose residuals are B^{-1} e with unit-variance e
OlsFit residual_fit(const Matrix& b, const Matrix& phi, int n, std::mt19937_64& rng) {
  OlsFit fit;
  fit.phi_hat = phi;
  fit.residuals = b.partialPivLu().solve(gaussian_matrix(b.rows(), n, rng));
  fit.sigma_u_hat = symmetrize(fit.residuals * fit.residuals.transpose() / n);
  fit.n_eff = n;
  return fit;
}

Matrix permutation(const std::vector<int>& order) {
  const int p = static_cast<int>(order.size());
  Matrix perm = Matrix::Zero(p, p);
  for (int k = 0; k < p; ++k) perm(k, order[static_cast<std::size_t>(k)]) = 1.0;
  return perm;
}

}  // namespace

TEST_SUITE("eqvar_gds") {

TEST_CASE("t_test_p_value") {
  CHECK(t_test_p_value(0.0, 10) == doctest::Approx(1.0));
  // t = 2.228 is the two-sided 5% critical value at 10 degrees of freedom
  CHECK(t_test_p_value(2.228138851986, 10) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(t_test_p_value(-2.228138851986, 10) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(t_test_p_value(1.959963984540, 1e9) == doctest::Approx(0.05).epsilon(1e-6));
}

TEST_CASE("two-node chain is ordered and estimated") {
  std::mt19937_64 rng(1);
  Matrix b = Matrix::Identity(2, 2);
  b(1, 0) = -0.6;  // x2 = 0.6 x1 + e2
  const Matrix phi = 0.3 * Matrix::Identity(2, 2);
  const GdsResult r = fit_eqvar_gds(residual_fit(b, phi, 100000, rng));
  CHECK(r.ordering == std::vector<int>{0, 1});
  CHECK(std::abs(r.a0_hat(1, 0) - 0.6) <= 0.05);
  CHECK(r.a0_hat(0, 1) == 0.0);
  CHECK(r.sigma_hat == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("the chain direction follows the variances, not the labels") {
  std::mt19937_64 rng(2);
  Matrix b = Matrix::Identity(3, 3);
  b(0, 2) = -0.7;  // x3 -> x1
  b(1, 0) = -0.5;  // x1 -> x2
  const GdsResult r = fit_eqvar_gds(residual_fit(b, Matrix::Zero(3, 3), 100000, rng));
  CHECK(r.ordering == std::vector<int>{2, 0, 1});
  CHECK(std::abs(r.a0_hat(0, 2) - 0.7) <= 0.05);
  CHECK(std::abs(r.a0_hat(1, 0) - 0.5) <= 0.05);
  CHECK(std::abs(r.a0_hat(1, 2)) <= 0.05);
}

TEST_CASE("independent residuals give few false positives") {
  std::mt19937_64 rng(3);
  const int p = 6, reps = 40;
  int tested = 0, positives = 0;
  for (int rep = 0; rep < reps; ++rep) {
    const GdsResult r = fit_eqvar_gds(residual_fit(Matrix::Identity(p, p), Matrix::Zero(p, p), 2000, rng));
    tested += p * (p - 1) / 2;
    positives += static_cast<int>((r.a0_hat.array() != 0.0).count());
  }
  const double rate = static_cast<double>(positives) / tested;
  // binomial(600, 0.05): sd ~ 0.009; the greedy ordering biases slightly upward
  CHECK(rate < 0.05 + 4 * 0.009);
}

TEST_CASE("p = 1") {
  std::mt19937_64 rng(4);
  const Matrix phi = Matrix::Constant(1, 1, 0.4);
  const GdsResult r = fit_eqvar_gds(residual_fit(Matrix::Identity(1, 1), phi, 50, rng));
  CHECK(r.ordering == std::vector<int>{0});
  CHECK(r.a0_hat(0, 0) == 0.0);
  CHECK(r.a1_hat(0, 0) == 0.4);
}

TEST_CASE("structural invariants on simulated data") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const int p = 3 + trial % 4;
    const StructuralModel m = random_model(p, rng);
    const TimeSeries ts = center(simulate(m, 800, 50 + trial));
    const OlsFit fit = fit_ols(ts);
    const GdsResult r = fit_eqvar_gds(ts, fit);

    std::vector<int> sorted = r.ordering;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < p; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);

    CHECK(r.a0_hat.diagonal().cwiseAbs().maxCoeff() == 0.0);
    const Matrix perm = permutation(r.ordering);
    const Matrix permuted = perm * r.a0_hat * perm.transpose();
    CHECK(permuted.triangularView<Eigen::Upper>().toDenseMatrix().cwiseAbs().maxCoeff() == 0.0);

    const Matrix b = Matrix::Identity(p, p) - r.a0_hat;
    CHECK((r.a1_hat - b * fit.phi_hat).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((b.partialPivLu().solve(r.a1_hat) - fit.phi_hat).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("relabelling nodes permutes the result") {
  std::mt19937_64 rng(6);
  Matrix b = Matrix::Identity(4, 4);
  b(1, 0) = -0.5;
  b(2, 1) = 0.8;
  b(3, 0) = -0.4;
  const OlsFit fit = residual_fit(b, 0.2 * gaussian_matrix(4, 4, rng), 5000, rng);
  const GdsResult r = fit_eqvar_gds(fit);

  const std::vector<int> relabel{2, 0, 3, 1};  // new index k holds old node relabel[k]
  const Matrix perm = permutation(relabel);
  OlsFit pf = fit;
  pf.residuals = perm * fit.residuals;
  pf.phi_hat = perm * fit.phi_hat * perm.transpose();
  pf.sigma_u_hat = perm * fit.sigma_u_hat * perm.transpose();
  const GdsResult rp = fit_eqvar_gds(pf);

  CHECK((perm.transpose() * rp.a0_hat * perm - r.a0_hat).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((perm.transpose() * rp.a1_hat * perm - r.a1_hat).cwiseAbs().maxCoeff() <= 1e-10);
  for (std::size_t k = 0; k < r.ordering.size(); ++k)
    CHECK(relabel[static_cast<std::size_t>(rp.ordering[k])] == r.ordering[k]);
}

TEST_CASE("error paths") {
  std::mt19937_64 rng(7);
  OlsFit fit = residual_fit(Matrix::Identity(2, 2), Matrix::Zero(2, 2), 100, rng);
  CHECK_THROWS_AS(fit_eqvar_gds(fit, 0.0), Error);
  CHECK_THROWS_AS(fit_eqvar_gds(fit, 1.0), Error);

  OlsFit degenerate = fit;
  degenerate.residuals.row(1) = 2.0 * degenerate.residuals.row(0);
  try {
    fit_eqvar_gds(degenerate);
    FAIL("expected a rank error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Rank);
  }

  TimeSeries raw{gaussian_matrix(2, 101, rng), false};
  CHECK_THROWS_AS(fit_eqvar_gds(raw, fit), Error);
  raw.centered = true;
  raw.data.conservativeResize(2, 50);
  CHECK_THROWS_AS(fit_eqvar_gds(raw, fit), Error);
}

}  // TEST_SUITE
