#include <doctest.h>

#include "envar/equivalence.hpp"
#include "envar/eval_metrics.hpp"
#include "oracles.hpp"

using namespace envar;
using envar::testing::gaussian_matrix;
using envar::testing::haar_orthogonal;
using envar::testing::random_model;

namespace {

GroundTruthInstance truth_of(const StructuralModel& m) {
  GroundTruthInstance t;
  t.model = m;
  t.per_node_sigmas = Vector::Constant(m.p(), m.sigma);
  return t;
}

bool subset(const Adjacency& a, const Adjacency& b) { return ((a.array() == 1) <= (b.array() == 1)).all(); }

}  // namespace

TEST_SUITE("eval_metrics") {

TEST_CASE("pearson against a direct computation") {
  std::mt19937_64 rng(1);
  const Vector x = gaussian_matrix(30, 1, rng);
  const Vector y = 0.5 * x + gaussian_matrix(30, 1, rng);
  const Correlation c = pearson(x, y);
  const double mx = x.mean(), my = y.mean();
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 30; ++i) {
    sxy += (x(i) - mx) * (y(i) - my);
    sxx += (x(i) - mx) * (x(i) - mx);
    syy += (y(i) - my) * (y(i) - my);
  }
  CHECK(c.r_raw == doctest::Approx(sxy / std::sqrt(sxx * syy)).epsilon(1e-13));
  CHECK(c.n == 30);

  const Correlation perfect = pearson(x, 2.0 * x);
  CHECK(perfect.r_raw == doctest::Approx(1.0));
  CHECK(perfect.p_value == 0.0);
  REQUIRE(perfect.r.has_value());

  const Correlation flat = pearson(x, Vector::Constant(30, 2.0));
  CHECK_FALSE(flat.r.has_value());
  CHECK(flat.p_value == 1.0);
  CHECK_THROWS_AS(pearson(x, Vector::Zero(3)), Error);
}

TEST_CASE("pearson gate is exactly p < 0.05") {
  std::mt19937_64 rng(2);
  int nulled = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const Vector x = gaussian_matrix(20, 1, rng), y = gaussian_matrix(20, 1, rng);
    const Correlation c = pearson(x, y);
    CHECK(c.r.has_value() == (c.p_value < 0.05));
    nulled += !c.r.has_value();
  }
  // independent draws: about 5% pass the gate
  CHECK(nulled > 340);
  CHECK(nulled < 395);
}

TEST_CASE("score of the truth itself") {
  std::mt19937_64 rng(3);
  const StructuralModel m = random_model(5, rng);
  const ScoreReport r = score(m, truth_of(m), 1.0, "self");
  CHECK(r.sf_oad <= 1e-9);
  CHECK(r.obs_oad <= 1e-9);
  for (const Correlation* c : {&r.phi, &r.sigma_u, &r.a0, &r.a1}) {
    REQUIRE(c->r.has_value());
    CHECK(*c->r == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(r.method_name == "self");
  CHECK(r.p == 5);
}

TEST_CASE("orbit members score zero") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 2 + trial % 5;
    const StructuralModel m = random_model(p, rng);
    std::uniform_real_distribution<double> cu(0.3, 3.0);
    StructuralModel est = orbit_transform(m, OrbitElement(haar_orthogonal(p, rng), cu(rng)));
    est.sigma = 0.77;
    const ScoreReport r = score(est, truth_of(m));
    CHECK(r.sf_oad <= 1e-8);
    REQUIRE(r.phi.r.has_value());
    CHECK(*r.phi.r == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("independent random estimates do not correlate on average") {
  std::mt19937_64 rng(5);
  int significant = 0;
  double sum_r = 0.0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    const ScoreReport r = score(random_model(4, rng), truth_of(random_model(4, rng)));
    significant += r.phi.r.has_value();
    sum_r += r.phi.r_raw;
  }
  CHECK(std::abs(sum_r / trials) < 0.05);
  CHECK(significant < 0.12 * trials);
}

TEST_CASE("score rejects mismatched dimensions") {
  std::mt19937_64 rng(6);
  CHECK_THROWS_AS(score(random_model(3, rng), truth_of(random_model(4, rng))), Error);
}

TEST_CASE("binarize_cumulative examples") {
  const int p = 4;
  Matrix a1 = Matrix::Zero(p, p);
  a1.diagonal() << 3, 1, 1, 1;
  const StructuralModel m(Matrix::Zero(p, p), a1, 1.0);
  const Adjacency half = binarize_cumulative(m, 0.5);
  CHECK(half.sum() == 1);
  CHECK(half(0, 0) == 1);

  std::mt19937_64 rng(7);
  const StructuralModel r = random_model(5, rng);
  const Adjacency all = binarize_cumulative(r, 1.0);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const bool expected = (i != j && r.a0(i, j) != 0.0) || r.a1(i, j) != 0.0;
      CHECK((all(i, j) == 1) == expected);
    }

  const StructuralModel zero(Matrix::Zero(3, 3), Matrix::Zero(3, 3), 1.0);
  CHECK(binarize_cumulative(zero, 0.85).sum() == 0);
  CHECK_THROWS_AS(binarize_cumulative(zero, 0.0), Error);
  CHECK_THROWS_AS(binarize_cumulative(zero, 1.5), Error);
}

TEST_CASE("binarize_cumulative breaks ties in row-major order") {
  Matrix a1 = Matrix::Zero(2, 2);
  a1 << 1, 1, 1, 1;
  const Adjacency a = binarize_cumulative(StructuralModel(Matrix::Zero(2, 2), a1, 1.0), 0.5);
  Adjacency expected(2, 2);
  expected << 1, 1, 0, 0;
  CHECK(a == expected);
}

TEST_CASE("binarization is monotone in the mass") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const StructuralModel m = random_model(6, rng);
    Adjacency prev = binarize_cumulative(m, 0.05);
    for (double mass : {0.2, 0.5, 0.85, 0.95, 1.0}) {
      const Adjacency cur = binarize_cumulative(m, mass);
      CHECK(subset(prev, cur));
      prev = cur;
    }
  }
}

TEST_CASE("centralities examples") {
  Adjacency single = Adjacency::Zero(3, 3);
  single(1, 0) = 1;  // 0 -> 1
  const CentralityReport s = centralities(single);
  CHECK(s.in_degree == std::vector<int>{0, 1, 0});
  CHECK(s.out_degree == std::vector<int>{1, 0, 0});
  CHECK(s.net_flow == std::vector<int>{1, -1, 0});

  const CentralityReport e = centralities(Adjacency::Zero(4, 4));
  CHECK(e.in_degree == std::vector<int>(4, 0));
  CHECK(e.net_flow == std::vector<int>(4, 0));

  Adjacency complete = Adjacency::Ones(3, 3);
  complete.diagonal().setZero();
  const CentralityReport c = centralities(complete);
  CHECK(c.in_degree == std::vector<int>{2, 2, 2});
  CHECK(c.out_degree == std::vector<int>{2, 2, 2});
  CHECK(c.net_flow == std::vector<int>{0, 0, 0});

  Adjacency bad = Adjacency::Zero(2, 2);
  bad(0, 1) = 2;
  CHECK_THROWS_AS(centralities(bad), Error);
}

TEST_CASE("net flow is conserved") {
  std::mt19937_64 rng(9);
  std::bernoulli_distribution edge(0.4);
  for (int trial = 0; trial < 50; ++trial) {
    Adjacency a(7, 7);
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 7; ++j) a(i, j) = edge(rng);
    const CentralityReport c = centralities(a);
    int total = 0;
    for (std::size_t i = 0; i < 7; ++i) {
      CHECK(c.net_flow[i] == c.out_degree[i] - c.in_degree[i]);
      total += c.net_flow[i];
    }
    CHECK(total == 0);
  }
}

}  // TEST_SUITE
