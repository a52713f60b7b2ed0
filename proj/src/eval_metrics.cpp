#include "envar/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "envar/eqvar_gds.hpp"
#include "envar/equivalence.hpp"

namespace envar {

namespace {

Vector flatten(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Vector offdiag_entries(const Matrix& m) {
  const Eigen::Index p = m.rows();
  Vector v(p * (p - 1));
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < p; ++i)
      if (i != j) v(k++) = m(i, j);
  return v;
}

/// Cumulative-mass mask of one matrix. Ties in |w| keep (row, col) order.
Adjacency mass_mask(const Matrix& m, double mass, bool skip_diagonal) {
  struct Entry {
    double w;
    Eigen::Index i, j;
  };
  std::vector<Entry> entries;
  double total = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (skip_diagonal && i == j) continue;
      const double w = std::abs(m(i, j));
      entries.push_back({w, i, j});
      total += w;
    }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.w > b.w; });
  Adjacency mask = Adjacency::Zero(m.rows(), m.cols());
  if (total <= 0.0) return mask;
  double acc = 0.0;
  for (const auto& e : entries) {
    if (e.w <= 0.0) break;
    mask(e.i, e.j) = 1;
    acc += e.w;
    if (acc >= mass * total) break;
  }
  return mask;
}

}  // namespace

Correlation pearson(const Vector& x, const Vector& y, double gate) {
  if (x.size() != y.size()) throw Error(ErrorKind::Dimension, "pearson: length mismatch");
  Correlation c;
  c.n = static_cast<int>(x.size());
  if (c.n < 3) return c;
  const Vector xc = x.array() - x.mean();
  const Vector yc = y.array() - y.mean();
  const double sxx = xc.squaredNorm();
  const double syy = yc.squaredNorm();
  if (!(sxx > 0.0) || !(syy > 0.0)) return c;
  c.r_raw = std::clamp(xc.dot(yc) / std::sqrt(sxx * syy), -1.0, 1.0);
  const double dof = c.n - 2.0;
  const double denom = 1.0 - c.r_raw * c.r_raw;
  c.p_value = denom <= 0.0 ? 0.0 : t_test_p_value(c.r_raw * std::sqrt(dof / denom), dof);
  if (c.p_value < gate) c.r = c.r_raw;
  return c;
}

ScoreReport score(const StructuralModel& estimate, const GroundTruthInstance& truth, double eta,
                  const std::string& method_name) {
  const StructuralModel& ref = truth.model;
  if (estimate.p() != ref.p()) throw Error(ErrorKind::Dimension, "score: dimension mismatch");
  ScoreReport rep;
  rep.method_name = method_name;
  rep.p = ref.p();
  rep.episode = truth.episode_index;
  rep.sf_oad = align_sf(ref, estimate).value;
  rep.obs_oad = align_obs(ref, estimate, eta).value;

  const ReducedForm rf_true = truth.per_node_sigmas.size() == ref.p() ? truth.reduced_form()
                                                                      : induced_reduced_form(ref);
  const ReducedForm rf_est = induced_reduced_form(estimate);
  rep.phi = pearson(flatten(rf_true.phi), flatten(rf_est.phi));
  rep.sigma_u = pearson(flatten(rf_true.sigma_u), flatten(rf_est.sigma_u));
  rep.a0 = pearson(offdiag_entries(ref.a0), offdiag_entries(estimate.a0));
  rep.a1 = pearson(flatten(ref.a1), flatten(estimate.a1));
  return rep;
}

Adjacency binarize_cumulative(const StructuralModel& m, double mass) {
  if (!(mass > 0.0 && mass <= 1.0)) throw Error(ErrorKind::InvalidConfig, "binarize_cumulative: mass must lie in (0, 1]");
  const Adjacency a0 = mass_mask(m.a0, mass, true);
  const Adjacency a1 = mass_mask(m.a1, mass, false);
  return (a0 + a1).cwiseMin(1);
}

CentralityReport centralities(const Adjacency& adj) {
  if (adj.rows() != adj.cols()) throw Error(ErrorKind::Dimension, "centralities: adjacency must be square");
  if ((adj.array() != 0 && adj.array() != 1).any())
    throw Error(ErrorKind::InvalidConfig, "centralities: adjacency must be binary");
  const auto p = static_cast<std::size_t>(adj.rows());
  CentralityReport rep;
  rep.in_degree.resize(p);
  rep.out_degree.resize(p);
  rep.net_flow.resize(p);
  for (std::size_t i = 0; i < p; ++i) {
    rep.in_degree[i] = adj.row(static_cast<Eigen::Index>(i)).sum();
    rep.out_degree[i] = adj.col(static_cast<Eigen::Index>(i)).sum();
    rep.net_flow[i] = rep.out_degree[i] - rep.in_degree[i];
  }
  return rep;
}

}  // namespace envar
