#include "envar/equivalence.hpp"

#include <algorithm>
#include <cmath>

#include "envar/envar_optimizer.hpp"
#include "envar/orthogonal.hpp"

namespace envar {

namespace {

constexpr double kClamp = 1e-9;
constexpr double kGapTol = 1e-8;

void require_same_p(const StructuralModel& a, const StructuralModel& b, const char* what) {
  if (a.p() != b.p()) throw Error(ErrorKind::Dimension, std::string(what) + ": models differ in dimension");
}

ReducedForm checked_reduced(const StructuralModel& m, const char* what) {
  auto report = is_admissible(m);
  if (!report) throw Error(ErrorKind::Admissibility, std::string(what) + ": " + report.reason);
  return induced_reduced_form(m);
}

/// Shared closed form. eta = 0 gives the scale-free discrepancy.
AlignmentResult closed_form(const StructuralModel& m_ref, const StructuralModel& m_test, double eta) {
  require_same_p(m_ref, m_test, "align");
  if (!(eta >= 0.0)) throw Error(ErrorKind::InvalidConfig, "align: eta must be nonnegative");
  const Matrix s = m_ref.stacked();
  const Matrix s_prime = m_test.stacked();
  const Matrix cross = s * s_prime.transpose();
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);

  AlignmentResult r;
  r.singular_values = svd.singularValues();
  r.alpha = r.singular_values.sum();
  r.q_star = svd.matrixV() * svd.matrixU().transpose();

  const double s_norm2 = s.squaredNorm();
  const double sp_norm2 = s_prime.squaredNorm();
  const double numer = r.alpha + eta * m_ref.sigma * m_test.sigma;
  const double denom = s_norm2 + eta * m_ref.sigma * m_ref.sigma;
  const double base = sp_norm2 + eta * m_test.sigma * m_test.sigma;

  const double alpha_floor = 1e-12 * std::max(1.0, std::sqrt(s_norm2 * sp_norm2));
  if (numer <= alpha_floor) {
    r.value = base;
    r.c_star = 0.0;
    r.infimum_not_attained = true;
  } else {
    r.c_star = numer / denom;
    r.value = base - numer * numer / denom;
  }
  if (r.value < 0.0 && r.value >= -kClamp * std::max(1.0, base)) r.value = 0.0;
  r.value = std::max(r.value, 0.0);

  const auto& g = r.singular_values;
  const double scale = std::max(g(0), 1e-300);
  for (Eigen::Index i = 0; i + 1 < g.size(); ++i)
    if (g(i) - g(i + 1) <= kGapTol * scale) r.unique_q = false;
  if (g.size() > 0 && g(g.size() - 1) <= kGapTol * scale) r.unique_q = false;
  return r;
}

}  // namespace

OrbitElement::OrbitElement(Matrix q_, double c_, const Tolerances& tol) : q(std::move(q_)), c(c_) {
  if (q.rows() != q.cols() || q.rows() == 0) throw Error(ErrorKind::Dimension, "OrbitElement: q must be square");
  if (!(orthogonality_defect(q) <= tol.orthogonal))
    throw Error(ErrorKind::InvalidConfig, "OrbitElement: q is not orthogonal");
  if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorKind::InvalidConfig, "OrbitElement: c must be positive");
}

StructuralModel orbit_transform(const StructuralModel& m, const OrbitElement& e) {
  if (e.q.rows() != m.p()) throw Error(ErrorKind::Dimension, "orbit_transform: dimension mismatch");
  return from_b(e.c * e.q * m.b(), e.c * e.q * m.a1, e.c * m.sigma);
}

bool obs_equivalent(const StructuralModel& m1, const StructuralModel& m2, double tol) {
  require_same_p(m1, m2, "obs_equivalent");
  const ReducedForm r1 = checked_reduced(m1, "obs_equivalent");
  const ReducedForm r2 = checked_reduced(m2, "obs_equivalent");
  return (r1.phi - r2.phi).cwiseAbs().maxCoeff() <= tol &&
         (r1.sigma_u - r2.sigma_u).cwiseAbs().maxCoeff() <= tol;
}

ScaleFreeEquivalence sf_equivalent(const StructuralModel& m1, const StructuralModel& m2, double tol) {
  require_same_p(m1, m2, "sf_equivalent");
  const ReducedForm r1 = checked_reduced(m1, "sf_equivalent");
  const ReducedForm r2 = checked_reduced(m2, "sf_equivalent");
  ScaleFreeEquivalence out;
  out.scale = r2.sigma_u.trace() / r1.sigma_u.trace();
  const double phi_gap = (r1.phi - r2.phi).cwiseAbs().maxCoeff();
  const double cov_gap = (r2.sigma_u - out.scale * r1.sigma_u).cwiseAbs().maxCoeff() /
                         r2.sigma_u.cwiseAbs().maxCoeff();
  out.equivalent = phi_gap <= tol && cov_gap <= tol;
  return out;
}

double alignment_objective(const StructuralModel& m_ref, const StructuralModel& m_test,
                           const Matrix& q, double c, double eta) {
  require_same_p(m_ref, m_test, "alignment_objective");
  const double ds = m_test.sigma - c * m_ref.sigma;
  return (m_test.stacked() - c * q * m_ref.stacked()).squaredNorm() + eta * ds * ds;
}

AlignmentResult align_obs(const StructuralModel& m_ref, const StructuralModel& m_test, double eta) {
  return closed_form(m_ref, m_test, eta);
}

AlignmentResult align_sf(const StructuralModel& m_ref, const StructuralModel& m_test) {
  return closed_form(m_ref, m_test, 0.0);
}

double sym_discrepancy(const StructuralModel& m1, const StructuralModel& m2, double eta) {
  return 0.5 * (align_obs(m1, m2, eta).value + align_obs(m2, m1, eta).value);
}

namespace {

/// Gauss-Newton on r(Q, c) = diag(c Q B) - 1 with updates Q <- exp(W) Q,
/// c <- c exp(d); minimum-norm steps since the system is underdetermined.
void polish_diagonal(const Matrix& b, Matrix& q, double& c, int max_iter = 100) {
  const int p = static_cast<int>(b.rows());
  const int m = skew_dim(p);
  auto residual = [&](const Matrix& qq, double cc) {
    return Vector((cc * qq * b).diagonal().array() - 1.0);
  };
  Vector r = residual(q, c);
  for (int it = 0; it < max_iter && r.norm() > 1e-14; ++it) {
    const Matrix qb = c * q * b;
    Matrix jac = Matrix::Zero(p, m + 1);
    int idx = 0;
    for (int a = 0; a < p; ++a)
      for (int bb = a + 1; bb < p; ++bb) {
        jac(a, idx) = qb(bb, a);
        jac(bb, idx) = -qb(a, bb);
        ++idx;
      }
    jac.col(m) = qb.diagonal();
    const Vector step = -jac.completeOrthogonalDecomposition().solve(r);
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
      const Matrix q_new = expm(skew_from_params(t * step.head(m), p)) * q;
      const double c_new = c * std::exp(t * step(m));
      const Vector r_new = residual(q_new, c_new);
      if (r_new.norm() < r.norm()) {
        q = q_new;
        c = c_new;
        r = r_new;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
}

}  // namespace

std::vector<StructuralModel> normalized_orbit_search(const StructuralModel& m, std::uint64_t seed,
                                                     const OrbitSearchOptions& opts) {
  auto report = is_admissible(m);
  if (!report) throw Error(ErrorKind::Admissibility, "normalized_orbit_search: " + report.reason);
  if (opts.restarts < 1) throw Error(ErrorKind::InvalidConfig, "normalized_orbit_search: restarts must be positive");

  EnvarConfig cfg;
  cfg.lambda0 = 0.0;
  cfg.lambda1 = 0.0;
  cfg.mu = 1.0;
  cfg.seed = seed;
  cfg.restarts = opts.restarts;
  cfg.max_steps = opts.max_steps;
  const Matrix b = m.b();
  const auto runs = optimize_orbit(b, m.a1, cfg, NormConstants{});

  std::vector<StructuralModel> found;
  std::vector<Matrix> found_b;
  for (const auto& run : runs) {
    Matrix q = run.q;
    double c = run.c;
    polish_diagonal(b, q, c);
    const Matrix cqb = c * q * b;
    if ((cqb.diagonal().array() - 1.0).abs().maxCoeff() > opts.diag_tol) continue;
    if (orthogonality_defect(q) > 1e-8) continue;
    StructuralModel rep = orbit_transform(m, OrbitElement(q, c));
    if (!is_admissible(rep) || !obs_equivalent(m, rep, 1e-8)) continue;
    const bool duplicate = std::any_of(found_b.begin(), found_b.end(), [&](const Matrix& other) {
      return (other - cqb).cwiseAbs().maxCoeff() <= opts.distinct_tol;
    });
    if (duplicate) continue;
    found_b.push_back(cqb);
    found.push_back(std::move(rep));
  }
  return found;
}

}  // namespace envar
