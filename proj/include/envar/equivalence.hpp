#pragma once

#include <cstdint>
#include <vector>

#include "envar/model.hpp"

namespace envar {

/// Element (Q, c) of the orthogonal-scale group acting on structural models.
struct OrbitElement {
  Matrix q;
  double c = 1.0;

  OrbitElement() = default;
  /// Throws InvalidConfig unless q is orthogonal (tol.orthogonal) and c > 0.
  OrbitElement(Matrix q_, double c_, const Tolerances& tol = {});

  static OrbitElement identity(int p) { return OrbitElement(Matrix::Identity(p, p), 1.0); }
};

struct AlignmentResult {
  double value = 0.0;
  Matrix q_star;
  double c_star = 0.0;
  double alpha = 0.0;  // nuclear norm of S S'^T
  bool unique_q = true;
  bool infimum_not_attained = false;  // c* = 0, infimum approached as c -> 0
  Vector singular_values;
};

struct ScaleFreeEquivalence {
  bool equivalent = false;
  double scale = 0.0;  // a with Sigma_u' = a Sigma_u

  explicit operator bool() const { return equivalent; }
};

/// (I - c Q B, c Q A1, c sigma)
StructuralModel orbit_transform(const StructuralModel& m, const OrbitElement& e);

bool obs_equivalent(const StructuralModel& m1, const StructuralModel& m2, double tol = 1e-8);

ScaleFreeEquivalence sf_equivalent(const StructuralModel& m1, const StructuralModel& m2,
                                   double tol = 1e-8);

/// Raw alignment objective ||S' - c Q S||_F^2 + eta (sigma' - c sigma)^2.
double alignment_objective(const StructuralModel& m_ref, const StructuralModel& m_test,
                           const Matrix& q, double c, double eta);

/// One-sided discrepancy from m_test to the observational class of m_ref:
/// inf over (Q, c) of ||S' - c Q S||_F^2 + eta (sigma' - c sigma)^2, evaluated
/// in closed form through the SVD of S S'^T.
AlignmentResult align_obs(const StructuralModel& m_ref, const StructuralModel& m_test,
                          double eta = 1.0);

/// Scale-free variant: inf over (Q, c) of ||S' - c Q S||_F^2.
AlignmentResult align_sf(const StructuralModel& m_ref, const StructuralModel& m_test);

/// Mean of the two one-sided observational discrepancies.
double sym_discrepancy(const StructuralModel& m1, const StructuralModel& m2, double eta = 1.0);

struct OrbitSearchOptions {
  int restarts = 16;
  int max_steps = 5000;
  double diag_tol = 1e-6;
  double distinct_tol = 1e-6;
};

/// Searches the orbit of an admissible model for normalized members
/// (diag(c Q B) = 1). Returns the distinct representatives found; may be empty.
std::vector<StructuralModel> normalized_orbit_search(const StructuralModel& m, std::uint64_t seed,
                                                     const OrbitSearchOptions& opts = {});

inline std::vector<StructuralModel> normalized_orbit_search(const StructuralModel& m,
                                                            std::uint64_t seed, int restarts) {
  OrbitSearchOptions opts;
  opts.restarts = restarts;
  return normalized_orbit_search(m, seed, opts);
}

}  // namespace envar
