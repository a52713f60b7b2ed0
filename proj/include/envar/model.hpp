#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "envar/constants.hpp"
#include "envar/error.hpp"

namespace envar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Structural VAR(1) with equal noise variance:
///   (I - a0) X_t = a1 X_{t-1} + e_t,  e_t ~ N(0, sigma^2 I).
struct StructuralModel {
  Matrix a0;
  Matrix a1;
  double sigma = 1.0;

  StructuralModel() = default;
  /// Throws Dimension if the shapes disagree or sigma <= 0.
  StructuralModel(Matrix a0_, Matrix a1_, double sigma_);

  int p() const { return static_cast<int>(a0.rows()); }
  Matrix b() const { return Matrix::Identity(p(), p()) - a0; }
  /// Stacked [B | A1], p x 2p.
  Matrix stacked() const;
  bool is_normalized(double tol = 1e-12) const;
};

/// Build a structural model from B instead of A0.
StructuralModel from_b(const Matrix& b, const Matrix& a1, double sigma);

struct ReducedForm {
  Matrix phi;
  Matrix sigma_u;

  ReducedForm() = default;
  /// Validates shape, symmetry (tol.sym) and positive definiteness.
  ReducedForm(Matrix phi_, Matrix sigma_u_, const Tolerances& tol = {});

  int p() const { return static_cast<int>(phi.rows()); }
  bool is_stable() const;
};

struct StationaryLaw {
  Matrix sigma_x;  // Gamma_0
  Matrix gamma1;   // Gamma_1 = phi * sigma_x
};

/// p x T observations, one column per time step.
struct TimeSeries {
  Matrix data;
  bool centered = false;

  int p() const { return static_cast<int>(data.rows()); }
  int t_len() const { return static_cast<int>(data.cols()); }
};

struct AdmissibilityReport {
  bool admissible = false;
  bool b_invertible = false;
  bool stable = false;
  bool sigma_positive = false;
  double spectral_radius = 0.0;
  double b_condition_ratio = 0.0;  // smallest / largest singular value of B
  std::string reason;              // empty when admissible

  explicit operator bool() const { return admissible; }
};

Matrix symmetrize(const Matrix& m);
double max_asymmetry(const Matrix& m);
/// ||Q^T Q - I||_F
double orthogonality_defect(const Matrix& q);

double spectral_radius(const Matrix& m);

AdmissibilityReport is_admissible(const StructuralModel& m, const Tolerances& tol = {});

/// Phi = B^{-1} A1, Sigma_u = sigma^2 B^{-1} B^{-T}. Throws Admissibility.
ReducedForm to_reduced_form(const StructuralModel& m, const Tolerances& tol = {});

/// Same map, requiring only an invertible B. Used when scoring estimates that
/// may not be stable.
ReducedForm induced_reduced_form(const StructuralModel& m, const Tolerances& tol = {});

/// Solves Sigma_X = Phi Sigma_X Phi^T + Sigma_u. Throws Stability.
StationaryLaw stationary_covariance(const ReducedForm& rf, const Tolerances& tol = {});

/// Lag-k autocovariance Gamma_k = Phi^k Gamma_0 (k >= 0).
Matrix autocovariance(const ReducedForm& rf, const StationaryLaw& law, int lag);

/// X_t = B^{-1}(A1 X_{t-1} + e_t). X_0 is drawn from the stationary law, then
/// `burn_in` steps are discarded. Output is deterministic in `seed`.
TimeSeries simulate(const StructuralModel& m, int t_len, std::uint64_t seed,
                    int burn_in = 100, const Tolerances& tol = {});

/// Heteroscedastic variant: e_t ~ N(0, diag(noise_sd^2)).
TimeSeries simulate(const StructuralModel& m, const Vector& noise_sd, int t_len,
                    std::uint64_t seed, int burn_in = 100, const Tolerances& tol = {});

/// Given D^T D = lambda C^T C, returns the orthogonal Q = D C^{-1} / sqrt(lambda)
/// with D = sqrt(lambda) Q C. Throws Factorization on a Gram mismatch.
Matrix gram_orthogonal_factor(const Matrix& c_mat, const Matrix& d_mat, double lambda,
                              const Tolerances& tol = {});

}  // namespace envar
