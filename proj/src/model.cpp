#include "envar/model.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace envar {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Admissibility: return "admissibility";
    case ErrorKind::Stability: return "stability";
    case ErrorKind::Factorization: return "factorization";
    case ErrorKind::Rank: return "rank";
    case ErrorKind::NotPositiveDefinite: return "not-positive-definite";
    case ErrorKind::InvalidConfig: return "invalid-config";
    case ErrorKind::Diverged: return "diverged";
    case ErrorKind::Generation: return "generation";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

namespace {

void require_square_finite(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw Error(ErrorKind::Dimension, os.str());
  }
  if (!m.allFinite()) throw Error(ErrorKind::Dimension, std::string(what) + ": non-finite entries");
}

bool is_positive_definite(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) return false;
  return (llt.matrixL().toDenseMatrix().diagonal().array() > 0.0).all();
}

}  // namespace

StructuralModel::StructuralModel(Matrix a0_, Matrix a1_, double sigma_)
    : a0(std::move(a0_)), a1(std::move(a1_)), sigma(sigma_) {
  require_square_finite(a0, "a0");
  require_square_finite(a1, "a1");
  if (a0.rows() != a1.rows()) throw Error(ErrorKind::Dimension, "a0 and a1 differ in size");
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw Error(ErrorKind::Dimension, "sigma must be positive and finite");
}

Matrix StructuralModel::stacked() const {
  Matrix s(p(), 2 * p());
  s << b(), a1;
  return s;
}

bool StructuralModel::is_normalized(double tol) const {
  return a0.diagonal().cwiseAbs().maxCoeff() <= tol;
}

StructuralModel from_b(const Matrix& b, const Matrix& a1, double sigma) {
  return StructuralModel(Matrix::Identity(b.rows(), b.cols()) - b, a1, sigma);
}

ReducedForm::ReducedForm(Matrix phi_, Matrix sigma_u_, const Tolerances& tol)
    : phi(std::move(phi_)), sigma_u(std::move(sigma_u_)) {
  require_square_finite(phi, "phi");
  require_square_finite(sigma_u, "sigma_u");
  if (phi.rows() != sigma_u.rows()) throw Error(ErrorKind::Dimension, "phi and sigma_u differ in size");
  if (max_asymmetry(sigma_u) > tol.sym)
    throw Error(ErrorKind::NotPositiveDefinite, "sigma_u is not symmetric");
  if (!is_positive_definite(sigma_u))
    throw Error(ErrorKind::NotPositiveDefinite, "sigma_u is not positive definite");
}

bool ReducedForm::is_stable() const { return spectral_radius(phi) < 1.0; }

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double max_asymmetry(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

double orthogonality_defect(const Matrix& q) {
  return (q.transpose() * q - Matrix::Identity(q.cols(), q.cols())).norm();
}

double spectral_radius(const Matrix& m) {
  require_square_finite(m, "spectral_radius");
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw Error(ErrorKind::Dimension, "spectral_radius: eigenvalue computation failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

AdmissibilityReport is_admissible(const StructuralModel& m, const Tolerances& tol) {
  AdmissibilityReport r;
  r.sigma_positive = m.sigma > 0.0;
  Eigen::JacobiSVD<Matrix> svd(m.b());
  const auto& sv = svd.singularValues();
  r.b_condition_ratio = sv(0) > 0.0 ? sv(sv.size() - 1) / sv(0) : 0.0;
  r.b_invertible = sv(0) > 0.0 && sv(sv.size() - 1) > tol.inv * sv(0);
  if (!r.b_invertible) {
    r.reason = "B singular";
    return r;
  }
  r.spectral_radius = spectral_radius(m.b().partialPivLu().solve(m.a1));
  r.stable = r.spectral_radius < 1.0;
  if (!r.stable) {
    std::ostringstream os;
    os << "unstable (spectral radius " << r.spectral_radius << ")";
    r.reason = os.str();
    return r;
  }
  if (!r.sigma_positive) {
    r.reason = "sigma not positive";
    return r;
  }
  r.admissible = true;
  return r;
}

ReducedForm induced_reduced_form(const StructuralModel& m, const Tolerances& tol) {
  Eigen::JacobiSVD<Matrix> svd(m.b());
  const auto& sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > tol.inv * sv(0)))
    throw Error(ErrorKind::Admissibility, "B singular");
  Eigen::PartialPivLU<Matrix> lu(m.b());
  Matrix phi = lu.solve(m.a1);
  Matrix b_inv = lu.inverse();
  Matrix sigma_u = symmetrize(m.sigma * m.sigma * b_inv * b_inv.transpose());
  return ReducedForm(std::move(phi), std::move(sigma_u), tol);
}

ReducedForm to_reduced_form(const StructuralModel& m, const Tolerances& tol) {
  auto report = is_admissible(m, tol);
  if (!report) throw Error(ErrorKind::Admissibility, "model not admissible: " + report.reason);
  return induced_reduced_form(m, tol);
}

namespace {

Matrix lyapunov_direct(const Matrix& phi, const Matrix& q) {
  const Eigen::Index p = phi.rows();
  const Eigen::Index n = p * p;
  // Column-major vec: vec(Phi X Phi^T) = (Phi kron Phi) vec(X).
  Matrix lhs = Matrix::Identity(n, n);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      lhs.block(i * p, j * p, p, p) -= phi(i, j) * phi;
  Vector rhs = Eigen::Map<const Vector>(q.data(), n);
  Vector x = lhs.partialPivLu().solve(rhs);
  return Eigen::Map<const Matrix>(x.data(), p, p);
}

double lyapunov_residual(const Matrix& phi, const Matrix& q, const Matrix& x) {
  return (x - phi * x * phi.transpose() - q).norm();
}

}  // namespace

StationaryLaw stationary_covariance(const ReducedForm& rf, const Tolerances& tol) {
  const double rho = spectral_radius(rf.phi);
  if (!(rho < 1.0)) {
    std::ostringstream os;
    os << "stationary_covariance: phi unstable (spectral radius " << rho << ")";
    throw Error(ErrorKind::Stability, os.str());
  }
  const double bound = tol.lyapunov * (1.0 + rf.sigma_u.norm());
  Matrix sx;
  if (rf.p() <= tol.lyapunov_direct_max_p) {
    sx = symmetrize(lyapunov_direct(rf.phi, rf.sigma_u));
  } else {
    sx = rf.sigma_u;
    int it = 0;
    for (; it < tol.lyapunov_max_iter; ++it) {
      sx = symmetrize(rf.phi * sx * rf.phi.transpose() + rf.sigma_u);
      if (lyapunov_residual(rf.phi, rf.sigma_u, sx) <= bound) break;
    }
    if (it == tol.lyapunov_max_iter)
      throw Error(ErrorKind::Stability, "stationary_covariance: fixed-point iteration did not converge");
  }
  const double res = lyapunov_residual(rf.phi, rf.sigma_u, sx);
  if (res > bound) {
    std::ostringstream os;
    os << "stationary_covariance: residual " << res << " exceeds " << bound;
    throw Error(ErrorKind::Stability, os.str());
  }
  StationaryLaw law;
  law.gamma1 = rf.phi * sx;
  law.sigma_x = std::move(sx);
  return law;
}

Matrix autocovariance(const ReducedForm& rf, const StationaryLaw& law, int lag) {
  if (lag < 0) throw Error(ErrorKind::Dimension, "autocovariance: negative lag");
  Matrix g = law.sigma_x;
  for (int k = 0; k < lag; ++k) g = rf.phi * g;
  return g;
}

TimeSeries simulate(const StructuralModel& m, int t_len, std::uint64_t seed, int burn_in,
                    const Tolerances& tol) {
  return simulate(m, Vector::Constant(m.p(), m.sigma), t_len, seed, burn_in, tol);
}

TimeSeries simulate(const StructuralModel& m, const Vector& noise_sd, int t_len,
                    std::uint64_t seed, int burn_in, const Tolerances& tol) {
  if (t_len < 2) throw Error(ErrorKind::Dimension, "simulate: t_len must be at least 2");
  if (burn_in < 0) throw Error(ErrorKind::Dimension, "simulate: negative burn_in");
  if (noise_sd.size() != m.p() || (noise_sd.array() <= 0.0).any())
    throw Error(ErrorKind::Dimension, "simulate: noise_sd must be positive with length p");
  auto report = is_admissible(m, tol);
  if (!report) throw Error(ErrorKind::Admissibility, "simulate: " + report.reason);

  const int p = m.p();
  Eigen::PartialPivLU<Matrix> lu(m.b());
  const Matrix b_inv = lu.inverse();
  const Matrix phi = lu.solve(m.a1);
  const Matrix mix = b_inv * noise_sd.asDiagonal();
  ReducedForm rf(phi, symmetrize(mix * mix.transpose()), tol);
  const StationaryLaw law = stationary_covariance(rf, tol);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](Vector& z) {
    for (int i = 0; i < p; ++i) z(i) = normal(rng);
  };

  Vector z(p);
  draw(z);
  Eigen::LDLT<Matrix> ldlt(law.sigma_x);
  Vector x = ldlt.transpositionsP().transpose() *
             (ldlt.matrixL() * (ldlt.vectorD().cwiseMax(0.0).cwiseSqrt().asDiagonal() * z));

  for (int t = 0; t < burn_in; ++t) {
    draw(z);
    x = phi * x + mix * z;
  }
  TimeSeries ts;
  ts.data.resize(p, t_len);
  ts.data.col(0) = x;
  for (int t = 1; t < t_len; ++t) {
    draw(z);
    x = phi * x + mix * z;
    ts.data.col(t) = x;
  }
  return ts;
}

Matrix gram_orthogonal_factor(const Matrix& c_mat, const Matrix& d_mat, double lambda,
                              const Tolerances& tol) {
  require_square_finite(c_mat, "gram_orthogonal_factor C");
  require_square_finite(d_mat, "gram_orthogonal_factor D");
  if (c_mat.rows() != d_mat.rows()) throw Error(ErrorKind::Dimension, "C and D differ in size");
  if (!(lambda > 0.0)) throw Error(ErrorKind::Factorization, "lambda must be positive");
  const Matrix target = lambda * c_mat.transpose() * c_mat;
  const double mismatch = (d_mat.transpose() * d_mat - target).norm() / target.norm();
  if (!(mismatch <= tol.gram)) {
    std::ostringstream os;
    os << "gram_orthogonal_factor: relative Gram mismatch " << mismatch << " exceeds " << tol.gram;
    throw Error(ErrorKind::Factorization, os.str());
  }
  // Q^T solves C^T Q^T = D^T.
  Matrix qt = c_mat.transpose().partialPivLu().solve(d_mat.transpose());
  return qt.transpose() / std::sqrt(lambda);
}

}  // namespace envar
