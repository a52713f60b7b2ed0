#include "envar/orthogonal.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace envar {

Matrix random_orthogonal(int p, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(p, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < p; ++i) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < p; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

Matrix random_rotation(int p, std::mt19937_64& rng) {
  Matrix q = random_orthogonal(p, rng);
  if (q.determinant() < 0.0) q.col(0) *= -1.0;
  return q;
}

Matrix skew_from_params(const Vector& params, int p) {
  Matrix k = Matrix::Zero(p, p);
  int idx = 0;
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) {
      k(i, j) = params(idx);
      k(j, i) = -params(idx);
      ++idx;
    }
  return k;
}

Matrix expm(const Matrix& a) { return a.exp(); }

Vector expm_skew_gradient(const Matrix& k, const Matrix& g) {
  const Eigen::Index p = k.rows();
  Matrix block = Matrix::Zero(2 * p, 2 * p);
  block.topLeftCorner(p, p) = k.transpose();
  block.bottomRightCorner(p, p) = k.transpose();
  block.topRightCorner(p, p) = g;
  const Matrix e = block.exp();
  const Matrix dk = e.topRightCorner(p, p);
  Vector grad(skew_dim(static_cast<int>(p)));
  int idx = 0;
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = i + 1; j < p; ++j) grad(idx++) = dk(i, j) - dk(j, i);
  return grad;
}

}  // namespace envar
