#pragma once

#include <random>

#include "envar/model.hpp"

namespace envar {

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, R diagonal made positive).
Matrix random_orthogonal(int p, std::mt19937_64& rng);

/// Random rotation (det = +1).
Matrix random_rotation(int p, std::mt19937_64& rng);

/// Number of free parameters of a p x p skew-symmetric matrix.
inline int skew_dim(int p) { return p * (p - 1) / 2; }

/// K with K(i,j) = params[k], K(j,i) = -params[k] for i < j in row-major order.
Matrix skew_from_params(const Vector& params, int p);

/// Matrix exponential (scaling and squaring with Pade approximation).
Matrix expm(const Matrix& a);

/// Gradient of f(exp(K)) with respect to the free parameters of skew K,
/// given G = df/dQ at Q = exp(K). Uses the block-triangular identity
///   exp([[K^T, G], [0, K^T]]) = [[., L(K^T, G)], [0, .]]
/// where L(K^T, .) is the adjoint of the Frechet derivative of exp at K.
Vector expm_skew_gradient(const Matrix& k, const Matrix& g);

}  // namespace envar
