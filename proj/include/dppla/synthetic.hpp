#pragma once

// Random instances for benchmarks and oracle checks.

#include "dppla/estimators.hpp"
#include "dppla/random.hpp"

namespace dppla {

template <class URBG>
Matrix gaussian_matrix(Index rows, Index cols, URBG& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = normal(rng);
  return a;
}

/// n x k matrix with orthonormal columns spanning a Gaussian random subspace.
template <class URBG>
Matrix random_orthonormal(Index n, Index k, URBG& rng) {
  const Eigen::MatrixXd g = gaussian_matrix(n, k, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return Matrix(qr.householderQ() * Eigen::MatrixXd::Identity(n, k));
}

/// PSD n x n matrix A A^T with A Gaussian n x rank, times `scale`.
template <class URBG>
Matrix random_psd(Index n, Index rank, URBG& rng, double scale = 1.0) {
  const Matrix a = gaussian_matrix(n, rank, rng);
  return scale * (a * a.transpose());
}

/// Symmetric K = Q diag(lambda) Q^T with lambda_i ~ U[0, 1].
template <class URBG>
Matrix random_correlation_kernel(Index n, URBG& rng) {
  const Matrix q = random_orthonormal(n, n, rng);
  Vector lambda(n);
  for (Index i = 0; i < n; ++i) lambda(i) = uniform01(rng);
  const Matrix k = q * lambda.asDiagonal() * q.transpose();
  return 0.5 * (k + k.transpose());
}

struct SyntheticRegression {
  RegressionProblem problem;
  Vector w_true;
};

/// Gaussian X with optional planted coherence (row 0 multiplied by
/// `coherence_factor`), y = X w~ + N(0, sigma^2 I), w~ Gaussian.
template <class URBG>
SyntheticRegression synthetic_regression(Index n, Index d, double sigma, double coherence_factor, URBG& rng) {
  if (n < 1 || d < 1) throw ValidationError("synthetic_regression: n and d must be positive");
  if (!(coherence_factor > 0.0)) throw ValidationError("synthetic_regression: coherence factor must be positive");
  Matrix x = gaussian_matrix(n, d, rng);
  x.row(0) *= coherence_factor;
  Vector w = gaussian_matrix(d, 1, rng).col(0);
  NoiseModel noise(w, sigma);
  return {noise.draw(x, rng), std::move(w)};
}

}  // namespace dppla
