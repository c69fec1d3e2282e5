#pragma once

// Leverage scores, ridge leverage scores and the i.i.d. row-sampling
// distributions built from them.

#include "dppla/matrix.hpp"
#include "dppla/random.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace dppla {

enum class ScoreKind { leverage, ridge_leverage, uniform, squared_norm };

struct ScoreVector {
  Vector values;
  ScoreKind kind = ScoreKind::leverage;
};

/// Normalized row-sampling distribution (p_1, ..., p_n).
class SamplingDistribution {
 public:
  explicit SamplingDistribution(Vector probabilities) : p_(std::move(probabilities)) {
    if (p_.size() == 0) throw ValidationError("SamplingDistribution: empty");
    if (!p_.allFinite() || (p_.array() < 0.0).any())
      throw ValidationError("SamplingDistribution: probabilities must be finite and nonnegative");
    if (std::abs(p_.sum() - 1.0) > 1e-12)
      throw ValidationError("SamplingDistribution: probabilities sum to " + std::to_string(p_.sum()));
  }

  const Vector& probabilities() const noexcept { return p_; }
  Index size() const noexcept { return p_.size(); }
  double operator[](Index i) const { return p_(i); }

 private:
  Vector p_;
};

/// l_i = x_i^T (X^T X)^+ x_i, the diagonal of the projection X X^+.
/// Rows outside the numerical column span (e.g. zero rows) get 0.
inline ScoreVector leverage_exact(const Matrix& x) {
  detail::require_finite(x, "leverage_exact");
  ScoreVector out{Vector::Zero(x.rows()), ScoreKind::leverage};
  if (x.size() == 0) return out;
  const Matrix u = column_basis(x);
  out.values = u.rowwise().squaredNorm();
  return out;
}

/// l_i^lambda = x_i^T (X^T X + lambda I)^{-1} x_i.
inline ScoreVector ridge_leverage_exact(const Matrix& x, double lambda) {
  detail::require_finite(x, "ridge_leverage_exact");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ValidationError("ridge_leverage_exact: lambda must be positive, got " + std::to_string(lambda));
  Eigen::MatrixXd gram = Eigen::MatrixXd(x.transpose() * x);
  gram.diagonal().array() += lambda;
  Eigen::LLT<Eigen::MatrixXd> chol(gram);
  const Eigen::MatrixXd z = chol.solve(Eigen::MatrixXd(x.transpose()));  // d x n
  ScoreVector out{Vector(x.rows()), ScoreKind::ridge_leverage};
  for (Index i = 0; i < x.rows(); ++i) out.values(i) = x.row(i).dot(z.col(i));
  return out;
}

/// mu = max_i (n/d) l_i.
inline double coherence(const Matrix& x) {
  if (x.rows() == 0 || x.cols() == 0) throw ValidationError("coherence: empty matrix");
  const auto lev = leverage_exact(x);
  return static_cast<double>(x.rows()) / static_cast<double>(x.cols()) * lev.values.maxCoeff();
}

/// d_lambda = tr(X X^T (X X^T + lambda I)^{-1}) = sum of ridge leverage scores.
inline double effective_dimension(const Matrix& x, double lambda) {
  return ridge_leverage_exact(x, lambda).values.sum();
}

struct LeverageApproxConfig {
  double srht_factor = 4.0;  // sketch rows = ceil(srht_factor * d * log2(max(n, 2)))
  double jl_factor = 8.0;    // Gaussian columns = ceil(jl_factor * log2(max(n, 2)))
  int max_retries = 3;
};

/// In-place unnormalized Walsh-Hadamard transform along the rows of `a`
/// (row count must be a power of two).
inline void fwht_rows(Matrix& a) {
  const Index n = a.rows();
  if (n == 0) return;
  if (!std::has_single_bit(static_cast<std::uint64_t>(n)))
    throw DimensionError("fwht_rows: row count must be a power of two");
  for (Index h = 1; h < n; h *= 2) {
    for (Index i = 0; i < n; i += 2 * h) {
      for (Index j = i; j < i + h; ++j) {
        auto top = a.row(j);
        auto bottom = a.row(j + h);
        for (Index c = 0; c < a.cols(); ++c) {
          const double s = top(c);
          const double t = bottom(c);
          top(c) = s + t;
          bottom(c) = s - t;
        }
      }
    }
  }
}

struct LeverageApproxSizes {
  Index padded_rows;  // next power of two >= n
  Index sketch_rows;  // SRHT rows
  Index jl_columns;   // Gaussian sketch width
};

inline LeverageApproxSizes leverage_approx_sizes(Index n, Index d, const LeverageApproxConfig& cfg = {}) {
  const double log_n = std::log2(static_cast<double>(std::max<Index>(n, 2)));
  LeverageApproxSizes s{};
  s.padded_rows = static_cast<Index>(std::bit_ceil(static_cast<std::uint64_t>(std::max<Index>(n, 1))));
  s.sketch_rows = static_cast<Index>(std::ceil(cfg.srht_factor * static_cast<double>(d) * log_n));
  s.sketch_rows = std::clamp(s.sketch_rows, d, s.padded_rows);
  s.jl_columns = std::max<Index>(1, static_cast<Index>(std::ceil(cfg.jl_factor * log_n)));
  return s;
}

namespace detail {

// One attempt of the two-sketch pipeline; returns false if the SRHT sketch
// came out rank deficient.
template <class URBG>
bool leverage_approx_attempt(const Matrix& x, const LeverageApproxConfig& cfg, URBG& rng, Vector& out) {
  const Index n = x.rows();
  const Index d = x.cols();
  const auto sizes = leverage_approx_sizes(n, d, cfg);

  // SRHT: random signs, Hadamard, uniform row subsample.
  Matrix padded = Matrix::Zero(sizes.padded_rows, d);
  for (Index i = 0; i < n; ++i) padded.row(i) = bernoulli(rng, 0.5) ? x.row(i) : Eigen::RowVectorXd(-x.row(i));
  fwht_rows(padded);
  const auto rows = uniform_subset(rng, sizes.padded_rows, sizes.sketch_rows);
  const Matrix sketch = select_rows(padded, rows) / std::sqrt(static_cast<double>(sizes.sketch_rows));

  const Matrix r_tilde = sketch.transpose() * sketch;
  const auto eig = eig_sym(r_tilde);
  const double top = eig.eigenvalues(0);
  if (!(top > 0.0) || eig.eigenvalues(d - 1) <= 1e-10 * top) return false;
  const Matrix inv_sqrt =
      eig.eigenvectors * eig.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors.transpose();

  // Johnson-Lindenstrauss sketch of X R^{-1/2}.
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix gauss(d, sizes.jl_columns);
  for (Index i = 0; i < gauss.rows(); ++i)
    for (Index j = 0; j < gauss.cols(); ++j) gauss(i, j) = normal(rng);
  const Matrix projected = x * (inv_sqrt * gauss);
  out = projected.rowwise().squaredNorm() / static_cast<double>(sizes.jl_columns);
  return true;
}

}  // namespace detail

/// Fast approximate leverage scores: SRHT sketch for R = X^T X, then a
/// Gaussian sketch of X R^{-1/2} whose squared row norms estimate l_i.
inline ScoreVector leverage_approx(const Matrix& x, std::uint64_t seed, const LeverageApproxConfig& cfg = {}) {
  detail::require_finite(x, "leverage_approx");
  if (x.rows() < x.cols())
    throw ValidationError("leverage_approx: requires n >= d, got " + std::to_string(x.rows()) + "x" +
                          std::to_string(x.cols()));
  if (x.cols() == 0) throw ValidationError("leverage_approx: matrix has no columns");
  ScoreVector out{Vector(x.rows()), ScoreKind::leverage};
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    if (detail::leverage_approx_attempt(x, cfg, rng, out.values)) return out;
  }
  throw DegeneracyError("leverage_approx: sketch rank deficient");
}

enum class SamplingKind { uniform, squared_norm, leverage };

inline std::string to_string(SamplingKind k) {
  switch (k) {
    case SamplingKind::uniform: return "uniform";
    case SamplingKind::squared_norm: return "squared_norm";
    case SamplingKind::leverage: return "leverage";
  }
  return "?";
}

/// Uniform p_i = 1/n, squared norms p_i = ||x_i||^2 / ||X||_F^2, or
/// leverage p_i = l_i / rank(X) (= l_i / d for full column rank).
inline SamplingDistribution sampling_distribution(const Matrix& x, SamplingKind kind) {
  detail::require_finite(x, "sampling_distribution");
  const Index n = x.rows();
  if (n == 0) throw ValidationError("sampling_distribution: no rows");
  switch (kind) {
    case SamplingKind::uniform:
      return SamplingDistribution(Vector::Constant(n, 1.0 / static_cast<double>(n)));
    case SamplingKind::squared_norm: {
      const Vector norms = x.rowwise().squaredNorm();
      const double total = norms.sum();
      if (!(total > 0.0)) throw ValidationError("sampling_distribution: all-zero matrix");
      return SamplingDistribution(norms / total);
    }
    case SamplingKind::leverage: {
      const Vector lev = leverage_exact(x).values;
      const double total = lev.sum();
      if (!(total > 0.0)) throw ValidationError("sampling_distribution: all-zero matrix");
      return SamplingDistribution(lev / total);
    }
  }
  throw ValidationError("sampling_distribution: unknown kind");
}

}  // namespace dppla
