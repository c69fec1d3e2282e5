#pragma once

// Least-squares and ridge estimators from i.i.d. and DPP row samples, plus
// enumeration oracles for their exact expectations.

#include "dppla/dpp.hpp"
#include "dppla/scores.hpp"

#include <random>
#include <variant>

namespace dppla {

struct GeneralPositionError : ValidationError {
  using ValidationError::ValidationError;
};

/// min_w ||X w - y||^2 data.
struct RegressionProblem {
  Matrix x;
  Vector y;

  RegressionProblem(Matrix x_, Vector y_) : x(std::move(x_)), y(std::move(y_)) {
    if (x.rows() != y.size())
      throw DimensionError("RegressionProblem: X has " + std::to_string(x.rows()) + " rows, y has " +
                           std::to_string(y.size()) + " entries");
    detail::require_finite(x, "RegressionProblem");
    detail::require_finite(y, "RegressionProblem");
  }

  Index n() const noexcept { return x.rows(); }
  Index d() const noexcept { return x.cols(); }
};

/// y = X w_true + xi, xi ~ N(0, sigma^2 I).
struct NoiseModel {
  Vector w_true;
  double sigma = 0.0;

  NoiseModel(Vector w, double s) : w_true(std::move(w)), sigma(s) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("NoiseModel: sigma must be >= 0");
  }

  template <class URBG>
  RegressionProblem draw(const Matrix& x, URBG& rng) const {
    if (x.cols() != w_true.size()) throw DimensionError("NoiseModel::draw: dimension mismatch");
    std::normal_distribution<double> normal(0.0, sigma);
    Vector y = x * w_true;
    if (sigma > 0.0)
      for (Index i = 0; i < y.size(); ++i) y(i) += normal(rng);
    return RegressionProblem(x, std::move(y));
  }
};

/// L(w) = ||X w - y||^2.
inline double loss(const RegressionProblem& prob, const Vector& w) {
  if (w.size() != prob.d())
    throw DimensionError("loss: w has length " + std::to_string(w.size()) + ", expected " + std::to_string(prob.d()));
  return (prob.x * w - prob.y).squaredNorm();
}

/// (X^T X + lambda I)^{-1} X^T y.
inline Vector ridge_solution(const RegressionProblem& prob, double lambda) {
  if (!(lambda > 0.0)) throw ValidationError("ridge_solution: lambda must be positive");
  Eigen::MatrixXd gram = Eigen::MatrixXd(prob.x.transpose() * prob.x);
  gram.diagonal().array() += lambda;
  return gram.llt().solve(Eigen::VectorXd(prob.x.transpose() * prob.y));
}

/// k = d (ceil(ln d) + ceil(1/eps)) for i.i.d. leverage-score sketches.
inline Index iid_sample_size(Index d, double eps) {
  if (!(eps > 0.0)) throw ValidationError("iid_sample_size: eps must be positive");
  const double log_term = d > 1 ? std::ceil(std::log(static_cast<double>(d))) : 0.0;
  return d * static_cast<Index>(log_term + std::ceil(1.0 / eps));
}

// ---------------------------------------------------------------------------
// i.i.d. row sampling

/// k rows drawn i.i.d. from `dist`, row i rescaled by 1/sqrt(k p_{j_i}).
struct RowSketch {
  std::vector<Index> rows;
  Vector scale;

  Matrix apply(const Matrix& a) const {
    Matrix out(static_cast<Index>(rows.size()), a.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
      out.row(static_cast<Index>(i)) = scale(static_cast<Index>(i)) * a.row(rows[i]);
    return out;
  }
  Vector apply(const Vector& v) const {
    Vector out(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Index>(i)) = scale(static_cast<Index>(i)) * v(rows[i]);
    return out;
  }
};

template <class URBG>
RowSketch iid_row_sketch(const SamplingDistribution& dist, Index k, URBG& rng) {
  if (k < 1) throw ValidationError("iid_row_sketch: k must be >= 1");
  const Vector& p = dist.probabilities();
  std::discrete_distribution<Index> draw(p.data(), p.data() + p.size());
  RowSketch s;
  s.rows.resize(static_cast<std::size_t>(k));
  s.scale.resize(k);
  for (Index i = 0; i < k; ++i) {
    const Index j = draw(rng);
    s.rows[static_cast<std::size_t>(i)] = j;
    s.scale(i) = 1.0 / std::sqrt(static_cast<double>(k) * p(j));
  }
  return s;
}

struct SketchSolution {
  Vector w;
  std::vector<Index> rows;
  bool rank_deficient = false;  // sketched X had rank < d; w is the minimum-norm solution
};

/// Sketch-and-solve estimator X~^+ y~ from k i.i.d. rows.
template <class URBG>
SketchSolution iid_sketch_solve(const RegressionProblem& prob, const SamplingDistribution& dist, Index k, URBG& rng) {
  if (dist.size() != prob.n()) throw DimensionError("iid_sketch_solve: distribution length differs from n");
  RowSketch sketch = iid_row_sketch(dist, k, rng);
  const Matrix xs = sketch.apply(prob.x);
  SketchSolution out;
  out.w = lstsq(xs, sketch.apply(prob.y));
  out.rank_deficient = numerical_rank(xs) < prob.d();
  out.rows = std::move(sketch.rows);
  return out;
}

inline SketchSolution iid_sketch_solve(const RegressionProblem& prob, const SamplingDistribution& dist, Index k,
                                       std::uint64_t seed) {
  Rng rng(seed);
  return iid_sketch_solve(prob, dist, k, rng);
}

// ---------------------------------------------------------------------------
// DPP estimators

/// X_S^{-1} y_S with S ~ d-DPP_L(X X^T). The projection basis is built once,
/// so repeated draws cost O(n d^2) each.
class ProjectionDppEstimator {
 public:
  explicit ProjectionDppEstimator(RegressionProblem prob)
      : prob_(std::move(prob)), basis_(ProjectionBasis::from_column_span(prob_.x)) {
    if (prob_.n() < prob_.d()) throw ValidationError("projection_dpp_lsq: requires n >= d");
    if (basis_.k() != prob_.d())
      throw ValidationError("projection_dpp_lsq: X is rank deficient (rank " + std::to_string(basis_.k()) + " < d = " +
                            std::to_string(prob_.d()) + ")");
  }

  Vector solve_subset(const SubsetSample& s) const {
    const Matrix xs = select_rows(prob_.x, s.span());
    return Eigen::PartialPivLU<Eigen::MatrixXd>(Eigen::MatrixXd(xs)).solve(select_entries(prob_.y, s.span()));
  }

  template <class URBG>
  Vector sample(URBG& rng) const {
    return solve_subset(sample_projection_dpp(basis_, rng));
  }

  const RegressionProblem& problem() const noexcept { return prob_; }

 private:
  RegressionProblem prob_;
  ProjectionBasis basis_;
};

inline Vector projection_dpp_lsq(const RegressionProblem& prob, std::uint64_t seed) {
  Rng rng(seed);
  return ProjectionDppEstimator(prob).sample(rng);
}

/// X_S^+ y_S with S ~ DPP_L(X X^T / lambda); the empty sample gives 0.
class LEnsembleRidgeEstimator {
 public:
  LEnsembleRidgeEstimator(RegressionProblem prob, double lambda)
      : prob_(std::move(prob)), kernel_(make_kernel(prob_, lambda)) {}

  Vector solve_subset(const SubsetSample& s) const {
    if (s.empty()) return Vector::Zero(prob_.d());
    return pinv(select_rows(prob_.x, s.span())) * select_entries(prob_.y, s.span());
  }

  template <class URBG>
  Vector sample(URBG& rng) const {
    return solve_subset(sample_lensemble(kernel_, rng));
  }

  const LEnsembleKernel& kernel() const noexcept { return kernel_; }

 private:
  static LEnsembleKernel make_kernel(const RegressionProblem& prob, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw ValidationError("lensemble_ridge: lambda must be positive");
    return LEnsembleKernel::from_features(prob.x, 1.0 / lambda);
  }

  RegressionProblem prob_;
  LEnsembleKernel kernel_;
};

inline Vector lensemble_ridge(const RegressionProblem& prob, double lambda, std::uint64_t seed) {
  Rng rng(seed);
  return LEnsembleRidgeEstimator(prob, lambda).sample(rng);
}

// ---------------------------------------------------------------------------
// Enumeration oracles

struct ProjectionDppLaw {};
struct LEnsembleLaw {
  double lambda;
};
using EstimatorLaw = std::variant<ProjectionDppLaw, LEnsembleLaw>;

/// |det(X_S)| > 1e-10 prod_{i in S} ||x_i|| for a d-row subset S.
inline bool rows_nondegenerate(const Matrix& x, std::span<const Index> s) {
  double bound = 1.0;
  for (Index i : s) bound *= x.row(i).norm();
  const double det = Eigen::PartialPivLU<Eigen::MatrixXd>(Eigen::MatrixXd(select_rows(x, s))).determinant();
  return bound > 0.0 && std::abs(det) > 1e-10 * bound;
}

/// Every d-row subset non-degenerate: exhaustive for n <= 12, otherwise
/// 100 random subsets at a fixed seed (a probabilistic check).
inline bool rows_in_general_position(const Matrix& x) {
  const Index n = x.rows();
  const Index d = x.cols();
  if (n < d) return false;
  if (n <= 12) {
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m)
      if (std::popcount(m) == d && !rows_nondegenerate(x, detail::mask_indices(m))) return false;
    return true;
  }
  Rng rng(0x6e657261);
  for (int trial = 0; trial < 100; ++trial)
    if (!rows_nondegenerate(x, uniform_subset(rng, n, d))) return false;
  return true;
}

namespace detail {

inline LEnsembleKernel features_kernel(const Matrix& x, double scale) {
  require_enumerable(x.rows(), "enumeration oracle");
  return LEnsembleKernel::from_features(x, scale);
}

inline PmfTable projection_pmf(const Matrix& x) {
  if (x.rows() < x.cols()) throw ValidationError("projection law: requires n >= d");
  const auto l = features_kernel(x, 1.0);
  if (l.rank() != x.cols()) throw ValidationError("projection law: X must have full column rank");
  return pmf_kdpp(l, x.cols());
}

inline void require_general_position(const Matrix& x, const char* what) {
  if (!rows_in_general_position(x))
    throw GeneralPositionError(std::string(what) + ": rows of X are not in general position");
}

}  // namespace detail

/// E[estimator(S)] by summing over every subset with its exact probability.
inline Vector expected_estimator_exact(const RegressionProblem& prob, const EstimatorLaw& law) {
  detail::require_enumerable(prob.n(), "expected_estimator_exact");
  Vector mean = Vector::Zero(prob.d());
  if (std::holds_alternative<ProjectionDppLaw>(law)) {
    const PmfTable pmf = detail::projection_pmf(prob.x);
    for (std::uint64_t m = 0; m < pmf.size(); ++m) {
      if (pmf[m] == 0.0) continue;
      const auto s = detail::mask_indices(m);
      mean += pmf[m] * Eigen::PartialPivLU<Eigen::MatrixXd>(Eigen::MatrixXd(select_rows(prob.x, s)))
                           .solve(select_entries(prob.y, s));
    }
  } else {
    const double lambda = std::get<LEnsembleLaw>(law).lambda;
    if (!(lambda > 0.0)) throw ValidationError("expected_estimator_exact: lambda must be positive");
    const PmfTable pmf = pmf_lensemble(detail::features_kernel(prob.x, 1.0 / lambda));
    for (std::uint64_t m = 1; m < pmf.size(); ++m) {
      if (pmf[m] == 0.0) continue;
      const auto s = detail::mask_indices(m);
      mean += pmf[m] * (pinv(select_rows(prob.x, s)) * select_entries(prob.y, s));
    }
  }
  return mean;
}

/// E L(X_S^{-1} y_S) under S ~ d-DPP_L(X X^T); equals (d+1) L(w*).
inline double expected_loss_exact(const RegressionProblem& prob) {
  detail::require_enumerable(prob.n(), "expected_loss_exact");
  detail::require_general_position(prob.x, "expected_loss_exact");
  const PmfTable pmf = detail::projection_pmf(prob.x);
  double total = 0.0;
  for (std::uint64_t m = 0; m < pmf.size(); ++m) {
    if (pmf[m] == 0.0) continue;
    const auto s = detail::mask_indices(m);
    if (!rows_nondegenerate(prob.x, s))
      throw GeneralPositionError("expected_loss_exact: degenerate subset with nonzero probability");
    const Vector w = Eigen::PartialPivLU<Eigen::MatrixXd>(Eigen::MatrixXd(select_rows(prob.x, s)))
                         .solve(select_entries(prob.y, s));
    total += pmf[m] * loss(prob, w);
  }
  return total;
}

/// E ||X_S^{-1} y_S - w_true||^2 with the noise integrated analytically:
/// sigma^2 sum_S Pr{S} tr((X_S^T X_S)^{-1}). Equals (n-d+1) sigma^2 tr((X^T X)^{-1}).
inline double expected_mse_exact(const Matrix& x, const NoiseModel& noise) {
  detail::require_enumerable(x.rows(), "expected_mse_exact");
  if (noise.w_true.size() != x.cols()) throw DimensionError("expected_mse_exact: w_true length differs from d");
  detail::require_general_position(x, "expected_mse_exact");
  const PmfTable pmf = detail::projection_pmf(x);
  double total = 0.0;
  for (std::uint64_t m = 0; m < pmf.size(); ++m) {
    if (pmf[m] == 0.0) continue;
    const auto s = detail::mask_indices(m);
    if (!rows_nondegenerate(x, s))
      throw GeneralPositionError("expected_mse_exact: degenerate subset with nonzero probability");
    const Eigen::MatrixXd xs = select_rows(x, s);
    total += pmf[m] * (xs.transpose() * xs).inverse().trace();
  }
  return noise.sigma * noise.sigma * total;
}

// ---------------------------------------------------------------------------
// Subspace embedding

/// Extreme eigenvalues of Q^T S^T S Q, Q an orthonormal basis of range(X),
/// given the already-sketched rows S X.
inline std::pair<double, double> subspace_embedding_distortion(const Matrix& x, const Matrix& sketched) {
  if (sketched.cols() != x.cols()) throw DimensionError("subspace_embedding_check: SX and X differ in column count");
  if (numerical_rank(x) < x.cols()) throw ValidationError("subspace_embedding_check: X must have full column rank");
  // X = Q R, so S Q = (S X) R^{-1}.
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr{Eigen::MatrixXd(x)};
  const Eigen::MatrixXd r = qr.matrixQR().topRows(x.cols()).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd sq =
      r.transpose().triangularView<Eigen::Lower>().solve(Eigen::MatrixXd(sketched.transpose())).transpose();
  const Vector eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sq.transpose() * sq, Eigen::EigenvaluesOnly)
                         .eigenvalues();
  return {eig.minCoeff(), eig.maxCoeff()};
}

/// True iff S is a (1 +- eps) subspace embedding for range(X), up to 1e-10 rounding slack.
inline bool subspace_embedding_check(const Matrix& x, const Matrix& sketched, double eps) {
  if (!(eps >= 0.0)) throw ValidationError("subspace_embedding_check: eps must be nonnegative");
  const auto [lo, hi] = subspace_embedding_distortion(x, sketched);
  return lo >= 1.0 - eps - 1e-10 && hi <= 1.0 + eps + 1e-10;
}

}  // namespace dppla
