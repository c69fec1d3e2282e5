#pragma once

// Row subset selection error and Nystrom approximation, with k-DPP samplers
// and enumeration oracles for their expected errors.

#include "dppla/dpp.hpp"

#include <limits>

namespace dppla {

struct SubsetApproxReport {
  SubsetSample subset;
  double error = 0.0;
  double baseline_rank_r_error = 0.0;
  double ratio = 1.0;  // error / baseline; +inf when only the baseline is zero, 1 when both are
};

/// Report for `subset`; values at or below `zero_tol` count as zero when forming the ratio.
inline SubsetApproxReport make_approx_report(SubsetSample subset, double error, double baseline, double zero_tol) {
  SubsetApproxReport r{std::move(subset), error, baseline, 1.0};
  const bool err_zero = error <= zero_tol;
  const bool base_zero = baseline <= zero_tol;
  if (base_zero)
    r.ratio = err_zero ? 1.0 : std::numeric_limits<double>::infinity();
  else
    r.ratio = error / baseline;
  return r;
}

/// k = ceil(r + r/eps - 1).
inline Index kdpp_size_for(Index r, double eps) {
  if (r < 1) throw ValidationError("target rank r must be >= 1");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ValidationError("eps must be positive");
  const double k = static_cast<double>(r) + static_cast<double>(r) / eps - 1.0;
  return static_cast<Index>(std::ceil(k - 1e-9));
}

/// Er(S) = ||X - X X_S^+ X_S||_F^2: residual of projecting every row of X
/// onto the row span of X_S. Er(empty) = ||X||_F^2.
inline double reconstruction_error(const Matrix& x, const SubsetSample& s) {
  if (s.n() != x.rows()) throw DimensionError("reconstruction_error: subset ground set differs from row count");
  if (s.empty()) return x.squaredNorm();
  const Matrix basis = column_basis(Matrix(select_rows(x, s.span()).transpose()));  // d x r
  const Matrix residual = x - (x * basis) * basis.transpose();
  return residual.squaredNorm();
}

namespace detail {

inline void require_kdpp_size(Index k, Index rank, const char* what) {
  if (k > rank)
    throw ValidationError(std::string(what) + ": sample size k = " + std::to_string(k) + " exceeds rank " +
                          std::to_string(rank) + "; use a larger eps");
}

}  // namespace detail

/// S ~ k-DPP_L(X X^T) with k = ceil(r + r/eps - 1), reported against the
/// best rank-r Frobenius error.
template <class URBG>
SubsetApproxReport css_kdpp(const Matrix& x, Index r, double eps, URBG& rng) {
  const Index k = kdpp_size_for(r, eps);
  if (r > std::min(x.rows(), x.cols())) throw ValidationError("css_kdpp: r exceeds min(n, d)");
  const auto l = LEnsembleKernel::from_features(x);
  detail::require_kdpp_size(k, l.rank(), "css_kdpp");
  SubsetSample s = sample_kdpp(l, k, rng);
  const double err = reconstruction_error(x, s);
  return make_approx_report(std::move(s), err, truncated_svd_error(x, r, ErrorNorm::frobenius_squared),
                            1e-12 * x.squaredNorm());
}

inline SubsetApproxReport css_kdpp(const Matrix& x, Index r, double eps, std::uint64_t seed) {
  Rng rng(seed);
  return css_kdpp(x, r, eps, rng);
}

/// E Er(S) under S ~ k-DPP_L(X X^T), by enumeration.
inline double expected_err_exact(const Matrix& x, Index k) {
  detail::require_enumerable(x.rows(), "expected_err_exact");
  const PmfTable pmf = pmf_kdpp(LEnsembleKernel::from_features(x), k);
  double total = 0.0;
  for (std::uint64_t m = 0; m < pmf.size(); ++m)
    if (pmf[m] > 0.0) total += pmf[m] * reconstruction_error(x, SubsetSample::from_mask(m, x.rows()));
  return total;
}

/// L~(S) = L_{:,S} L_SS^+ L_{S,:}; the empty subset gives 0.
inline Matrix nystrom(const LEnsembleKernel& l, const SubsetSample& s) {
  const Index n = l.n();
  if (s.n() != n) throw DimensionError("nystrom: subset ground set differs from kernel size");
  if (s.empty()) return Matrix::Zero(n, n);
  const auto all = SubsetSample::full(n);
  const Matrix c = submatrix(l.matrix(), all.span(), s.span());
  const Matrix approx = c * pinv(principal_submatrix(l.matrix(), s.span())) * c.transpose();
  return 0.5 * (approx + approx.transpose());
}

/// ||L - L~(S)||_* as the sum of absolute eigenvalues of the difference.
inline double nystrom_error(const LEnsembleKernel& l, const SubsetSample& s) {
  const Matrix diff = l.matrix() - nystrom(l, s);
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Eigen::MatrixXd(diff), Eigen::EigenvaluesOnly)
      .eigenvalues()
      .cwiseAbs()
      .sum();
}

template <class URBG>
SubsetApproxReport nystrom_kdpp(const LEnsembleKernel& l, Index r, double eps, URBG& rng) {
  const Index k = kdpp_size_for(r, eps);
  if (r > l.n()) throw ValidationError("nystrom_kdpp: r exceeds n");
  detail::require_kdpp_size(k, l.rank(), "nystrom_kdpp");
  SubsetSample s = sample_kdpp(l, k, rng);
  const double err = nystrom_error(l, s);
  return make_approx_report(std::move(s), err, truncated_svd_error(l.matrix(), r, ErrorNorm::nuclear),
                            1e-12 * std::max(0.0, l.matrix().trace()));
}

inline SubsetApproxReport nystrom_kdpp(const LEnsembleKernel& l, Index r, double eps, std::uint64_t seed) {
  Rng rng(seed);
  return nystrom_kdpp(l, r, eps, rng);
}

/// E ||L - L~(S)||_* under S ~ k-DPP_L(L), by enumeration.
inline double expected_nystrom_error_exact(const LEnsembleKernel& l, Index k) {
  detail::require_enumerable(l.n(), "expected_nystrom_error_exact");
  const PmfTable pmf = pmf_kdpp(l, k);
  double total = 0.0;
  for (std::uint64_t m = 0; m < pmf.size(); ++m)
    if (pmf[m] > 0.0) total += pmf[m] * nystrom_error(l, SubsetSample::from_mask(m, l.n()));
  return total;
}

}  // namespace dppla
