#pragma once

// Determinantal point processes over the ground set {0, ..., n-1}:
// kernels, exhaustive pmf tables, and exact samplers.

#include "dppla/matrix.hpp"
#include "dppla/random.hpp"

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

namespace dppla {

/// Largest ground set the enumeration oracles accept.
inline constexpr Index kMaxEnumerationSize = 20;

namespace detail {

inline void require_symmetric(const Matrix& a, const char* what) {
  require_square(a, what);
  require_finite(a, what);
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale)
    throw ValidationError(std::string(what) + ": kernel is not symmetric (max |A - A^T| = " +
                          std::to_string(asym) + ")");
}

inline Index count_above(const Vector& v, double cut) {
  Index r = 0;
  for (Index i = 0; i < v.size(); ++i)
    if (v(i) > cut) ++r;
  return r;
}

}  // namespace detail

/// Marginal kernel K of DPP(K): symmetric with spectrum in [0, 1].
class CorrelationKernel {
 public:
  explicit CorrelationKernel(const Matrix& k) {
    detail::require_symmetric(k, "CorrelationKernel");
    k_ = 0.5 * (k + k.transpose());
    eig_ = eig_sym(k_);
    for (Index i = 0; i < eig_.eigenvalues.size(); ++i) {
      double& lam = eig_.eigenvalues(i);
      if (lam < -1e-10 || lam > 1.0 + 1e-10)
        throw ValidationError("CorrelationKernel: eigenvalue " + std::to_string(lam) + " outside [0, 1]");
      lam = std::clamp(lam, 0.0, 1.0);
    }
  }

  const Matrix& matrix() const noexcept { return k_; }
  const SymmetricEigen& eigen() const noexcept { return eig_; }
  Index n() const noexcept { return k_.rows(); }

 private:
  Matrix k_;
  SymmetricEigen eig_;
};

/// PSD kernel L of the L-ensemble DPP_L(L): Pr{S} = det(L_SS) / det(I + L).
class LEnsembleKernel {
 public:
  explicit LEnsembleKernel(const Matrix& l) {
    detail::require_symmetric(l, "LEnsembleKernel");
    l_ = 0.5 * (l + l.transpose());
    eig_ = eig_sym(l_);
    const double top = eig_.eigenvalues.size() ? std::max(0.0, eig_.eigenvalues(0)) : 0.0;
    for (Index i = 0; i < eig_.eigenvalues.size(); ++i) {
      double& lam = eig_.eigenvalues(i);
      if (lam < -1e-10 * top)
        throw ValidationError("LEnsembleKernel: kernel is not PSD (eigenvalue " + std::to_string(lam) + ")");
      if (lam <= 1e-10 * top) lam = 0.0;
    }
  }

  /// L = X X^T.
  static LEnsembleKernel from_features(const Matrix& x, double scale = 1.0) {
    return LEnsembleKernel(Matrix(scale * (x * x.transpose())));
  }

  const Matrix& matrix() const noexcept { return l_; }
  const SymmetricEigen& eigen() const noexcept { return eig_; }
  Index n() const noexcept { return l_.rows(); }
  /// Number of eigenvalues above 1e-10 * lambda_max.
  Index rank() const { return detail::count_above(eig_.eigenvalues, 0.0); }

 private:
  Matrix l_;
  SymmetricEigen eig_;
};

/// n x k matrix with orthonormal columns; DPP(U U^T) is a Projection DPP.
class ProjectionBasis {
 public:
  explicit ProjectionBasis(Matrix u) : u_(std::move(u)) {
    detail::require_finite(u_, "ProjectionBasis");
    const Matrix gram = u_.transpose() * u_;
    const double err = (gram - Matrix::Identity(u_.cols(), u_.cols())).norm();
    if (err > 1e-8)
      throw ValidationError("ProjectionBasis: columns are not orthonormal (||U^T U - I||_F = " +
                            std::to_string(err) + ")");
  }

  /// Orthonormal basis of the column span of X; DPP(XX^+) = d-DPP_L(XX^T) for rank d.
  static ProjectionBasis from_column_span(const Matrix& x) { return ProjectionBasis(column_basis(x)); }

  const Matrix& matrix() const noexcept { return u_; }
  Index n() const noexcept { return u_.rows(); }
  Index k() const noexcept { return u_.cols(); }
  /// Marginals Pr{i in S} = ||v_i||^2.
  Vector marginals() const { return u_.rowwise().squaredNorm(); }

 private:
  Matrix u_;
};

/// Exhaustive pmf over all 2^n subsets, indexed by bitmask.
class PmfTable {
 public:
  PmfTable(Index n, std::vector<double> probabilities) : n_(n), p_(std::move(probabilities)) {
    if (n_ < 0 || n_ > kMaxEnumerationSize) throw SizeError("PmfTable: ground set size out of range");
    if (p_.size() != (std::size_t{1} << n_)) throw DimensionError("PmfTable: expected 2^n entries");
  }

  Index n() const noexcept { return n_; }
  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::uint64_t mask) const { return p_[mask]; }
  double probability(const SubsetSample& s) const { return p_[s.mask()]; }
  const std::vector<double>& probabilities() const noexcept { return p_; }

  double total() const {
    double t = 0.0;
    for (double v : p_) t += v;
    return t;
  }

  double expected_size() const {
    double e = 0.0;
    for (std::size_t m = 0; m < p_.size(); ++m) e += p_[m] * std::popcount(m);
    return e;
  }

  /// Throws unless probabilities are nonnegative and sum to 1 within 1e-10.
  void validate() const {
    for (double v : p_)
      if (!(v >= 0.0)) throw ValidationError("PmfTable: negative or NaN probability");
    if (std::abs(total() - 1.0) > 1e-10)
      throw ValidationError("PmfTable: probabilities sum to " + std::to_string(total()));
  }

 private:
  Index n_;
  std::vector<double> p_;
};

namespace detail {

inline void require_enumerable(Index n, const char* what) {
  if (n > kMaxEnumerationSize)
    throw SizeError(std::string(what) + ": n = " + std::to_string(n) + " exceeds enumeration cap " +
                    std::to_string(kMaxEnumerationSize));
}

inline std::vector<Index> mask_indices(std::uint64_t mask) {
  std::vector<Index> idx;
  while (mask) {
    idx.push_back(std::countr_zero(mask));
    mask &= mask - 1;
  }
  return idx;
}

}  // namespace detail

/// K = L (I + L)^{-1}, computed in the shared eigenbasis.
inline CorrelationKernel marginal_kernel_from_lensemble(const LEnsembleKernel& l) {
  const auto& e = l.eigen();
  const Vector lam = e.eigenvalues.array() / (1.0 + e.eigenvalues.array());
  return CorrelationKernel(Matrix(e.eigenvectors * lam.asDiagonal() * e.eigenvectors.transpose()));
}

/// Sum over all subsets S of det(L_SS); equals det(I + L).
inline double lensemble_normalizer_enumerated(const Matrix& l) {
  detail::require_enumerable(l.rows(), "lensemble_normalizer_enumerated");
  double total = 0.0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << l.rows()); ++m) total += principal_minor(l, detail::mask_indices(m));
  return total;
}

/// Pr{S} = det(L_SS) / det(I + L) for every S. Tiny negative minors from
/// rounding are clamped to 0.
inline PmfTable pmf_lensemble(const LEnsembleKernel& l) {
  const Index n = l.n();
  detail::require_enumerable(n, "pmf_lensemble");
  const double z = (Matrix::Identity(n, n) + l.matrix()).determinant();
  std::vector<double> p(std::size_t{1} << n);
  for (std::uint64_t m = 0; m < p.size(); ++m)
    p[m] = std::max(0.0, principal_minor(l.matrix(), detail::mask_indices(m))) / z;
  return PmfTable(n, std::move(p));
}

/// k-DPP_L(L): Pr{S} proportional to det(L_SS) over |S| = k.
inline PmfTable pmf_kdpp(const LEnsembleKernel& l, Index k) {
  const Index n = l.n();
  detail::require_enumerable(n, "pmf_kdpp");
  if (k < 0 || k > n) throw ValidationError("pmf_kdpp: k out of range");
  std::vector<double> p(std::size_t{1} << n, 0.0);
  double total = 0.0;
  for (std::uint64_t m = 0; m < p.size(); ++m) {
    if (std::popcount(m) != k) continue;
    p[m] = std::max(0.0, principal_minor(l.matrix(), detail::mask_indices(m)));
    total += p[m];
  }
  const double scale = l.eigen().eigenvalues.size() ? std::max(1.0, l.eigen().eigenvalues(0)) : 1.0;
  if (!(total > 1e-12 * std::pow(scale, static_cast<double>(k))))
    throw DegeneracyError("pmf_kdpp: degenerate constraint, every size-" + std::to_string(k) +
                          " principal minor is zero");
  for (double& v : p) v /= total;
  return PmfTable(n, std::move(p));
}

/// DPP(K) pmf: Pr{S} = |det(K - I_{complement of S})|.
inline PmfTable pmf_dpp(const CorrelationKernel& k) {
  const Index n = k.n();
  detail::require_enumerable(n, "pmf_dpp");
  std::vector<double> p(std::size_t{1} << n);
  for (std::uint64_t m = 0; m < p.size(); ++m) {
    Matrix a = k.matrix();
    for (Index i = 0; i < n; ++i)
      if (!(m >> i & 1u)) a(i, i) -= 1.0;
    p[m] = n == 0 ? 1.0 : std::abs(Eigen::PartialPivLU<Eigen::MatrixXd>(Eigen::MatrixXd(a)).determinant());
  }
  return PmfTable(n, std::move(p));
}

/// Pr{i in S} for each i.
inline Vector marginals_from_pmf(const PmfTable& pmf) {
  Vector out = Vector::Zero(pmf.n());
  for (std::uint64_t m = 0; m < pmf.size(); ++m) {
    if (pmf[m] == 0.0) continue;
    for (Index i : detail::mask_indices(m)) out(i) += pmf[m];
  }
  return out;
}

/// e_0..e_kmax of `eigs` via e_k(l_1..l_m) = e_k(l_1..l_{m-1}) + l_m e_{k-1}(l_1..l_{m-1}).
inline Vector elementary_symmetric(const Vector& eigs, Index kmax) {
  if (kmax < 0) throw ValidationError("elementary_symmetric: kmax must be nonnegative");
  if ((eigs.array() < 0.0).any()) throw ValidationError("elementary_symmetric: negative eigenvalue");
  Vector e = Vector::Zero(kmax + 1);
  e(0) = 1.0;
  for (Index m = 0; m < eigs.size(); ++m)
    for (Index k = std::min<Index>(kmax, m + 1); k >= 1; --k) e(k) += eigs(m) * e(k - 1);
  return e;
}

/// Exact Projection DPP sampler: pick i with Pr proportional to ||v_i||^2,
/// project every row onto the complement of v_i, repeat k times. O(n k^2).
template <class URBG>
SubsetSample sample_projection_dpp(const ProjectionBasis& basis, URBG& rng) {
  const Index n = basis.n();
  const Index k = basis.k();
  Matrix v = basis.matrix();
  Vector norms = v.rowwise().squaredNorm();
  std::vector<Index> picked;
  picked.reserve(static_cast<std::size_t>(k));
  for (Index step = 0; step < k; ++step) {
    const double remaining = static_cast<double>(k - step);
    const double total = norms.sum();
    if (norms.maxCoeff() < 1e-12 || remaining - total > 1e-6)
      throw DegeneracyError("sample_projection_dpp: residual mass " + std::to_string(total) + " after " +
                            std::to_string(step) + " of " + std::to_string(k) + " picks");
    const Index i = draw_categorical(rng, norms, total);
    picked.push_back(i);
    const Eigen::RowVectorXd dir = v.row(i) / v.row(i).norm();
    v -= (v * dir.transpose()) * dir;
    norms = v.rowwise().squaredNorm();
    norms(i) = 0.0;
  }
  return SubsetSample::from_unsorted(std::move(picked), n);
}

inline SubsetSample sample_projection_dpp(const ProjectionBasis& basis, std::uint64_t seed) {
  Rng rng(seed);
  return sample_projection_dpp(basis, rng);
}

/// Mixture step of the spectral sampler: keep eigenvector i with
/// probability lambda_i, consuming eigenvalues in descending order.
template <class URBG>
ProjectionBasis mixture_decompose(const CorrelationKernel& k, URBG& rng) {
  const auto& e = k.eigen();
  std::vector<Index> keep;
  for (Index i = 0; i < e.eigenvalues.size(); ++i)
    if (bernoulli(rng, e.eigenvalues(i))) keep.push_back(i);
  Matrix u(k.n(), static_cast<Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) u.col(static_cast<Index>(j)) = e.eigenvectors.col(keep[j]);
  return ProjectionBasis(std::move(u));
}

inline ProjectionBasis mixture_decompose(const CorrelationKernel& k, std::uint64_t seed) {
  Rng rng(seed);
  return mixture_decompose(k, rng);
}

/// S ~ DPP(K) via mixture decomposition and the projection sampler.
template <class URBG>
SubsetSample sample_dpp(const CorrelationKernel& k, URBG& rng) {
  return sample_projection_dpp(mixture_decompose(k, rng), rng);
}

/// S ~ DPP_L(L). Reuses the eigendecomposition of L: lambda_K = lambda_L / (1 + lambda_L).
template <class URBG>
SubsetSample sample_lensemble(const LEnsembleKernel& l, URBG& rng) {
  const auto& e = l.eigen();
  std::vector<Index> keep;
  for (Index i = 0; i < e.eigenvalues.size(); ++i) {
    const double lam = e.eigenvalues(i);
    if (bernoulli(rng, lam / (1.0 + lam))) keep.push_back(i);
  }
  Matrix u(l.n(), static_cast<Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) u.col(static_cast<Index>(j)) = e.eigenvectors.col(keep[j]);
  return sample_projection_dpp(ProjectionBasis(std::move(u)), rng);
}

inline SubsetSample sample_lensemble(const LEnsembleKernel& l, std::uint64_t seed) {
  Rng rng(seed);
  return sample_lensemble(l, rng);
}

/// S ~ k-DPP_L(L): choose k eigenvectors with Pr(E) proportional to
/// prod_{i in E} lambda_i (backward pass over the e_k recursion), then run
/// the projection sampler on them.
template <class URBG>
SubsetSample sample_kdpp(const LEnsembleKernel& l, Index k, URBG& rng) {
  const auto& e = l.eigen();
  const Index rank = l.rank();
  if (k < 0 || k > rank)
    throw ValidationError("sample_kdpp: k = " + std::to_string(k) + " exceeds rank(L) = " + std::to_string(rank));
  if (k == 0) return SubsetSample({}, l.n());

  // Only the positive eigenvalues matter; rescale so the table stays O(1).
  const Vector lam = e.eigenvalues.head(rank) / e.eigenvalues(0);
  // table(j, m) = e_j(lam_0 .. lam_{m-1})
  Matrix table = Matrix::Zero(k + 1, rank + 1);
  table.row(0).setOnes();
  for (Index m = 1; m <= rank; ++m)
    for (Index j = 1; j <= k; ++j) table(j, m) = table(j, m - 1) + lam(m - 1) * table(j - 1, m - 1);

  std::vector<Index> chosen;
  Index need = k;
  for (Index m = rank; m >= 1 && need > 0; --m) {
    const double p = need == m ? 1.0 : lam(m - 1) * table(need - 1, m - 1) / table(need, m);
    if (bernoulli(rng, p)) {
      chosen.push_back(m - 1);
      --need;
    }
  }
  Matrix u(l.n(), k);
  for (Index j = 0; j < k; ++j) u.col(j) = e.eigenvectors.col(chosen[static_cast<std::size_t>(j)]);
  return sample_projection_dpp(ProjectionBasis(std::move(u)), rng);
}

inline SubsetSample sample_kdpp(const LEnsembleKernel& l, Index k, std::uint64_t seed) {
  Rng rng(seed);
  return sample_kdpp(l, k, rng);
}

/// Histogram of sampled subsets over a small ground set, for comparing
/// samplers against enumeration pmfs.
class SubsetHistogram {
 public:
  explicit SubsetHistogram(Index n) : n_(n) {
    detail::require_enumerable(n, "SubsetHistogram");
    counts_.assign(std::size_t{1} << n, 0);
  }

  void add(const SubsetSample& s) {
    ++counts_[s.mask()];
    ++total_;
  }

  std::uint64_t total() const noexcept { return total_; }
  std::uint64_t count(std::uint64_t mask) const { return counts_[mask]; }
  double frequency(std::uint64_t mask) const {
    return total_ ? static_cast<double>(counts_[mask]) / static_cast<double>(total_) : 0.0;
  }

  /// Total variation distance 1/2 sum |empirical - pmf|.
  double total_variation(const PmfTable& pmf) const {
    if (pmf.n() != n_) throw DimensionError("SubsetHistogram::total_variation: ground sets differ");
    double tv = 0.0;
    for (std::size_t m = 0; m < counts_.size(); ++m) tv += std::abs(frequency(m) - pmf[m]);
    return 0.5 * tv;
  }

 private:
  Index n_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

}  // namespace dppla
