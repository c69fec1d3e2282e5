#pragma once

// Dense linear-algebra substrate shared by every other dppla module.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dppla {

using Index = Eigen::Index;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr const char* kVersion = "0.1.0";

// Error hierarchy. The CLI maps these onto exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionError : Error {
  using Error::Error;
};
struct ValidationError : Error {
  using Error::Error;
};
/// Enumeration oracle asked to go beyond its size cap.
struct SizeError : Error {
  using Error::Error;
};
/// A numerical invariant that should hold by construction did not.
struct DegeneracyError : Error {
  using Error::Error;
};

namespace detail {

inline void require_finite(const auto& a, const char* what) {
  if (!a.allFinite()) throw ValidationError(std::string(what) + ": non-finite entries");
}

inline void require_square(const auto& a, const char* what) {
  if (a.rows() != a.cols())
    throw DimensionError(std::string(what) + ": expected a square matrix, got " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
}

}  // namespace detail

/// Strictly increasing index set S over the ground set {0, ..., n-1}.
class SubsetSample {
 public:
  SubsetSample() = default;

  SubsetSample(std::vector<Index> indices, Index n) : indices_(std::move(indices)), n_(n) {
    if (n_ < 0) throw ValidationError("SubsetSample: negative ground-set size");
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      if (indices_[i] < 0 || indices_[i] >= n_)
        throw ValidationError("SubsetSample: index " + std::to_string(indices_[i]) +
                              " out of range [0, " + std::to_string(n_) + ")");
      if (i > 0 && indices_[i] <= indices_[i - 1])
        throw ValidationError("SubsetSample: indices must be strictly increasing");
    }
  }

  /// Sorts and validates an arbitrary list of distinct indices.
  static SubsetSample from_unsorted(std::vector<Index> indices, Index n) {
    std::sort(indices.begin(), indices.end());
    return SubsetSample(std::move(indices), n);
  }

  static SubsetSample full(Index n) {
    std::vector<Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Index{0});
    return SubsetSample(std::move(all), n);
  }

  /// Bit i of mask selects index i. Requires n <= 63.
  static SubsetSample from_mask(std::uint64_t mask, Index n) {
    std::vector<Index> idx;
    for (Index i = 0; i < n; ++i)
      if (mask >> i & 1u) idx.push_back(i);
    return SubsetSample(std::move(idx), n);
  }

  std::uint64_t mask() const {
    if (n_ > 63) throw SizeError("SubsetSample::mask: ground set too large for a bitmask");
    std::uint64_t m = 0;
    for (Index i : indices_) m |= std::uint64_t{1} << i;
    return m;
  }

  const std::vector<Index>& indices() const noexcept { return indices_; }
  std::span<const Index> span() const noexcept { return indices_; }
  Index n() const noexcept { return n_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  bool contains(Index i) const { return std::binary_search(indices_.begin(), indices_.end(), i); }

  friend bool operator==(const SubsetSample&, const SubsetSample&) = default;

 private:
  std::vector<Index> indices_;
  Index n_ = 0;
};

struct SymmetricEigen {
  Vector eigenvalues;  // descending
  Matrix eigenvectors;  // orthonormal columns, column j pairs with eigenvalues[j]
};

/// Rows of `a` selected by `rows`, all columns.
inline Matrix select_rows(const Matrix& a, std::span<const Index> rows) {
  Matrix out(static_cast<Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = a.row(rows[i]);
  return out;
}

inline Vector select_entries(const Vector& v, std::span<const Index> idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Index>(i)) = v(idx[i]);
  return out;
}

inline Matrix submatrix(const Matrix& a, std::span<const Index> rows, std::span<const Index> cols) {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out(static_cast<Index>(i), static_cast<Index>(j)) = a(rows[i], cols[j]);
  return out;
}

inline Matrix principal_submatrix(const Matrix& a, std::span<const Index> idx) {
  return submatrix(a, idx, idx);
}

/// Symmetric eigendecomposition, eigenvalues sorted descending.
///
/// The input is symmetrized as (A + A^T)/2 first. Eigenvalues with
/// |lambda| < 1e-12 * max|lambda| are clamped to exactly zero.
inline SymmetricEigen eig_sym(const Matrix& a) {
  detail::require_square(a, "eig_sym");
  detail::require_finite(a, "eig_sym");
  const Index n = a.rows();
  SymmetricEigen out;
  if (n == 0) {
    out.eigenvalues.resize(0);
    out.eigenvectors.resize(0, 0);
    return out;
  }
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) throw DegeneracyError("eig_sym: eigensolver did not converge");
  // Eigen returns ascending order.
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  const double scale = out.eigenvalues.cwiseAbs().maxCoeff();
  for (Index i = 0; i < n; ++i)
    if (std::abs(out.eigenvalues(i)) < 1e-12 * scale) out.eigenvalues(i) = 0.0;
  return out;
}

/// Singular values below this are treated as zero by pinv, lstsq and numerical_rank.
inline double singular_value_cutoff(Index rows, Index cols, double sigma_max) {
  return 1e-10 * static_cast<double>(std::max(rows, cols)) * sigma_max;
}

namespace detail {

inline Eigen::BDCSVD<Eigen::MatrixXd> thin_svd(const Matrix& a) {
  return Eigen::BDCSVD<Eigen::MatrixXd>(Eigen::MatrixXd(a), Eigen::ComputeThinU | Eigen::ComputeThinV);
}

inline Index rank_from_singular_values(const Vector& s, Index rows, Index cols) {
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double cut = singular_value_cutoff(rows, cols, s(0));
  Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return r;
}

}  // namespace detail

inline Index numerical_rank(const Matrix& a) {
  detail::require_finite(a, "numerical_rank");
  if (a.size() == 0) return 0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(a)};
  return detail::rank_from_singular_values(svd.singularValues(), a.rows(), a.cols());
}

/// Moore-Penrose pseudoinverse via SVD with cutoff 1e-10 * max(rows, cols) * sigma_max.
inline Matrix pinv(const Matrix& a) {
  detail::require_finite(a, "pinv");
  if (a.size() == 0) return Matrix::Zero(a.cols(), a.rows());
  const auto svd = detail::thin_svd(a);
  const Vector s = svd.singularValues();
  const Index r = detail::rank_from_singular_values(s, a.rows(), a.cols());
  if (r == 0) return Matrix::Zero(a.cols(), a.rows());
  const auto u = svd.matrixU().leftCols(r);
  const auto v = svd.matrixV().leftCols(r);
  return v * s.head(r).cwiseInverse().asDiagonal() * u.transpose();
}

/// det(A[rows, cols]) by LU with partial pivoting on the extracted block.
/// The empty block has determinant 1.
inline double det_submatrix(const Matrix& a, std::span<const Index> rows, std::span<const Index> cols) {
  if (rows.size() != cols.size())
    throw DimensionError("det_submatrix: row and column subsets differ in size (" +
                         std::to_string(rows.size()) + " vs " + std::to_string(cols.size()) + ")");
  for (Index i : rows)
    if (i < 0 || i >= a.rows()) throw DimensionError("det_submatrix: row index out of range");
  for (Index j : cols)
    if (j < 0 || j >= a.cols()) throw DimensionError("det_submatrix: column index out of range");
  const auto k = static_cast<Index>(rows.size());
  if (k == 0) return 1.0;
  if (k == 1) return a(rows[0], cols[0]);
  return Eigen::PartialPivLU<Eigen::MatrixXd>(Eigen::MatrixXd(submatrix(a, rows, cols))).determinant();
}

inline double det_submatrix(const Matrix& a, const SubsetSample& rows, const SubsetSample& cols) {
  return det_submatrix(a, rows.span(), cols.span());
}

/// det(A[S, S]).
inline double principal_minor(const Matrix& a, std::span<const Index> idx) {
  return det_submatrix(a, idx, idx);
}

/// Minimum-norm least-squares solution X^+ y.
inline Vector lstsq(const Matrix& x, const Vector& y) {
  if (x.rows() != y.size())
    throw DimensionError("lstsq: X has " + std::to_string(x.rows()) + " rows but y has length " +
                         std::to_string(y.size()));
  detail::require_finite(y, "lstsq");
  return pinv(x) * y;
}

enum class ErrorNorm { frobenius_squared, nuclear };

/// ||A - A_(r)|| where A_(r) is the best rank-r approximation:
/// sum_{i>r} sigma_i^2 (frobenius_squared) or sum_{i>r} sigma_i (nuclear).
inline double truncated_svd_error(const Matrix& a, Index r, ErrorNorm norm) {
  detail::require_finite(a, "truncated_svd_error");
  if (r < 0 || r > std::min(a.rows(), a.cols()))
    throw ValidationError("truncated_svd_error: rank " + std::to_string(r) + " out of range [0, " +
                          std::to_string(std::min(a.rows(), a.cols())) + "]");
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(a)};
  const Vector s = svd.singularValues();
  const Index tail = s.size() - r;
  if (tail <= 0) return 0.0;
  return norm == ErrorNorm::nuclear ? s.tail(tail).sum() : s.tail(tail).squaredNorm();
}

/// Orthonormal basis for the column span of `a` (n x rank).
inline Matrix column_basis(const Matrix& a) {
  detail::require_finite(a, "column_basis");
  if (a.size() == 0) return Matrix(a.rows(), 0);
  const auto svd = detail::thin_svd(a);
  const Index r = detail::rank_from_singular_values(svd.singularValues(), a.rows(), a.cols());
  return svd.matrixU().leftCols(r);
}

}  // namespace dppla
