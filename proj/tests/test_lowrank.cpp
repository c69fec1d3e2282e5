#include "dppla/lowrank.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace dppla;
using testutil::gaussian;
using testutil::mat;

namespace {

// ||X X_S^+ X_S - X||_F^2 with an independent pseudoinverse.
double reconstruction_oracle(const Matrix& x, const SubsetSample& s) {
  if (s.empty()) return x.squaredNorm();
  const Eigen::MatrixXd xs = select_rows(x, s.span());
  const Eigen::MatrixXd xs_pinv = xs.completeOrthogonalDecomposition().pseudoInverse();
  return (x * xs_pinv * xs - x).squaredNorm();
}

Matrix random_psd_matrix(Index n, Index rank, std::uint64_t seed) {
  const Matrix a = gaussian(n, rank, seed);
  return a * a.transpose();
}

const Matrix kThreeRows = mat(3, 2, {1, 0, 0, 2, 0, 1});

}  // namespace

TEST(ReconstructionError, Examples) {
  EXPECT_NEAR(reconstruction_error(Matrix::Identity(2, 2), SubsetSample({0}, 2)), 1.0, 1e-14);
  EXPECT_NEAR(reconstruction_error(Matrix::Identity(2, 2), SubsetSample({0, 1}, 2)), 0.0, 1e-14);
  EXPECT_NEAR(reconstruction_error(kThreeRows, SubsetSample({1}, 3)), 1.0, 1e-14);
  EXPECT_DOUBLE_EQ(reconstruction_error(kThreeRows, SubsetSample({}, 3)), 6.0);
  EXPECT_THROW(reconstruction_error(kThreeRows, SubsetSample({0}, 4)), DimensionError);
}

TEST(ReconstructionError, MatchesOracleAndShrinksWithGrowth) {
  const Matrix x = gaussian(8, 5, 3);
  for (std::uint64_t m = 0; m < 256; ++m) {
    const auto s = SubsetSample::from_mask(m, 8);
    const double err = reconstruction_error(x, s);
    EXPECT_NEAR(err, reconstruction_oracle(x, s), 1e-9 * x.squaredNorm());
    for (Index j = 0; j < 8; ++j) {
      if (s.contains(j)) continue;
      const auto grown = SubsetSample::from_mask(m | std::uint64_t{1} << j, 8);
      EXPECT_LE(reconstruction_error(x, grown), err + 1e-10);
    }
  }
}

TEST(KdppSize, Rounding) {
  EXPECT_EQ(kdpp_size_for(1, 1.0), 1);
  EXPECT_EQ(kdpp_size_for(2, 0.5), 5);
  EXPECT_EQ(kdpp_size_for(2, 2.0), 2);
  EXPECT_EQ(kdpp_size_for(3, 0.7), 7);  // 3 + 4.2857 - 1
  EXPECT_THROW(kdpp_size_for(0, 1.0), ValidationError);
  EXPECT_THROW(kdpp_size_for(1, 0.0), ValidationError);
}

TEST(CssKdpp, IdentityExample) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto rep = css_kdpp(Matrix::Identity(2, 2), 1, 1.0, seed);
    EXPECT_EQ(rep.subset.size(), 1u);
    EXPECT_NEAR(rep.error, 1.0, 1e-14);
    EXPECT_NEAR(rep.baseline_rank_r_error, 1.0, 1e-14);
    EXPECT_NEAR(rep.ratio, 1.0, 1e-14);
  }
  EXPECT_NEAR(expected_err_exact(Matrix::Identity(2, 2), 1), 1.0, 1e-14);
}

TEST(CssKdpp, ExactRankGivesZeroError) {
  const Matrix x = gaussian(9, 2, 4) * gaussian(2, 5, 5);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto rep = css_kdpp(x, 2, 2.0, seed);  // k = 2 = rank
    EXPECT_LE(rep.error, 1e-10 * x.squaredNorm());
    EXPECT_EQ(rep.ratio, 1.0);
  }
  EXPECT_NEAR(expected_err_exact(x, 2), 0.0, 1e-10 * x.squaredNorm());
}

TEST(CssKdpp, RandomExampleWithinBound) {
  const Matrix x = gaussian(10, 6, 6);
  const double baseline = truncated_svd_error(x, 2, ErrorNorm::frobenius_squared);
  EXPECT_EQ(kdpp_size_for(2, 0.5), 5);
  EXPECT_LE(expected_err_exact(x, 5), 1.5 * baseline);
  const auto rep = css_kdpp(x, 2, 0.5, 7);
  EXPECT_EQ(rep.subset.size(), 5u);
  EXPECT_NEAR(rep.ratio, rep.error / baseline, 1e-12);
}

TEST(CssKdpp, SizeAboveRankSuggestsLargerEps) {
  const Matrix x = gaussian(6, 2, 1);
  try {
    css_kdpp(x, 2, 0.5, 0);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("larger eps"), std::string::npos);
  }
}

TEST(ExpectedErr, ThreeRowExample) {
  // Pr{i} proportional to (1, 4, 1); Er = 5, 1, 1.
  EXPECT_NEAR(expected_err_exact(kThreeRows, 1), (5.0 + 4.0 + 1.0) / 6.0, 1e-13);
  EXPECT_NEAR(expected_err_exact(kThreeRows, 2), 0.0, 1e-13);
}

TEST(ExpectedErr, BoundHoldsOnRandomMatrices) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Index n = 7 + static_cast<Index>(seed % 4);
    const Index d = 5 + static_cast<Index>(seed % 2);
    Matrix x = gaussian(n, d, 300 + seed);
    // Decaying column scales give a nontrivial baseline.
    for (Index j = 0; j < d; ++j) x.col(j) *= std::pow(0.6, static_cast<double>(j));
    for (double eps : {0.5, 1.0, 2.0}) {
      for (Index r : {1, 2}) {
        const Index k = kdpp_size_for(r, eps);
        if (k > d) continue;
        const double bound = (1.0 + eps) * truncated_svd_error(x, r, ErrorNorm::frobenius_squared);
        EXPECT_LE(expected_err_exact(x, k), bound + 1e-8) << "seed " << seed << " eps " << eps << " r " << r;
      }
    }
  }
}

TEST(Nystrom, Examples) {
  const LEnsembleKernel l(mat(2, 2, {2, 0, 0, 1}));
  EXPECT_LE((nystrom(l, SubsetSample({0}, 2)) - mat(2, 2, {2, 0, 0, 0})).norm(), 1e-14);
  const LEnsembleKernel full(random_psd_matrix(5, 5, 2));
  EXPECT_LE((nystrom(full, SubsetSample::full(5)) - full.matrix()).norm(), 1e-9 * full.matrix().norm());
  EXPECT_EQ(nystrom(full, SubsetSample({}, 5)).norm(), 0.0);
}

TEST(Nystrom, RankOneKernelRecoveredFromAnySupport) {
  const Vector v = testutil::gaussian_vector(6, 8);
  const LEnsembleKernel l(Matrix(v * v.transpose()));
  for (std::uint64_t m = 1; m < 64; ++m)
    EXPECT_LE((nystrom(l, SubsetSample::from_mask(m, 6)) - l.matrix()).norm(), 1e-10 * l.matrix().norm());
}

TEST(Nystrom, DominatedByKernelAndTraceIdentity) {
  const LEnsembleKernel l(random_psd_matrix(7, 5, 9));
  const double top = l.eigen().eigenvalues(0);
  for (std::uint64_t m = 0; m < 128; ++m) {
    const auto s = SubsetSample::from_mask(m, 7);
    const Matrix approx = nystrom(l, s);
    const Matrix diff = l.matrix() - approx;
    const Vector ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Eigen::MatrixXd(diff)).eigenvalues();
    EXPECT_GE(ev.minCoeff(), -1e-8 * top);
    const Vector ea = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Eigen::MatrixXd(approx)).eigenvalues();
    EXPECT_GE(ea.minCoeff(), -1e-8 * top);
    EXPECT_NEAR(nystrom_error(l, s), l.matrix().trace() - approx.trace(), 1e-8 * top);
  }
}

TEST(NystromKdpp, DiagonalExample) {
  const LEnsembleKernel l(mat(2, 2, {2, 0, 0, 1}));
  EXPECT_NEAR(expected_nystrom_error_exact(l, 1), 4.0 / 3.0, 1e-14);
  EXPECT_LE(expected_nystrom_error_exact(l, 1), 2.0 * truncated_svd_error(l.matrix(), 1, ErrorNorm::nuclear));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto rep = nystrom_kdpp(l, 1, 1.0, seed);
    EXPECT_NEAR(rep.error, rep.subset.contains(0) ? 1.0 : 2.0, 1e-14);
    EXPECT_NEAR(rep.baseline_rank_r_error, 1.0, 1e-14);
  }
}

TEST(NystromKdpp, ExactRankGivesZero) {
  const LEnsembleKernel l(random_psd_matrix(8, 2, 10));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto rep = nystrom_kdpp(l, 2, 2.0, seed);
    EXPECT_LE(rep.error, 1e-8 * l.matrix().trace());
    EXPECT_EQ(rep.ratio, 1.0);
  }
  EXPECT_THROW(nystrom_kdpp(l, 2, 1.0, 0), ValidationError);
}

TEST(NystromKdpp, BoundHoldsOnRandomKernels) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Matrix a = gaussian(10, 10, 600 + seed);
    for (Index j = 0; j < 10; ++j) a.col(j) *= std::pow(0.7, static_cast<double>(j));
    const LEnsembleKernel l(Matrix(a * a.transpose()));
    for (double eps : {0.5, 1.0, 2.0}) {
      const Index k = kdpp_size_for(2, eps);
      const double bound = (1.0 + eps) * truncated_svd_error(l.matrix(), 2, ErrorNorm::nuclear);
      EXPECT_LE(expected_nystrom_error_exact(l, k), bound + 1e-8) << "seed " << seed << " eps " << eps;
    }
  }
}

TEST(ApproxReport, RatioConventions) {
  EXPECT_EQ(make_approx_report(SubsetSample({}, 1), 0.0, 0.0, 1e-12).ratio, 1.0);
  EXPECT_TRUE(std::isinf(make_approx_report(SubsetSample({}, 1), 1.0, 0.0, 1e-12).ratio));
  EXPECT_DOUBLE_EQ(make_approx_report(SubsetSample({}, 1), 3.0, 2.0, 1e-12).ratio, 1.5);
}
