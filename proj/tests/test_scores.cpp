#include "dppla/dpp.hpp"
#include "dppla/scores.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace dppla;
using testutil::gaussian;
using testutil::mat;

namespace {

// Direct formula x_i^T (X^T X)^{-1} x_i for full column rank X.
Vector leverage_by_normal_equations(const Matrix& x) {
  const Matrix inv = (x.transpose() * x).inverse();
  Vector out(x.rows());
  for (Index i = 0; i < x.rows(); ++i) out(i) = x.row(i) * inv * x.row(i).transpose();
  return out;
}

const Matrix kThreeByTwo = mat(3, 2, {1, 0, 0, 1, 1, 1});

}  // namespace

TEST(LeverageExact, OrthonormalRowsWithZeroRow) {
  const Vector l = leverage_exact(mat(3, 2, {1, 0, 0, 1, 0, 0})).values;
  EXPECT_NEAR(l(0), 1.0, 1e-14);
  EXPECT_NEAR(l(1), 1.0, 1e-14);
  EXPECT_NEAR(l(2), 0.0, 1e-14);
}

TEST(LeverageExact, ThreeByTwoExample) {
  const Vector l = leverage_exact(kThreeByTwo).values;
  for (Index i = 0; i < 3; ++i) EXPECT_NEAR(l(i), 2.0 / 3.0, 1e-14);
  EXPECT_LE((l - leverage_by_normal_equations(kThreeByTwo)).norm(), 1e-14);
}

TEST(LeverageExact, OrthonormalColumnsGiveSquaredRowNorms) {
  const Matrix u = column_basis(gaussian(12, 4, 5));
  EXPECT_LE((leverage_exact(u).values - u.rowwise().squaredNorm()).norm(), 1e-12);
}

TEST(LeverageExact, SumsToRankAndLiesInUnitInterval) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Matrix x = gaussian(15, 5, seed);
    if (seed % 3 == 0) x.col(4) = x.col(0) + x.col(1);
    const Vector l = leverage_exact(x).values;
    EXPECT_NEAR(l.sum(), static_cast<double>(numerical_rank(x)), 1e-8);
    EXPECT_GE(l.minCoeff(), -1e-14);
    EXPECT_LE(l.maxCoeff(), 1.0 + 1e-12);
  }
}

TEST(LeverageExact, InvariantUnderInvertibleRightTransform) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix x = gaussian(20, 4, seed);
    const Matrix a = gaussian(4, 4, 1000 + seed) + 3.0 * Matrix::Identity(4, 4);
    EXPECT_LE((leverage_exact(x * a).values - leverage_exact(x).values).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(RidgeLeverage, ColumnOfOnesMatchesDppMarginals) {
  const Matrix x = mat(2, 1, {1, 1});
  const Vector r = ridge_leverage_exact(x, 1.0).values;
  EXPECT_NEAR(r(0), 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(r(1), 1.0 / 3.0, 1e-14);
  const Vector marg = marginals_from_pmf(pmf_lensemble(LEnsembleKernel::from_features(x)));
  EXPECT_LE((marg - r).norm(), 1e-12);
}

TEST(RidgeLeverage, MatchesLEnsembleMarginalsOnRandomFeatures) {
  const Matrix x = gaussian(7, 3, 9);
  for (double lambda : {0.3, 1.0, 4.0}) {
    const Vector marg = marginals_from_pmf(pmf_lensemble(LEnsembleKernel::from_features(x, 1.0 / lambda)));
    EXPECT_LE((marg - ridge_leverage_exact(x, lambda).values).norm(), 1e-10);
  }
}

TEST(RidgeLeverage, IdentityHalf) {
  const Vector r = ridge_leverage_exact(Matrix::Identity(2, 2), 1.0).values;
  EXPECT_NEAR(r(0), 0.5, 1e-15);
  EXPECT_NEAR(r(1), 0.5, 1e-15);
}

TEST(RidgeLeverage, DecreasesInLambdaAndBelowLeverage) {
  const Matrix x = gaussian(10, 3, 4);
  const Vector lev = leverage_exact(x).values;
  Vector prev = lev;
  for (double lambda : {1e-3, 0.1, 1.0, 10.0, 1e3, 1e6}) {
    const Vector r = ridge_leverage_exact(x, lambda).values;
    for (Index i = 0; i < x.rows(); ++i) {
      EXPECT_GE(r(i), 0.0);
      EXPECT_LT(r(i), lev(i));
      EXPECT_LT(r(i), prev(i));
    }
    prev = r;
  }
  EXPECT_LT(prev.maxCoeff(), 1e-4);
}

TEST(RidgeLeverage, RejectsNonPositiveLambda) {
  EXPECT_THROW(ridge_leverage_exact(Matrix::Identity(2, 2), 0.0), ValidationError);
  EXPECT_THROW(ridge_leverage_exact(Matrix::Identity(2, 2), -1.0), ValidationError);
  EXPECT_THROW(effective_dimension(Matrix::Identity(2, 2), 0.0), ValidationError);
}

TEST(Coherence, Examples) {
  EXPECT_NEAR(coherence(kThreeByTwo), 1.0, 1e-13);
  EXPECT_NEAR(coherence(mat(3, 2, {1, 0, 0, 1, 0, 0})), 1.5, 1e-13);
  EXPECT_NEAR(coherence(gaussian(4, 4, 3)), 1.0, 1e-12);
}

TEST(Coherence, BoundedByOneAndNOverD) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Matrix x = gaussian(30, 3, seed);
    x.row(0) *= std::pow(10.0, static_cast<double>(seed % 4));
    const double mu = coherence(x);
    EXPECT_GE(mu, 1.0 - 1e-12);
    EXPECT_LE(mu, 10.0 + 1e-12);
  }
}

TEST(EffectiveDimension, Examples) {
  EXPECT_NEAR(effective_dimension(mat(1, 1, {1}), 1.0), 0.5, 1e-15);
  EXPECT_NEAR(effective_dimension(Matrix::Identity(2, 2), 1.0), 1.0, 1e-15);
  const Matrix x = gaussian(8, 3, 1);
  EXPECT_NEAR(effective_dimension(x, 1e-12), 3.0, 1e-9);
}

TEST(EffectiveDimension, EqualsExpectedSizeAndTraceFormula) {
  const Matrix x = gaussian(6, 4, 2);
  const double lambda = 0.7;
  const double d_lambda = effective_dimension(x, lambda);
  EXPECT_NEAR(pmf_lensemble(LEnsembleKernel::from_features(x, 1.0 / lambda)).expected_size(), d_lambda, 1e-10);
  const Matrix g = x * x.transpose();
  const Matrix trace_form = g * (g + lambda * Matrix::Identity(6, 6)).inverse();
  EXPECT_NEAR(trace_form.trace(), d_lambda, 1e-10);
}

TEST(EffectiveDimension, MonotoneDecreasingInLambda) {
  const Matrix x = gaussian(12, 5, 6);
  double prev = 5.0 + 1e-9;
  for (double lambda = 1e-4; lambda < 1e4; lambda *= 3.0) {
    const double d = effective_dimension(x, lambda);
    EXPECT_LT(d, prev);
    prev = d;
  }
}

TEST(LeverageApprox, IdentityWithinHalfInMostSeeds) {
  // The default Gaussian width is too narrow at n = 4 for per-entry
  // concentration, so this uses a wider second sketch.
  LeverageApproxConfig cfg;
  cfg.jl_factor = 32.0;
  for (Index d : {4, 8}) {
    int good = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const Vector l = leverage_approx(Matrix::Identity(d, d), seed, cfg).values;
      if (l.minCoeff() >= 0.5 && l.maxCoeff() <= 1.5) ++good;
    }
    EXPECT_GE(good, 90) << "d = " << d;
  }
}

TEST(LeverageApprox, DuplicatedRowsAgreeWithinFactorThree) {
  const Matrix a = gaussian(8, 3, 21);
  Matrix x(16, 3);
  x << a, a;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Vector l = leverage_approx(x, seed).values;
    for (Index i = 0; i < 8; ++i) {
      const double ratio = l(i) / l(i + 8);
      EXPECT_GE(ratio, 1.0 / 3.0) << "seed " << seed << " row " << i;
      EXPECT_LE(ratio, 3.0) << "seed " << seed << " row " << i;
    }
  }
}

TEST(LeverageApprox, ScaleInvariantForSharedSeed) {
  const Matrix x = gaussian(40, 5, 3);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Vector a = leverage_approx(x, seed).values;
    const Vector b = leverage_approx(Matrix(10.0 * x), seed).values;
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-12 * a.cwiseAbs().maxCoeff());
  }
}

TEST(LeverageApprox, DeterministicForSeed) {
  const Matrix x = gaussian(33, 4, 8);
  EXPECT_EQ(leverage_approx(x, 5).values, leverage_approx(x, 5).values);
  EXPECT_NE(leverage_approx(x, 5).values, leverage_approx(x, 6).values);
}

TEST(LeverageApprox, MedianOverSeedsTracksExact) {
  const Matrix x = gaussian(1024, 16, 77);
  const Vector exact = leverage_exact(x).values;
  constexpr int kSeeds = 51;
  Matrix draws(x.rows(), kSeeds);
  for (int s = 0; s < kSeeds; ++s) draws.col(s) = leverage_approx(x, static_cast<std::uint64_t>(s)).values;
  Index good = 0;
  std::vector<double> row(kSeeds);
  for (Index i = 0; i < x.rows(); ++i) {
    for (int s = 0; s < kSeeds; ++s) row[static_cast<std::size_t>(s)] = draws(i, s);
    std::nth_element(row.begin(), row.begin() + kSeeds / 2, row.end());
    const double ratio = row[kSeeds / 2] / exact(i);
    if (ratio >= 0.5 && ratio <= 1.5) ++good;
  }
  EXPECT_GE(static_cast<double>(good), 0.95 * static_cast<double>(x.rows()));
}

TEST(LeverageApprox, SketchSizes) {
  const auto s = leverage_approx_sizes(1000, 10);
  EXPECT_EQ(s.padded_rows, 1024);
  EXPECT_EQ(s.sketch_rows, 399);  // ceil(4 * 10 * log2(1000))
  EXPECT_EQ(s.jl_columns, 80);    // ceil(8 * log2(1000))
  EXPECT_EQ(leverage_approx_sizes(4, 4).sketch_rows, 4);
}

TEST(LeverageApprox, Errors) {
  EXPECT_THROW(leverage_approx(gaussian(2, 3, 1), 0), ValidationError);
  // Rank-deficient input makes every sketch singular.
  Matrix x = gaussian(16, 3, 2);
  x.col(2) = x.col(0);
  EXPECT_THROW(leverage_approx(x, 0), DegeneracyError);
}

TEST(FastHadamard, MatchesExplicitMatrix) {
  Matrix h(1, 1);
  h(0, 0) = 1.0;
  for (int level = 0; level < 3; ++level) {
    Matrix next(2 * h.rows(), 2 * h.rows());
    next << h, h, h, -h;
    h = next;
  }
  const Matrix a = gaussian(8, 3, 4);
  Matrix b = a;
  fwht_rows(b);
  EXPECT_LE((b - h * a).norm(), 1e-12);
  Matrix bad(3, 1);
  EXPECT_THROW(fwht_rows(bad), DimensionError);
}

TEST(SamplingDistributionTest, Examples) {
  const auto u = sampling_distribution(gaussian(4, 2, 1), SamplingKind::uniform);
  for (Index i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(u[i], 0.25);
  const auto sq = sampling_distribution(mat(2, 2, {1, 0, 0, 2}), SamplingKind::squared_norm);
  EXPECT_NEAR(sq[0], 0.2, 1e-15);
  EXPECT_NEAR(sq[1], 0.8, 1e-15);
  const auto lev = sampling_distribution(kThreeByTwo, SamplingKind::leverage);
  for (Index i = 0; i < 3; ++i) EXPECT_NEAR(lev[i], 1.0 / 3.0, 1e-14);
}

TEST(SamplingDistributionTest, NormalizedOnRandomInputs) {
  for (auto kind : {SamplingKind::uniform, SamplingKind::squared_norm, SamplingKind::leverage}) {
    const auto p = sampling_distribution(gaussian(25, 4, 12), kind);
    EXPECT_NEAR(p.probabilities().sum(), 1.0, 1e-12);
    EXPECT_GE(p.probabilities().minCoeff(), 0.0);
  }
}

TEST(SamplingDistributionTest, ZeroMatrixRejectedForNonUniform) {
  const Matrix z = Matrix::Zero(3, 2);
  EXPECT_NO_THROW(sampling_distribution(z, SamplingKind::uniform));
  EXPECT_THROW(sampling_distribution(z, SamplingKind::squared_norm), ValidationError);
  EXPECT_THROW(sampling_distribution(z, SamplingKind::leverage), ValidationError);
  EXPECT_THROW(SamplingDistribution(testutil::vec({0.5, 0.6})), ValidationError);
  EXPECT_EQ(to_string(SamplingKind::squared_norm), "squared_norm");
}
