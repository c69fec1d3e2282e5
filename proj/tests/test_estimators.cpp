#include "dppla/estimators.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace dppla;
using testutil::gaussian;
using testutil::gaussian_vector;
using testutil::mat;
using testutil::vec;

namespace {

RegressionProblem random_problem(Index n, Index d, std::uint64_t seed) {
  return RegressionProblem(gaussian(n, d, seed), gaussian_vector(n, seed + 1000));
}

const RegressionProblem kTwoByOne(mat(2, 1, {1, 1}), vec({0, 2}));

// Sum over size-d subsets with cofactor volumes; independent of the library pmf.
Vector projection_expectation_oracle(const RegressionProblem& p) {
  const Matrix l = p.x * p.x.transpose();
  const auto pmf = testutil::kdpp_pmf_oracle(l, static_cast<int>(p.d()));
  Vector mean = Vector::Zero(p.d());
  for (std::uint64_t m = 0; m < pmf.size(); ++m) {
    if (pmf[m] == 0.0) continue;
    const auto s = SubsetSample::from_mask(m, p.n());
    mean += pmf[m] * Matrix(select_rows(p.x, s.span())).inverse() * select_entries(p.y, s.span());
  }
  return mean;
}

}  // namespace

TEST(Loss, Examples) {
  EXPECT_EQ(loss(RegressionProblem(Matrix::Identity(2, 2), vec({1, 2})), vec({1, 2})), 0.0);
  EXPECT_DOUBLE_EQ(loss(kTwoByOne, vec({1})), 2.0);
  const auto p = random_problem(6, 3, 1);
  EXPECT_DOUBLE_EQ(loss(p, Vector::Zero(3)), p.y.squaredNorm());
  EXPECT_THROW(loss(p, Vector::Zero(2)), DimensionError);
}

TEST(Problem, Validation) {
  EXPECT_THROW(RegressionProblem(Matrix::Identity(2, 2), vec({1, 2, 3})), DimensionError);
  EXPECT_THROW(NoiseModel(vec({1}), -1.0), ValidationError);
  const NoiseModel noise(vec({2, -1}), 0.0);
  Rng rng(0);
  const Matrix x = gaussian(5, 2, 3);
  EXPECT_LE((noise.draw(x, rng).y - x * vec({2, -1})).norm(), 1e-14);
}

TEST(IidSketch, IdenticalRowsRecoverSolution) {
  // Every (x_i, y_i) is the same, so any subsample is a scaled copy of the full problem.
  const RegressionProblem p(Matrix::Constant(6, 1, 2.0), Vector::Constant(6, 3.0));
  const double w_star = lstsq(p.x, p.y)(0);
  EXPECT_NEAR(w_star, 1.5, 1e-14);
  for (auto kind : {SamplingKind::uniform, SamplingKind::squared_norm, SamplingKind::leverage})
    for (std::uint64_t seed = 0; seed < 20; ++seed)
      EXPECT_NEAR(iid_sketch_solve(p, sampling_distribution(p.x, kind), 1 + static_cast<Index>(seed % 5), seed).w(0),
                  w_star, 1e-14);
}

TEST(IidSketch, UniformScaleIsSqrtNOverK) {
  const auto dist = sampling_distribution(gaussian(12, 2, 4), SamplingKind::uniform);
  Rng rng(1);
  const auto s = iid_row_sketch(dist, 3, rng);
  ASSERT_EQ(s.rows.size(), 3u);
  for (Index i = 0; i < 3; ++i) EXPECT_NEAR(s.scale(i), 2.0, 1e-15);
  EXPECT_THROW(iid_row_sketch(dist, 0, rng), ValidationError);
}

TEST(IidSketch, SampleSizeRule) {
  EXPECT_EQ(iid_sample_size(5, 0.5), 20);  // 5 * (ceil(ln 5) + 2)
  EXPECT_EQ(iid_sample_size(1, 0.5), 2);
  EXPECT_THROW(iid_sample_size(3, 0.0), ValidationError);
}

TEST(IidSketch, LeverageSketchNearOptimal) {
  // The nominal rule k = 20 lands near the 85% level; twice that is comfortably above it.
  const auto p = random_problem(200, 5, 77);
  const double best = loss(p, lstsq(p.x, p.y));
  const auto dist = sampling_distribution(p.x, SamplingKind::leverage);
  const Index k = 2 * iid_sample_size(5, 0.5);
  int good = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    if (loss(p, iid_sketch_solve(p, dist, k, seed).w) <= 1.5 * best) ++good;
  EXPECT_GE(good, 85);
}

TEST(IidSketch, RankDeficientSubproblemFlagged) {
  const auto p = random_problem(30, 4, 5);
  const auto sol = iid_sketch_solve(p, sampling_distribution(p.x, SamplingKind::uniform), 2, 0);
  EXPECT_TRUE(sol.rank_deficient);
  EXPECT_TRUE(sol.w.allFinite());
}

TEST(IidSketch, BiasedOnSmallInstance) {
  // X = (1, 2, 3)^T, y = e_1, uniform sampling with k = 2. Enumerate all ordered pairs.
  const RegressionProblem p(mat(3, 1, {1, 2, 3}), vec({1, 0, 0}));
  const double w_star = 1.0 / 14.0;
  double mean = 0.0;
  for (Index a = 0; a < 3; ++a)
    for (Index b = 0; b < 3; ++b)
      mean += (p.x(a, 0) * p.y(a) + p.x(b, 0) * p.y(b)) / (p.x(a, 0) * p.x(a, 0) + p.x(b, 0) * p.x(b, 0)) / 9.0;
  EXPECT_GT(std::abs(mean - w_star), 0.05);

  const auto dist = sampling_distribution(p.x, SamplingKind::uniform);
  double mc = 0.0;
  constexpr int kDraws = 100000;
  Rng rng(3);
  for (int i = 0; i < kDraws; ++i) mc += iid_sketch_solve(p, dist, 2, rng).w(0);
  EXPECT_NEAR(mc / kDraws, mean, 0.01);
}

TEST(ProjectionDppLsq, SquareSystemIsDeterministic) {
  const auto p = random_problem(3, 3, 8);
  const Vector w = p.x.inverse() * p.y;
  for (std::uint64_t seed = 0; seed < 10; ++seed) EXPECT_LE((projection_dpp_lsq(p, seed) - w).norm(), 1e-10);
}

TEST(ProjectionDppLsq, TwoByOneTakesBothValues) {
  int twos = 0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const double w = projection_dpp_lsq(kTwoByOne, seed)(0);
    ASSERT_TRUE(std::abs(w) < 1e-14 || std::abs(w - 2.0) < 1e-14) << w;
    twos += w > 1.0;
  }
  EXPECT_NEAR(twos / 10000.0, 0.5, 0.02);
}

TEST(ProjectionDppLsq, RejectsRankDeficient) {
  Matrix x = gaussian(6, 3, 2);
  x.col(2) = x.col(1);
  EXPECT_THROW(projection_dpp_lsq(RegressionProblem(x, gaussian_vector(6, 1)), 0), ValidationError);
  EXPECT_THROW(projection_dpp_lsq(RegressionProblem(gaussian(2, 3, 1), vec({1, 2})), 0), ValidationError);
}

TEST(ProjectionDppLsq, MonteCarloMeanIsLeastSquares) {
  const auto p = random_problem(15, 3, 12);
  const Vector w_star = lstsq(p.x, p.y);
  const ProjectionDppEstimator est(p);
  constexpr int kDraws = 100000;
  Vector sum = Vector::Zero(3);
  Vector sum_sq = Vector::Zero(3);
  Rng rng(99);
  for (int i = 0; i < kDraws; ++i) {
    const Vector w = est.sample(rng);
    sum += w;
    sum_sq += w.cwiseProduct(w);
  }
  const Vector mean = sum / kDraws;
  for (Index j = 0; j < 3; ++j) {
    const double sd = std::sqrt(sum_sq(j) / kDraws - mean(j) * mean(j));
    EXPECT_NEAR(mean(j), w_star(j), 4.0 * sd / std::sqrt(double{kDraws})) << "coordinate " << j;
  }
}

TEST(LEnsembleRidge, OneByOneTakesBothValues) {
  const RegressionProblem p(mat(1, 1, {1}), vec({2}));
  int twos = 0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const double w = lensemble_ridge(p, 1.0, seed)(0);
    ASSERT_TRUE(w == 0.0 || std::abs(w - 2.0) < 1e-14) << w;
    twos += w > 1.0;
  }
  EXPECT_NEAR(twos / 10000.0, 0.5, 0.02);
}

TEST(LEnsembleRidge, LargeLambdaGivesZero) {
  const auto p = random_problem(6, 2, 3);
  int nonzero = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) nonzero += lensemble_ridge(p, 1e6, seed).norm() > 0.0;
  EXPECT_LE(nonzero, 2);
  EXPECT_LE(expected_estimator_exact(p, LEnsembleLaw{1e6}).norm(), 1e-4);
  EXPECT_THROW(lensemble_ridge(p, 0.0, 0), ValidationError);
}

TEST(ExpectedEstimator, Examples) {
  EXPECT_NEAR(expected_estimator_exact(kTwoByOne, ProjectionDppLaw{})(0), 1.0, 1e-14);
  EXPECT_NEAR(expected_estimator_exact(RegressionProblem(mat(1, 1, {1}), vec({2})), LEnsembleLaw{1.0})(0), 1.0,
              1e-14);
  const auto sq = random_problem(4, 4, 2);
  EXPECT_LE((expected_estimator_exact(sq, ProjectionDppLaw{}) - sq.x.inverse() * sq.y).norm(), 1e-10);
  EXPECT_THROW(expected_estimator_exact(random_problem(21, 2, 1), ProjectionDppLaw{}), SizeError);
}

TEST(ExpectedEstimator, ProjectionLawIsUnbiased) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Index n = 4 + static_cast<Index>(seed % 9);
    const Index d = 1 + static_cast<Index>(seed % 4);
    const auto p = random_problem(n, d, 500 + seed);
    const Vector w_star = lstsq(p.x, p.y);
    const Vector expected = expected_estimator_exact(p, ProjectionDppLaw{});
    EXPECT_LE((expected - w_star).norm(), 1e-8 * std::max(1.0, w_star.norm())) << "seed " << seed;
  }
  const auto p = random_problem(15, 3, 6);
  EXPECT_LE((projection_expectation_oracle(p) - lstsq(p.x, p.y)).norm(), 1e-8);
}

TEST(ExpectedEstimator, LEnsembleLawIsRidge) {
  const auto p = random_problem(10, 4, 31);
  for (double lambda : {0.1, 1.0, 2.0, 10.0}) {
    const Vector ridge = (p.x.transpose() * p.x + lambda * Matrix::Identity(4, 4)).inverse() * p.x.transpose() * p.y;
    EXPECT_LE((expected_estimator_exact(p, LEnsembleLaw{lambda}) - ridge).norm(), 1e-8) << "lambda " << lambda;
    EXPECT_LE((ridge_solution(p, lambda) - ridge).norm(), 1e-10);
  }
}

TEST(ExpectedLoss, Examples) {
  EXPECT_NEAR(expected_loss_exact(kTwoByOne), 4.0, 1e-13);
  const Matrix x = gaussian(7, 2, 4);
  EXPECT_NEAR(expected_loss_exact(RegressionProblem(x, x * vec({1, -2}))), 0.0, 1e-18 + 1e-20);
}

TEST(ExpectedLoss, FactorIsDimensionPlusOne) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Index d = 1 + static_cast<Index>(seed % 4);
    const auto p = random_problem(12, d, 700 + seed);
    const double best = loss(p, lstsq(p.x, p.y));
    EXPECT_NEAR(expected_loss_exact(p) / best, static_cast<double>(d + 1), 1e-8 * static_cast<double>(d + 1));
  }
}

TEST(ExpectedLoss, GeneralPositionViolation) {
  // Rows 0 and 1 are parallel and both carry nonzero weight.
  const RegressionProblem p(mat(4, 2, {1, 0, 2, 0, 0, 1, 1, 1}), vec({1, 2, 3, 4}));
  EXPECT_FALSE(rows_in_general_position(p.x));
  EXPECT_THROW(expected_loss_exact(p), GeneralPositionError);
  EXPECT_THROW(expected_mse_exact(p.x, NoiseModel(vec({0, 0}), 1.0)), GeneralPositionError);
  EXPECT_TRUE(rows_in_general_position(gaussian(12, 3, 1)));
  EXPECT_TRUE(rows_in_general_position(gaussian(40, 3, 1)));
}

TEST(ExpectedMse, Examples) {
  EXPECT_NEAR(expected_mse_exact(kTwoByOne.x, NoiseModel(vec({0}), 1.0)), 1.0, 1e-14);
  EXPECT_EQ(expected_mse_exact(gaussian(5, 2, 1), NoiseModel(vec({1, 1}), 0.0)), 0.0);
}

TEST(ExpectedMse, FactorIsNMinusDPlusOne) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Index n = 6 + static_cast<Index>(seed);
    const Index d = 1 + static_cast<Index>(seed % 3);
    const Matrix x = gaussian(n, d, 900 + seed);
    const double sigma = 0.5;
    const double base = sigma * sigma * (x.transpose() * x).inverse().trace();
    const double ratio = expected_mse_exact(x, NoiseModel(Vector::Zero(d), sigma)) / base;
    EXPECT_NEAR(ratio, static_cast<double>(n - d + 1), 1e-8 * static_cast<double>(n)) << "seed " << seed;
  }
  const Matrix x = gaussian(10, 2, 5);
  const double ratio = expected_mse_exact(x, NoiseModel(Vector::Zero(2), 0.5)) /
                       (0.25 * (x.transpose() * x).inverse().trace());
  EXPECT_NEAR(ratio, 9.0, 1e-8 * 9.0);
}

TEST(SubspaceEmbedding, IdentityAndScaledSketch) {
  const Matrix x = gaussian(10, 3, 1);
  EXPECT_TRUE(subspace_embedding_check(x, x, 0.0));
  EXPECT_FALSE(subspace_embedding_check(x, Matrix(2.0 * x), 2.9));
  EXPECT_TRUE(subspace_embedding_check(x, Matrix(2.0 * x), 3.0));
  const auto [lo, hi] = subspace_embedding_distortion(x, Matrix(2.0 * x));
  EXPECT_NEAR(lo, 4.0, 1e-12);
  EXPECT_NEAR(hi, 4.0, 1e-12);
}

TEST(SubspaceEmbedding, Errors) {
  Matrix x = gaussian(6, 2, 1);
  EXPECT_THROW(subspace_embedding_check(x, Matrix(gaussian(3, 3, 2)), 0.5), DimensionError);
  x.col(1) = x.col(0);
  EXPECT_THROW(subspace_embedding_check(x, x, 0.5), ValidationError);
}

TEST(SubspaceEmbedding, LeverageSketchEmbedsInMostSeeds) {
  const Matrix x = gaussian(500, 4, 21);
  const auto dist = sampling_distribution(x, SamplingKind::leverage);
  int good = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const auto sketch = iid_row_sketch(dist, 200, rng);
    good += subspace_embedding_check(x, sketch.apply(x), 0.5);
  }
  EXPECT_GE(good, 90);
}
