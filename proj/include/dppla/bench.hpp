#pragma once

// Repetition benchmarks comparing i.i.d. sketches with DPP estimators
// (least squares) and DPP subset selection with simpler baselines (low rank).

#include "dppla/lowrank.hpp"
#include "dppla/scores.hpp"
#include "dppla/synthetic.hpp"

#include <limits>
#include <optional>
#include <string>

namespace dppla {

// ---------------------------------------------------------------------------
// Least squares

enum class LsqMethod { uniform, squared_norm, leverage, projection_dpp };

inline std::string to_string(LsqMethod m) {
  switch (m) {
    case LsqMethod::uniform: return "uniform";
    case LsqMethod::squared_norm: return "squared_norm";
    case LsqMethod::leverage: return "leverage";
    case LsqMethod::projection_dpp: return "projection_dpp";
  }
  return "?";
}

inline LsqMethod parse_lsq_method(const std::string& s) {
  if (s == "uniform") return LsqMethod::uniform;
  if (s == "squared_norm") return LsqMethod::squared_norm;
  if (s == "leverage") return LsqMethod::leverage;
  if (s == "projection_dpp") return LsqMethod::projection_dpp;
  throw ValidationError("unknown least-squares method '" + s + "'");
}

struct LsqBenchConfig {
  std::vector<LsqMethod> methods{LsqMethod::uniform, LsqMethod::squared_norm, LsqMethod::leverage,
                                 LsqMethod::projection_dpp};
  std::vector<Index> sample_sizes;  // ignored by projection_dpp, which always uses k = d
  std::size_t reps = 100;
  double eps = 0.5;  // threshold for the within-(1+eps) fraction
  std::uint64_t seed = 0;
};

struct LsqBenchRow {
  LsqMethod method = LsqMethod::uniform;
  Index k = 0;
  std::size_t reps = 0;
  double mean_loss_ratio = 0.0;
  double median_loss_ratio = 0.0;
  double frac_within = 0.0;   // fraction of reps with L(w) <= (1+eps) L(w*)
  double bias_norm = 0.0;     // ||mean(w) - w*||
  double bias_mc_sigma = 0.0; // Monte Carlo standard error of that mean, in norm
  double mse = 0.0;           // mean ||w - w_ref||^2
  std::size_t rank_deficient = 0;
};

/// L(w) / L(w*); treats L(w*) at or below `zero_tol` as zero (ratio 1 when
/// L(w) is also zero, +inf otherwise).
inline double loss_ratio(double l, double l_star, double zero_tol) {
  if (l_star <= zero_tol) return l <= zero_tol ? 1.0 : std::numeric_limits<double>::infinity();
  return l / l_star;
}

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2) return *mid;
  return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

}  // namespace detail

/// Runs every (method, k) cell for `reps` repetitions on a fixed problem.
/// Repetition r of cell c uses seed derive_seed(derive_seed(seed, c), r).
/// `w_ref` is the target for the MSE column (the planted w~ when known, else w*).
inline std::vector<LsqBenchRow> lsq_bench(const RegressionProblem& prob, const LsqBenchConfig& cfg,
                                          const std::optional<Vector>& w_ref = std::nullopt) {
  if (cfg.reps < 1) throw ValidationError("lsq_bench: reps must be >= 1");
  const Vector w_star = lstsq(prob.x, prob.y);
  const double l_star = loss(prob, w_star);
  const double zero_tol = 1e-12 * std::max(1.0, prob.y.squaredNorm());
  const Vector target = w_ref.value_or(w_star);
  if (target.size() != prob.d()) throw DimensionError("lsq_bench: reference vector length differs from d");

  std::vector<LsqBenchRow> rows;
  std::uint64_t cell = 0;
  for (LsqMethod method : cfg.methods) {
    std::vector<Index> ks = cfg.sample_sizes;
    std::optional<ProjectionDppEstimator> dpp;
    std::optional<SamplingDistribution> dist;
    if (method == LsqMethod::projection_dpp) {
      ks = {prob.d()};
      dpp.emplace(prob);
    } else {
      const auto kind = method == LsqMethod::uniform        ? SamplingKind::uniform
                        : method == LsqMethod::squared_norm ? SamplingKind::squared_norm
                                                            : SamplingKind::leverage;
      dist.emplace(sampling_distribution(prob.x, kind));
    }
    for (Index k : ks) {
      if (k < 1) throw ValidationError("lsq_bench: sample sizes must be >= 1");
      const std::uint64_t cell_seed = derive_seed(cfg.seed, cell++);
      LsqBenchRow row;
      row.method = method;
      row.k = k;
      row.reps = cfg.reps;
      std::vector<double> ratios;
      ratios.reserve(cfg.reps);
      Vector sum = Vector::Zero(prob.d());
      Vector sum_sq = Vector::Zero(prob.d());
      std::size_t within = 0;
      double sq_err = 0.0;
      for (std::size_t r = 0; r < cfg.reps; ++r) {
        Rng rng(derive_seed(cell_seed, r));
        Vector w;
        if (dpp) {
          w = dpp->sample(rng);
        } else {
          auto sol = iid_sketch_solve(prob, *dist, k, rng);
          row.rank_deficient += sol.rank_deficient ? 1 : 0;
          w = std::move(sol.w);
        }
        const double l = loss(prob, w);
        ratios.push_back(loss_ratio(l, l_star, zero_tol));
        within += l <= (1.0 + cfg.eps) * l_star + zero_tol ? 1 : 0;
        const Vector dev = w - w_star;
        sum += dev;
        sum_sq += dev.cwiseProduct(dev);
        sq_err += (w - target).squaredNorm();
      }
      const double reps = static_cast<double>(cfg.reps);
      row.mean_loss_ratio = std::accumulate(ratios.begin(), ratios.end(), 0.0) / reps;
      row.median_loss_ratio = detail::median(ratios);
      row.frac_within = static_cast<double>(within) / reps;
      const Vector mean = sum / reps;
      row.bias_norm = mean.norm();
      if (cfg.reps > 1) {
        const Vector var = ((sum_sq - reps * mean.cwiseProduct(mean)) / (reps - 1.0)).cwiseMax(0.0);
        row.bias_mc_sigma = std::sqrt(var.sum() / reps);
      }
      row.mse = sq_err / reps;
      rows.push_back(row);
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Low rank

enum class LowrankMethod { uniform, ridge_leverage, kdpp };

inline std::string to_string(LowrankMethod m) {
  switch (m) {
    case LowrankMethod::uniform: return "uniform";
    case LowrankMethod::ridge_leverage: return "ridge_leverage";
    case LowrankMethod::kdpp: return "kdpp";
  }
  return "?";
}

inline LowrankMethod parse_lowrank_method(const std::string& s) {
  if (s == "uniform") return LowrankMethod::uniform;
  if (s == "ridge_leverage") return LowrankMethod::ridge_leverage;
  if (s == "kdpp") return LowrankMethod::kdpp;
  throw ValidationError("unknown low-rank method '" + s + "'");
}

struct LowrankBenchConfig {
  std::vector<LowrankMethod> methods{LowrankMethod::uniform, LowrankMethod::ridge_leverage, LowrankMethod::kdpp};
  std::vector<Index> sample_sizes;
  Index r = 1;
  double lambda = 1.0;  // ridge parameter for ridge_leverage
  std::size_t reps = 100;
  std::uint64_t seed = 0;
};

struct LowrankBenchRow {
  LowrankMethod method = LowrankMethod::uniform;
  Index k = 0;
  std::size_t reps = 0;  // 0 when the cell was skipped
  double mean_error = std::numeric_limits<double>::quiet_NaN();
  double error_mc_sigma = std::numeric_limits<double>::quiet_NaN();
  double baseline = 0.0;  // best rank-r error
  double ratio = std::numeric_limits<double>::quiet_NaN();  // mean_error / baseline
  double mean_subset_size = std::numeric_limits<double>::quiet_NaN();
  std::string note;
};

/// Subset-selection target: rows of a data matrix (Frobenius Er) or
/// columns of a PSD kernel (Nystrom, nuclear norm).
class LowrankTarget {
 public:
  static LowrankTarget data(Matrix x) {
    LowrankTarget t;
    t.x_ = std::move(x);
    t.l_.emplace(LEnsembleKernel::from_features(t.x_));
    return t;
  }
  static LowrankTarget kernel(const Matrix& l) {
    LowrankTarget t;
    t.l_.emplace(l);
    t.nystrom_ = true;
    return t;
  }

  bool is_kernel() const noexcept { return nystrom_; }
  Index n() const { return l_->n(); }
  const LEnsembleKernel& lensemble() const { return *l_; }

  double error(const SubsetSample& s) const { return nystrom_ ? nystrom_error(*l_, s) : reconstruction_error(x_, s); }

  double baseline(Index r) const {
    return nystrom_ ? truncated_svd_error(l_->matrix(), r, ErrorNorm::nuclear)
                    : truncated_svd_error(x_, r, ErrorNorm::frobenius_squared);
  }

  /// l_i^lambda = [L (L + lambda I)^{-1}]_ii.
  Vector ridge_scores(double lambda) const {
    if (!nystrom_) return ridge_leverage_exact(x_, lambda).values;
    if (!(lambda > 0.0)) throw ValidationError("ridge leverage: lambda must be positive");
    const auto& e = l_->eigen();
    const Vector shrink = e.eigenvalues.array() / (e.eigenvalues.array() + lambda);
    return (e.eigenvectors.array().square().matrix() * shrink);
  }

 private:
  Matrix x_;
  std::optional<LEnsembleKernel> l_;
  bool nystrom_ = false;
};

inline std::vector<LowrankBenchRow> lowrank_bench(const LowrankTarget& target, const LowrankBenchConfig& cfg) {
  if (cfg.reps < 1) throw ValidationError("lowrank_bench: reps must be >= 1");
  const Index n = target.n();
  if (cfg.r < 0 || cfg.r > n) throw ValidationError("lowrank_bench: r out of range");
  const double baseline = target.baseline(cfg.r);
  const Index rank = target.lensemble().rank();

  std::vector<LowrankBenchRow> rows;
  std::uint64_t cell = 0;
  for (LowrankMethod method : cfg.methods) {
    std::optional<std::discrete_distribution<Index>> ridge;
    if (method == LowrankMethod::ridge_leverage) {
      const Vector w = target.ridge_scores(cfg.lambda);
      if (!(w.sum() > 0.0)) throw ValidationError("lowrank_bench: all ridge leverage scores are zero");
      ridge.emplace(w.data(), w.data() + w.size());
    }
    for (Index k : cfg.sample_sizes) {
      const std::uint64_t cell_seed = derive_seed(cfg.seed, cell++);
      LowrankBenchRow row;
      row.method = method;
      row.k = k;
      row.baseline = baseline;
      if (k < 0 || k > n) throw ValidationError("lowrank_bench: sample size " + std::to_string(k) + " out of range");
      if (method == LowrankMethod::kdpp && k > rank) {
        row.note = "k exceeds rank " + std::to_string(rank);
        rows.push_back(row);
        continue;
      }
      double sum = 0.0;
      double sum_sq = 0.0;
      double size_sum = 0.0;
      for (std::size_t r = 0; r < cfg.reps; ++r) {
        Rng rng(derive_seed(cell_seed, r));
        SubsetSample s;
        switch (method) {
          case LowrankMethod::uniform:
            s = SubsetSample(uniform_subset(rng, n, k), n);
            break;
          case LowrankMethod::ridge_leverage: {
            // k i.i.d. draws; repeated indices collapse
            std::vector<Index> idx(static_cast<std::size_t>(k));
            for (auto& i : idx) i = (*ridge)(rng);
            std::sort(idx.begin(), idx.end());
            idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
            s = SubsetSample(std::move(idx), n);
            break;
          }
          case LowrankMethod::kdpp:
            s = sample_kdpp(target.lensemble(), k, rng);
            break;
        }
        const double e = target.error(s);
        sum += e;
        sum_sq += e * e;
        size_sum += static_cast<double>(s.size());
      }
      const double reps = static_cast<double>(cfg.reps);
      row.reps = cfg.reps;
      row.mean_error = sum / reps;
      row.error_mc_sigma =
          cfg.reps > 1 ? std::sqrt(std::max(0.0, (sum_sq - reps * row.mean_error * row.mean_error) / (reps - 1.0)) / reps)
                       : 0.0;
      row.mean_subset_size = size_sum / reps;
      row.ratio = make_approx_report(SubsetSample(), row.mean_error, baseline,
                                     1e-12 * std::max(1.0, target.lensemble().matrix().trace()))
                      .ratio;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace dppla
