#pragma once

// Accelerated DPP samplers: distortion-free intermediate sampling for
// Projection DPPs and the swap Markov chain for k-DPPs.

#include "dppla/dpp.hpp"

#include <cmath>
#include <random>
#include <string>

namespace dppla {

struct RetryBudgetError : Error {
  using Error::Error;
};
struct InitializationError : Error {
  using Error::Error;
};

struct IntermediateConfig {
  double oversample_factor = 3.0;  // t = ceil(oversample_factor * k^2)
  std::size_t max_rejections = 100000;

  void validate() const {
    if (!(oversample_factor >= 1.0)) throw ValidationError("IntermediateConfig: oversample_factor must be >= 1");
    if (max_rejections < 1) throw ValidationError("IntermediateConfig: max_rejections must be >= 1");
  }
};

inline Index intermediate_sample_size(Index k, const IntermediateConfig& cfg) {
  return std::max<Index>(k, static_cast<Index>(std::ceil(cfg.oversample_factor * static_cast<double>(k * k))));
}

/// Pr(accept) of one round: E det((1/t) U~^T U~) = t! / ((t-k)! (k t)^k).
inline double intermediate_acceptance_probability(Index t, Index k) {
  double p = 1.0;
  for (Index j = 0; j < k; ++j) p *= static_cast<double>(t - j) / static_cast<double>(k * t);
  return p;
}

/// Exact sampler for DPP(U U^T) that works on an i.i.d. leverage-score
/// oversample of size t instead of the full ground set.
///
/// Each round draws i_1..i_t with Pr(i) = ||v_i||^2 / k, stacks the unit rows
/// v_i / ||v_i|| into U~, and accepts with probability det((1/t) U~^T U~).
/// An accepted round is finished by a projection-DPP draw on the t rows
/// (duplicates stay distinct domain elements); the resulting law is exactly
/// DPP(U U^T).
class IntermediateSampler {
 public:
  IntermediateSampler(ProjectionBasis basis, IntermediateConfig cfg = {})
      : basis_(std::move(basis)), cfg_(cfg), t_(intermediate_sample_size(basis_.k(), cfg_)) {
    cfg_.validate();
    if (basis_.k() < 1) throw ValidationError("IntermediateSampler: basis must have k >= 1");
    const Vector lev = basis_.marginals();
    leverage_ = std::discrete_distribution<Index>(lev.data(), lev.data() + lev.size());
    row_norms_ = lev.cwiseSqrt();
  }

  template <class URBG>
  SubsetSample sample(URBG& rng) {
    const Index k = basis_.k();
    const Matrix& u = basis_.matrix();
    std::vector<Index> drawn(static_cast<std::size_t>(t_));
    Matrix rows(t_, k);
    for (std::size_t round = 0; round < cfg_.max_rejections; ++round) {
      ++attempts_;
      for (Index j = 0; j < t_; ++j) {
        const Index i = leverage_(rng);
        drawn[static_cast<std::size_t>(j)] = i;
        rows.row(j) = u.row(i) / row_norms_(i);
      }
      const double accept = (Matrix(rows.transpose() * rows) / static_cast<double>(t_)).determinant();
      if (accept < -1e-12 || accept > 1.0 + 1e-12)
        throw DegeneracyError("IntermediateSampler: acceptance probability " + std::to_string(accept) +
                              " outside [0, 1]");
      if (!bernoulli(rng, accept)) continue;

      const Matrix q = column_basis(rows);
      if (q.cols() != k) continue;  // numerically rank deficient; accept had ~0 mass
      const SubsetSample local = sample_projection_dpp(ProjectionBasis(q), rng);
      std::vector<Index> picked;
      picked.reserve(local.size());
      for (Index j : local.indices()) picked.push_back(drawn[static_cast<std::size_t>(j)]);
      std::sort(picked.begin(), picked.end());
      if (std::adjacent_find(picked.begin(), picked.end()) != picked.end())
        throw DegeneracyError("IntermediateSampler: duplicate row selected by the projection step");
      ++accepted_;
      return SubsetSample(std::move(picked), basis_.n());
    }
    throw RetryBudgetError("IntermediateSampler: " + std::to_string(cfg_.max_rejections) +
                           " consecutive rejections; observed acceptance rate " + std::to_string(acceptance_rate()) +
                           " (expected " + std::to_string(intermediate_acceptance_probability(t_, k)) + ")");
  }

  Index oversample_size() const noexcept { return t_; }
  std::uint64_t attempts() const noexcept { return attempts_; }
  std::uint64_t accepted() const noexcept { return accepted_; }
  double acceptance_rate() const noexcept {
    return attempts_ ? static_cast<double>(accepted_) / static_cast<double>(attempts_) : 0.0;
  }

 private:
  ProjectionBasis basis_;
  IntermediateConfig cfg_;
  Index t_;
  std::discrete_distribution<Index> leverage_;
  Vector row_norms_;
  std::uint64_t attempts_ = 0;
  std::uint64_t accepted_ = 0;
};

inline SubsetSample sample_projection_dpp_intermediate(const ProjectionBasis& basis, const IntermediateConfig& cfg,
                                                       std::uint64_t seed) {
  IntermediateSampler sampler(basis, cfg);
  Rng rng(seed);
  return sampler.sample(rng);
}

// ---------------------------------------------------------------------------
// Swap chain for k-DPP_L(L)

/// det(L_SS) counts as nonzero when it exceeds 1e-12 times the Hadamard
/// bound prod_{i in S} L_ii.
inline bool is_nondegenerate(const Matrix& l, std::span<const Index> s, double det) {
  double bound = 1.0;
  for (Index i : s) bound *= l(i, i);
  return det > 0.0 && det > 1e-12 * bound;
}

struct ChainState {
  SubsetSample current;
  double log_det = 0.0;  // log det(L_SS) of `current`
  std::size_t step_count = 0;

  static ChainState start(const LEnsembleKernel& l, SubsetSample s) {
    const double det = principal_minor(l.matrix(), s.span());
    if (!is_nondegenerate(l.matrix(), s.span(), det))
      throw ValidationError("ChainState: det(L_SS) is zero for the initial subset");
    return ChainState{std::move(s), std::log(det), 0};
  }
};

namespace detail {

inline std::vector<Index> complement(const SubsetSample& s) {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(s.n()) - s.size());
  for (Index i = 0; i < s.n(); ++i)
    if (!s.contains(i)) out.push_back(i);
  return out;
}

inline SubsetSample swap(const SubsetSample& s, Index out, Index in) {
  std::vector<Index> idx;
  idx.reserve(s.size());
  for (Index i : s.indices())
    if (i != out) idx.push_back(i);
  idx.push_back(in);
  return SubsetSample::from_unsorted(std::move(idx), s.n());
}

}  // namespace detail

/// One transition: pick i in S and j not in S uniformly, T = S + j - i,
/// move with probability 1/2 min{1, det(L_TT) / det(L_SS)}.
template <class URBG>
ChainState mcmc_step(const LEnsembleKernel& l, ChainState state, URBG& rng) {
  const Index n = l.n();
  const auto k = static_cast<Index>(state.current.size());
  ++state.step_count;
  if (k == 0 || k == n) return state;
  const auto outside = detail::complement(state.current);
  std::uniform_int_distribution<Index> pick_in(0, k - 1);
  std::uniform_int_distribution<Index> pick_out(0, n - k - 1);
  const Index i = state.current.indices()[static_cast<std::size_t>(pick_in(rng))];
  const Index j = outside[static_cast<std::size_t>(pick_out(rng))];
  SubsetSample proposal = detail::swap(state.current, i, j);
  const double det = principal_minor(l.matrix(), proposal.span());
  const double u = uniform01(rng);
  if (!is_nondegenerate(l.matrix(), proposal.span(), det)) return state;
  const double log_det = std::log(det);
  const double accept = 0.5 * std::min(1.0, std::exp(log_det - state.log_det));
  if (u < accept) {
    state.current = std::move(proposal);
    state.log_det = log_det;
  }
  return state;
}

inline ChainState mcmc_step(const LEnsembleKernel& l, ChainState state, std::uint64_t seed) {
  Rng rng(seed);
  return mcmc_step(l, std::move(state), rng);
}

/// P(S -> T) of the swap chain, including the holding probability when S == T.
inline double mcmc_transition_probability(const LEnsembleKernel& l, const SubsetSample& s, const SubsetSample& t) {
  const Index n = l.n();
  const auto k = static_cast<Index>(s.size());
  if (t.size() != s.size()) return 0.0;
  if (s == t) {
    if (k == 0 || k == n) return 1.0;
    double leave = 0.0;
    for (Index i : s.indices())
      for (Index j : detail::complement(s)) leave += mcmc_transition_probability(l, s, detail::swap(s, i, j));
    return 1.0 - leave;
  }
  std::size_t shared = 0;
  for (Index i : s.indices()) shared += t.contains(i) ? 1 : 0;
  if (shared + 1 != s.size()) return 0.0;
  const double det_s = principal_minor(l.matrix(), s.span());
  const double det_t = principal_minor(l.matrix(), t.span());
  if (!is_nondegenerate(l.matrix(), t.span(), det_t)) return 0.0;
  const double proposal = 1.0 / static_cast<double>(k * (n - k));
  return proposal * 0.5 * std::min(1.0, det_t / det_s);
}

/// Greedy start: the k largest diagonal entries, repaired by random swaps
/// (at most n*k) until det(L_SS) > 0.
template <class URBG>
ChainState mcmc_initial_state(const LEnsembleKernel& l, Index k, URBG& rng) {
  const Index n = l.n();
  if (k < 0 || k > n) throw ValidationError("mcmc_initial_state: k out of range");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return l.matrix()(a, a) > l.matrix()(b, b); });
  order.resize(static_cast<std::size_t>(k));
  SubsetSample s = SubsetSample::from_unsorted(order, n);
  double det = principal_minor(l.matrix(), s.span());
  for (Index attempt = 0; !is_nondegenerate(l.matrix(), s.span(), det); ++attempt) {
    if (attempt >= n * k)
      throw InitializationError("mcmc_initial_state: no size-" + std::to_string(k) +
                                " subset with positive determinant found after " + std::to_string(n * k) +
                                " swaps");
    const auto outside = detail::complement(s);
    std::uniform_int_distribution<Index> pick_in(0, k - 1);
    std::uniform_int_distribution<Index> pick_out(0, n - k - 1);
    s = detail::swap(s, s.indices()[static_cast<std::size_t>(pick_in(rng))],
                     outside[static_cast<std::size_t>(pick_out(rng))]);
    det = principal_minor(l.matrix(), s.span());
  }
  return ChainState{std::move(s), std::log(det), 0};
}

/// Approximate k-DPP_L(L) sample: the final state after `steps` transitions.
template <class URBG>
SubsetSample sample_kdpp_mcmc(const LEnsembleKernel& l, Index k, std::size_t steps, URBG& rng) {
  ChainState state = mcmc_initial_state(l, k, rng);
  for (std::size_t s = 0; s < steps; ++s) state = mcmc_step(l, std::move(state), rng);
  return state.current;
}

inline SubsetSample sample_kdpp_mcmc(const LEnsembleKernel& l, Index k, std::size_t steps, std::uint64_t seed) {
  Rng rng(seed);
  return sample_kdpp_mcmc(l, k, steps, rng);
}

/// ceil(C k^2 n log(n / eps)), the swap-chain step budget.
inline std::size_t default_step_budget(Index n, Index k, double eps, double c = 4.0) {
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("default_step_budget: eps must lie in (0, 1)");
  if (n < 1) throw ValidationError("default_step_budget: n must be positive");
  const double steps = c * static_cast<double>(k * k) * static_cast<double>(n) *
                       std::log(static_cast<double>(n) / eps);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(steps)));
}

}  // namespace dppla
