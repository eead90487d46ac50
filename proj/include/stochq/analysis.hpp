#pragma once

// Numerical checks for stochastic maximization: estimation error and
// similarity ratio, optimum-inclusion probability, expected maxima of
// uniform values, the random-subset Bellman operator Phi and its fixed
// point, and the memory hitting time.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "stochq/mdp.hpp"
#include "stochq/stochmax.hpp"
#include "stochq/tabular.hpp"

namespace stochq {

/// max over the whole row minus max over `candidates`; never negative.
double beta(std::span<const double> q_row, const CandidateSet& candidates);

/// stoch_max / max; absent when max <= 0.
std::optional<double> omega(std::span<const double> q_row, const CandidateSet& candidates);

struct InclusionEstimate {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t trials = 0;
  double empirical = 0.0;
  double expected = 0.0;  // k/n
  double sigma = 0.0;     // binomial standard error at k/n
  /// empirical >= k/n - 3 sigma
  bool meets_bound = false;
  /// |empirical - k/n| <= 3 sigma
  bool within_3_sigma = false;
};

/// Fraction of uniform k-subsets of n actions that contain a fixed optimum.
/// Throws invalid_params unless 1 <= k <= n and trials >= 10^4.
InclusionEstimate lemma1_probability(std::size_t n, std::size_t k, std::size_t trials,
                                     std::uint64_t seed);

struct MeanEstimate {
  double mean = 0.0;
  double std_dev = 0.0;
  std::size_t samples = 0;
  double standard_error() const;
};

struct UniformMaxEstimate {
  MeanEstimate observed;
  double predicted = 0.0;  // q_star - b / (k + 1)
  /// |mean - predicted| <= 4 standard errors
  bool pass = false;
};

/// Monte-Carlo mean of the largest of k values sampled without replacement
/// from n fresh iid U[q_star - b, q_star] values per trial. Throws
/// invalid_params unless b > 0 and 1 <= k <= n.
UniformMaxEstimate uniform_expected_max(std::size_t n, std::size_t k, double q_star, double b,
                                        std::size_t trials, std::uint64_t seed);

/// Memoryless stoch_max over a fixed value vector with fresh uniform
/// k-subsets, `queries` times.
MeanEstimate fixed_values_stoch_max(std::span<const double> values, std::size_t k,
                                    std::size_t queries, std::uint64_t seed);

struct HittingTimeStudy {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t runs = 0;
  /// Query index (1-based) at which beta first reached 0.
  MeanEstimate hit_time;
  std::size_t max_hit_time = 0;
  /// Runs that hit within the query budget.
  std::size_t hits = 0;
  /// Runs whose beta stayed 0 for every query after the hit.
  std::size_t persisted = 0;
  double bound = 0.0;  // n / k
};

/// Repeated greedy queries against a frozen value vector with per-state
/// memory (capacity 2): C = R u M, the chosen action is remembered. Each run
/// draws n - 1 values from U[0, 100) and places the optimum 100 at a random
/// index. Queries stop `after_hit` steps past the first hit or at `budget`.
HittingTimeStudy hitting_time_study(std::size_t n, std::size_t k, std::size_t runs,
                                    std::size_t budget, std::size_t after_hit, std::uint64_t seed);

/// Distribution over candidate sets for the Phi operator.
struct SubsetDistribution {
  enum class Kind { uniform_k, explicit_list, monte_carlo };
  Kind kind = Kind::uniform_k;
  std::size_t k = 1;
  /// explicit_list: (subset, probability); probabilities sum to 1.
  std::vector<std::pair<std::vector<ActionId>, double>> subsets;
  /// monte_carlo: number of uniform k-subsets drawn once and weighted equally.
  std::size_t samples = 0;
  std::uint64_t seed = 0;

  static SubsetDistribution uniform(std::size_t k) { return {Kind::uniform_k, k, {}, 0, 0}; }
  static SubsetDistribution monte_carlo(std::size_t k, std::size_t samples, std::uint64_t seed) {
    return {Kind::monte_carlo, k, {}, samples, seed};
  }
  static SubsetDistribution list(std::vector<std::pair<std::vector<ActionId>, double>> subsets) {
    return {Kind::explicit_list, 0, std::move(subsets), 0, 0};
  }
};

/// Exhaustive uniform enumeration is capped at this many actions.
inline constexpr std::size_t kMaxEnumeratedActions = 20;

class PhiOperator {
 public:
  /// Throws invalid_params (bad gamma, probabilities, empty or out-of-range
  /// subsets) or enumeration_too_large (uniform_k with n > 20).
  PhiOperator(FiniteMdp mdp, double gamma, SubsetDistribution distribution);

  const FiniteMdp& mdp() const noexcept { return mdp_; }
  double gamma() const noexcept { return gamma_; }
  std::size_t subset_count() const noexcept { return subsets_.size(); }

  /// (Phi q)(s,a) = sum_C P(C) sum_s' P(s'|s,a) [r(s,a) + gamma max_{b in C} q(s',b)]
  QTable apply(const QTable& q) const;

 private:
  FiniteMdp mdp_;
  double gamma_;
  // Flattened candidate sets with their probabilities.
  std::vector<std::vector<std::size_t>> subsets_;
  std::vector<double> weights_;
};

QTable phi_apply(const PhiOperator& phi, const QTable& q);

double sup_norm_distance(const QTable& a, const QTable& b);

struct FixedPointResult {
  QTable q;
  std::size_t iterations = 0;
  double last_step = 0.0;
};

/// Iterates Phi from zero until the step is below tolerance * (1 - gamma) /
/// gamma, so the result lies within `tolerance` of the fixed point. gamma = 0
/// stops after one application. Throws invalid_params for gamma >= 1 and
/// non_convergence when max_iters is exhausted.
FixedPointResult qstar_fixed_point(const PhiOperator& phi, double tolerance, std::size_t max_iters);

struct ContractionReport {
  std::size_t trials = 0;
  double max_ratio = 0.0;
  /// Pairs with ||Phi q1 - Phi q2|| > gamma ||q1 - q2|| + 1e-9.
  std::size_t violations = 0;
  bool pass() const noexcept { return violations == 0; }
};

/// Random pairs with entries U[-100, 100]. Throws invalid_params for
/// trials < 100.
ContractionReport contraction_check(const PhiOperator& phi, std::size_t trials, std::uint64_t seed);

}  // namespace stochq
