#include "stochq/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace stochq {

namespace {

double row_max(std::span<const double> row) {
  if (row.empty()) throw Error(ErrorCode::empty_candidates, "empty value row");
  return *std::max_element(row.begin(), row.end());
}

double candidate_max(std::span<const double> row, const CandidateSet& candidates) {
  for (ActionId a : candidates.actions()) {
    if (a.index >= row.size()) throw Error(ErrorCode::index_out_of_range, "candidate outside row");
  }
  return stoch_max([&](ActionId a) { return row[a.index]; }, candidates);
}

// Welford accumulator.
class Moments {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  MeanEstimate result() const {
    MeanEstimate e;
    e.mean = mean_;
    e.samples = n_;
    e.std_dev = n_ > 1 ? std::sqrt(m2_ / static_cast<double>(n_ - 1)) : 0.0;
    return e;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

void require_subset_size(std::size_t n, std::size_t k) {
  if (k < 1 || k > n) {
    throw Error(ErrorCode::invalid_params, "subset size must satisfy 1 <= k <= n");
  }
}

}  // namespace

double beta(std::span<const double> q_row, const CandidateSet& candidates) {
  return row_max(q_row) - candidate_max(q_row, candidates);
}

std::optional<double> omega(std::span<const double> q_row, const CandidateSet& candidates) {
  const double best = row_max(q_row);
  const double approx = candidate_max(q_row, candidates);
  if (!(best > 0.0)) return std::nullopt;
  return approx / best;
}

double MeanEstimate::standard_error() const {
  return samples == 0 ? 0.0 : std_dev / std::sqrt(static_cast<double>(samples));
}

InclusionEstimate lemma1_probability(std::size_t n, std::size_t k, std::size_t trials,
                                     std::uint64_t seed) {
  require_subset_size(n, k);
  if (trials < 10000) throw Error(ErrorCode::invalid_params, "at least 10^4 trials required");
  SubsetSampler sampler(n, k, seed);
  Rng rng(derive_seed(seed, SeedStream::env));
  const ActionId optimum{uniform_index(rng, n)};
  std::size_t hits = 0;
  CandidateSet subset;
  for (std::size_t t = 0; t < trials; ++t) {
    subset.clear();
    sampler.sample_into(subset);
    hits += subset.contains(optimum) ? 1 : 0;
  }
  InclusionEstimate e;
  e.n = n;
  e.k = k;
  e.trials = trials;
  e.empirical = static_cast<double>(hits) / static_cast<double>(trials);
  e.expected = static_cast<double>(k) / static_cast<double>(n);
  e.sigma = std::sqrt(e.expected * (1.0 - e.expected) / static_cast<double>(trials));
  e.meets_bound = e.empirical >= e.expected - 3.0 * e.sigma;
  e.within_3_sigma = std::abs(e.empirical - e.expected) <= 3.0 * e.sigma;
  return e;
}

UniformMaxEstimate uniform_expected_max(std::size_t n, std::size_t k, double q_star, double b,
                                        std::size_t trials, std::uint64_t seed) {
  require_subset_size(n, k);
  if (!(b > 0.0)) throw Error(ErrorCode::invalid_params, "interval width b must be positive");
  if (trials < 2) throw Error(ErrorCode::invalid_params, "at least 2 trials required");
  // Values outside the sampled subset never influence its maximum, so only
  // the k sampled entries of each fresh table are materialized.
  Rng rng(seed);
  std::uniform_real_distribution<double> value(q_star - b, q_star);
  Moments m;
  for (std::size_t t = 0; t < trials; ++t) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) best = std::max(best, value(rng));
    m.add(best);
  }
  UniformMaxEstimate e;
  e.observed = m.result();
  e.predicted = q_star - b / static_cast<double>(k + 1);
  e.pass = std::abs(e.observed.mean - e.predicted) <= 4.0 * e.observed.standard_error();
  return e;
}

MeanEstimate fixed_values_stoch_max(std::span<const double> values, std::size_t k,
                                    std::size_t queries, std::uint64_t seed) {
  require_subset_size(values.size(), k);
  SubsetSampler sampler(values.size(), k, seed);
  auto q = [&](ActionId a) { return values[a.index]; };
  Moments m;
  CandidateSet subset;
  for (std::size_t t = 0; t < queries; ++t) {
    subset.clear();
    sampler.sample_into(subset);
    m.add(stoch_max(q, subset));
  }
  return m.result();
}

HittingTimeStudy hitting_time_study(std::size_t n, std::size_t k, std::size_t runs,
                                    std::size_t budget, std::size_t after_hit, std::uint64_t seed) {
  require_subset_size(n, k);
  if (runs == 0 || budget == 0) throw Error(ErrorCode::invalid_params, "runs and budget must be positive");
  constexpr double kOptimum = 100.0;
  HittingTimeStudy study;
  study.n = n;
  study.k = k;
  study.runs = runs;
  study.bound = static_cast<double>(n) / static_cast<double>(k);
  Moments times;
  std::vector<double> values(n);
  for (std::size_t r = 0; r < runs; ++r) {
    const std::uint64_t run_seed = derive_seed(seed, r);
    Rng rng(derive_seed(run_seed, SeedStream::env));
    std::uniform_real_distribution<double> draw(0.0, kOptimum);
    for (double& v : values) v = draw(rng);
    values[uniform_index(rng, n)] = kOptimum;

    SubsetSampler sampler(n, k, derive_seed(run_seed, SeedStream::sampler));
    ActionMemory memory = ActionMemory::per_state(1, 2);
    auto q = [&](ActionId a) { return values[a.index]; };
    std::size_t hit = 0;
    bool stayed = true;
    for (std::size_t query = 1; query <= budget; ++query) {
      const CandidateSet c = build_candidates(sampler, memory, 0);
      const auto [action, best] = stoch_best(q, c);
      memory.remember(0, action);
      const bool exact = best == kOptimum;
      if (hit == 0 && exact) hit = query;
      if (hit != 0 && !exact) stayed = false;
      if (hit != 0 && query >= hit + after_hit) break;
    }
    if (hit != 0) {
      ++study.hits;
      times.add(static_cast<double>(hit));
      study.max_hit_time = std::max(study.max_hit_time, hit);
      if (stayed) ++study.persisted;
    }
  }
  study.hit_time = times.result();
  return study;
}

PhiOperator::PhiOperator(FiniteMdp mdp, double gamma, SubsetDistribution distribution)
    : mdp_(std::move(mdp)), gamma_(gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error(ErrorCode::invalid_params, "gamma must lie in [0, 1]");
  const std::size_t n = mdp_.n_actions();
  switch (distribution.kind) {
    case SubsetDistribution::Kind::uniform_k: {
      require_subset_size(n, distribution.k);
      if (n > kMaxEnumeratedActions) {
        throw Error(ErrorCode::enumeration_too_large,
                    "uniform subset enumeration is limited to 20 actions; use Monte-Carlo mode");
      }
      const std::size_t k = distribution.k;
      std::vector<std::size_t> idx(k);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      while (true) {
        subsets_.push_back(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
      }
      weights_.assign(subsets_.size(), 1.0 / static_cast<double>(subsets_.size()));
      break;
    }
    case SubsetDistribution::Kind::monte_carlo: {
      require_subset_size(n, distribution.k);
      if (distribution.samples == 0) throw Error(ErrorCode::invalid_params, "Monte-Carlo mode needs samples");
      Rng rng(distribution.seed);
      for (std::size_t i = 0; i < distribution.samples; ++i) {
        std::vector<std::size_t> s;
        sample_distinct(n, distribution.k, rng, s);
        subsets_.push_back(std::move(s));
      }
      weights_.assign(subsets_.size(), 1.0 / static_cast<double>(subsets_.size()));
      break;
    }
    case SubsetDistribution::Kind::explicit_list: {
      if (distribution.subsets.empty()) throw Error(ErrorCode::invalid_params, "empty subset list");
      double total = 0.0;
      for (const auto& [subset, p] : distribution.subsets) {
        if (subset.empty()) throw Error(ErrorCode::invalid_params, "empty candidate set");
        if (!(p >= 0.0)) throw Error(ErrorCode::invalid_params, "negative subset probability");
        std::vector<std::size_t> s;
        for (ActionId a : subset) {
          if (a.index >= n) throw Error(ErrorCode::invalid_params, "subset action out of range");
          s.push_back(a.index);
        }
        subsets_.push_back(std::move(s));
        weights_.push_back(p);
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::invalid_params, "subset probabilities must sum to 1");
      break;
    }
  }
}

QTable PhiOperator::apply(const QTable& q) const {
  const std::size_t ns = mdp_.n_states();
  const std::size_t na = mdp_.n_actions();
  if (q.n_states() != ns || q.n_actions() != na) throw Error(ErrorCode::shape_mismatch, "Q table shape");
  // The subset distribution does not depend on (s, a), so the expected
  // subset maximum at each successor is shared by every row.
  std::vector<double> expected_max(ns, 0.0);
  for (std::size_t s = 0; s < ns; ++s) {
    const auto row = q.row(s);
    double acc = 0.0;
    for (std::size_t c = 0; c < subsets_.size(); ++c) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t b : subsets_[c]) best = std::max(best, row[b]);
      acc += weights_[c] * best;
    }
    expected_max[s] = acc;
  }
  QTable out(ns, na);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      const auto p = mdp_.next_distribution(s, a);
      double future = 0.0;
      for (std::size_t next = 0; next < ns; ++next) future += p[next] * expected_max[next];
      out(s, ActionId{a}) = mdp_.reward(s, a) + gamma_ * future;
    }
  }
  return out;
}

QTable phi_apply(const PhiOperator& phi, const QTable& q) { return phi.apply(q); }

double sup_norm_distance(const QTable& a, const QTable& b) {
  if (a.n_states() != b.n_states() || a.n_actions() != b.n_actions()) {
    throw Error(ErrorCode::shape_mismatch, "Q table shapes differ");
  }
  double d = 0.0;
  const auto va = a.values();
  const auto vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) d = std::max(d, std::abs(va[i] - vb[i]));
  return d;
}

FixedPointResult qstar_fixed_point(const PhiOperator& phi, double tolerance, std::size_t max_iters) {
  const double gamma = phi.gamma();
  if (!(gamma < 1.0)) throw Error(ErrorCode::invalid_params, "fixed point requires gamma < 1");
  if (!(tolerance > 0.0)) throw Error(ErrorCode::invalid_params, "tolerance must be positive");
  FixedPointResult r{QTable(phi.mdp().n_states(), phi.mdp().n_actions()), 0, 0.0};
  const double threshold = gamma == 0.0 ? std::numeric_limits<double>::infinity()
                                        : tolerance * (1.0 - gamma) / gamma;
  while (r.iterations < max_iters) {
    QTable next = phi.apply(r.q);
    r.last_step = sup_norm_distance(next, r.q);
    r.q = std::move(next);
    ++r.iterations;
    if (r.last_step < threshold) return r;
  }
  throw Error(ErrorCode::non_convergence, "Phi iteration did not converge within max_iters");
}

ContractionReport contraction_check(const PhiOperator& phi, std::size_t trials, std::uint64_t seed) {
  if (trials < 100) throw Error(ErrorCode::invalid_params, "at least 100 trials required");
  const std::size_t ns = phi.mdp().n_states();
  const std::size_t na = phi.mdp().n_actions();
  Rng rng(seed);
  std::uniform_real_distribution<double> entry(-100.0, 100.0);
  ContractionReport report;
  report.trials = trials;
  QTable q1(ns, na);
  QTable q2(ns, na);
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t a = 0; a < na; ++a) {
        q1(s, ActionId{a}) = entry(rng);
        q2(s, ActionId{a}) = entry(rng);
      }
    }
    const double before = sup_norm_distance(q1, q2);
    const double after = sup_norm_distance(phi.apply(q1), phi.apply(q2));
    if (after > phi.gamma() * before + 1e-9) ++report.violations;
    if (before > 0.0) report.max_ratio = std::max(report.max_ratio, after / before);
  }
  return report;
}

}  // namespace stochq
