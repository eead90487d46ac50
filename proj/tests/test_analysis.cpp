#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "stochq/analysis.hpp"
#include "stochq/mdp.hpp"

using namespace stochq;

namespace {

double sup_norm(std::span<const double> a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

QTable random_table(std::size_t ns, std::size_t na, Rng& rng, double lo = -10.0, double hi = 10.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  QTable q(ns, na);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < na; ++a) q(s, ActionId{a}) = u(rng);
  }
  return q;
}

}  // namespace

TEST_CASE("beta and omega examples") {
  const std::vector<double> q = {10.0, 7.0, 3.0};
  const CandidateSet sub(std::vector<ActionId>{ActionId{1}, ActionId{2}});
  CHECK(beta(q, sub) == 3.0);
  CHECK(*omega(q, sub) == doctest::Approx(0.7));
  CHECK(beta(q, CandidateSet::all(3)) == 0.0);
  CHECK(*omega(q, CandidateSet::all(3)) == 1.0);
  const std::vector<double> negative = {-1.0, -2.0};
  CHECK_FALSE(omega(negative, CandidateSet::all(2)).has_value());
  CHECK(beta(negative, CandidateSet(std::vector<ActionId>{ActionId{1}})) == 1.0);
}

TEST_CASE("omega equals 1 - beta / max for positive maxima") {
  Rng rng(1);
  std::uniform_real_distribution<double> u(0.1, 50.0);
  SubsetSampler s(40, 6, 2);
  std::vector<double> q(40);
  for (int trial = 0; trial < 500; ++trial) {
    for (double& v : q) v = u(rng);
    const auto c = s.sample();
    const double m = *std::max_element(q.begin(), q.end());
    CHECK(beta(q, c) >= 0.0);
    CHECK(*omega(q, c) == doctest::Approx(1.0 - beta(q, c) / m).epsilon(1e-12));
  }
}

TEST_CASE("inclusion probability") {
  const auto full = lemma1_probability(16, 16, 10000, 0);
  CHECK(full.empirical == 1.0);
  const auto e = lemma1_probability(256, 8, 1000000, 1);
  CHECK(e.expected == 0.03125);
  CHECK(e.within_3_sigma);
  CHECK(e.meets_bound);
  const auto g = lemma1_probability(1000, 10, 1000000, 2);
  CHECK(g.meets_bound);
  CHECK_THROWS_AS(lemma1_probability(10, 11, 10000, 0), Error);
  CHECK_THROWS_AS(lemma1_probability(10, 2, 100, 0), Error);
}

TEST_CASE("expected maximum of uniform values") {
  const auto e = uniform_expected_max(5000, 10, 100.0, 100.0, 10000, 3);
  CHECK(e.predicted == doctest::Approx(100.0 - 100.0 / 11.0));
  CHECK(e.pass);
  const auto one = uniform_expected_max(100, 1, 100.0, 100.0, 20000, 4);
  CHECK(one.predicted == 50.0);
  CHECK(one.pass);
  CHECK_THROWS_AS(uniform_expected_max(10, 2, 1.0, 0.0, 10, 0), Error);
}

TEST_CASE("fixed-value stochastic max agrees with the order-statistic oracle") {
  Rng rng(5);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::vector<double> values(500);
  for (double& v : values) v = u(rng);
  const auto est = fixed_values_stoch_max(values, 9, 20000, 6);
  CHECK(std::abs(est.mean - oracle::expected_subset_max(values, 9)) < 4.0 * est.standard_error());
}

TEST_CASE("memory hits the optimum and keeps it") {
  const auto s = hitting_time_study(200, 8, 1000, 5000, 50, 7);
  CHECK(s.hits == 1000);
  CHECK(s.persisted == 1000);
  CHECK(s.bound == 25.0);
  CHECK(s.hit_time.mean <= s.bound + 3.0 * s.hit_time.standard_error());
  CHECK(s.hit_time.mean >= 1.0);
}

TEST_CASE("Phi with k = n is the Bellman optimality operator") {
  const FiniteMdp mdp = make_random_mdp(3, 4, RewardDistribution::uniform(0.0, 1.0), 8);
  const PhiOperator phi(mdp, 0.9, SubsetDistribution::uniform(4));
  CHECK(phi.subset_count() == 1);
  Rng rng(9);
  const QTable q = random_table(3, 4, rng);
  const QTable out = phi.apply(q);
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t a = 0; a < 4; ++a) {
      double future = 0.0;
      for (std::size_t t = 0; t < 3; ++t) {
        double m = q(t, ActionId{0});
        for (std::size_t b = 1; b < 4; ++b) m = std::max(m, q(t, ActionId{b}));
        future += mdp.transition(s, a, t) * m;
      }
      CHECK(out(s, ActionId{a}) == doctest::Approx(mdp.reward(s, a) + 0.9 * future).epsilon(1e-12));
    }
  }
}

TEST_CASE("Phi on a single state and action has fixed point 1/(1 - gamma)") {
  const FiniteMdp mdp(1, 1, {1.0}, {1.0});
  const PhiOperator phi(mdp, 0.95, SubsetDistribution::uniform(1));
  const auto r = qstar_fixed_point(phi, 1e-10, 100000);
  CHECK(std::abs(r.q(0, ActionId{0}) - 20.0) < 1e-10);
}

TEST_CASE("Phi matches the order-statistic oracle for every k") {
  const FiniteMdp mdp = make_random_mdp(3, 5, RewardDistribution::uniform(0.0, 1.0), 10);
  Rng rng(11);
  const QTable q = random_table(3, 5, rng);
  for (std::size_t k = 1; k <= 5; ++k) {
    const PhiOperator phi(mdp, 0.8, SubsetDistribution::uniform(k));
    const QTable out = phi.apply(q);
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t a = 0; a < 5; ++a) {
        double future = 0.0;
        for (std::size_t t = 0; t < 3; ++t) {
          const auto row = q.row(t);
          future += mdp.transition(s, a, t) * oracle::expected_subset_max({row.begin(), row.end()}, k);
        }
        CHECK(out(s, ActionId{a}) == doctest::Approx(mdp.reward(s, a) + 0.8 * future).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("fixed point agrees with independent value iteration") {
  const FiniteMdp mdp = make_random_mdp(3, 5, RewardDistribution::uniform(0.0, 1.0), 12);
  const auto full = qstar_fixed_point(PhiOperator(mdp, 0.9, SubsetDistribution::uniform(5)), 1e-11, 100000);
  CHECK(sup_norm(full.q.values(), oracle::value_iteration(mdp, 0.9)) < 1e-8);
  const auto two = qstar_fixed_point(PhiOperator(mdp, 0.9, SubsetDistribution::uniform(2)), 1e-11, 100000);
  CHECK(sup_norm(two.q.values(), oracle::subset_value_iteration(mdp, 0.9, 2)) < 1e-8);
}

TEST_CASE("fixed point is nondecreasing in k") {
  const FiniteMdp mdp = make_random_mdp(3, 5, RewardDistribution::uniform(0.0, 1.0), 13);
  std::vector<QTable> q;
  for (std::size_t k = 1; k <= 5; ++k) {
    q.push_back(qstar_fixed_point(PhiOperator(mdp, 0.9, SubsetDistribution::uniform(k)), 1e-11, 100000).q);
  }
  for (std::size_t k = 1; k < 5; ++k) {
    for (std::size_t i = 0; i < 15; ++i) CHECK(q[k - 1].values()[i] <= q[k].values()[i] + 1e-12);
  }
}

TEST_CASE("gamma 0 fixed point is the reward table after one iteration") {
  const FiniteMdp mdp = make_random_mdp(2, 3, RewardDistribution::uniform(-1.0, 1.0), 14);
  const auto r = qstar_fixed_point(PhiOperator(mdp, 0.0, SubsetDistribution::uniform(2)), 1e-9, 10);
  CHECK(r.iterations == 1);
  for (std::size_t i = 0; i < 6; ++i) CHECK(r.q.values()[i] == mdp.rewards()[i]);
}

TEST_CASE("fixed point output satisfies the fixed-point equation") {
  const FiniteMdp mdp = make_random_mdp(4, 6, RewardDistribution::uniform(0.0, 1.0), 15);
  const PhiOperator phi(mdp, 0.95, SubsetDistribution::uniform(3));
  const double tol = 1e-6;
  const auto r = qstar_fixed_point(phi, tol, 100000);
  CHECK(sup_norm_distance(phi.apply(r.q), r.q) < 2.0 * tol);
  CHECK_THROWS_AS(qstar_fixed_point(phi, 1e-12, 2), Error);
}

TEST_CASE("constant shift scales by exactly gamma") {
  const FiniteMdp mdp = make_random_mdp(3, 4, RewardDistribution::uniform(0.0, 1.0), 16);
  const PhiOperator phi(mdp, 0.7, SubsetDistribution::uniform(2));
  Rng rng(17);
  const QTable q1 = random_table(3, 4, rng);
  QTable q2 = q1;
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t a = 0; a < 4; ++a) q2(s, ActionId{a}) += 5.0;
  }
  CHECK(sup_norm_distance(phi.apply(q1), phi.apply(q2)) == doctest::Approx(0.7 * 5.0).epsilon(1e-12));
  CHECK(sup_norm_distance(phi.apply(q1), phi.apply(q1)) == 0.0);
}

TEST_CASE("Phi is monotone") {
  const FiniteMdp mdp = make_random_mdp(3, 5, RewardDistribution::uniform(0.0, 1.0), 18);
  const PhiOperator phi(mdp, 0.9, SubsetDistribution::uniform(2));
  Rng rng(19);
  std::uniform_real_distribution<double> bump(0.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const QTable lo = random_table(3, 5, rng);
    QTable hi = lo;
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t a = 0; a < 5; ++a) hi(s, ActionId{a}) += bump(rng);
    }
    const QTable a = phi.apply(lo);
    const QTable b = phi.apply(hi);
    for (std::size_t i = 0; i < 15; ++i) CHECK(a.values()[i] <= b.values()[i] + 1e-12);
  }
}

TEST_CASE("contraction holds and gamma 0 gives ratio 0") {
  const FiniteMdp mdp = make_random_mdp(4, 6, RewardDistribution::uniform(0.0, 1.0), 20);
  for (double gamma : {0.5, 0.9, 0.99}) {
    const auto r = contraction_check(PhiOperator(mdp, gamma, SubsetDistribution::uniform(3)), 200, 21);
    CHECK(r.pass());
    CHECK(r.max_ratio <= gamma + 1e-9);
  }
  const auto zero = contraction_check(PhiOperator(mdp, 0.0, SubsetDistribution::uniform(3)), 100, 22);
  CHECK(zero.max_ratio == 0.0);
  CHECK_THROWS_AS(contraction_check(PhiOperator(mdp, 0.5, SubsetDistribution::uniform(3)), 10, 0), Error);
}

TEST_CASE("explicit and Monte-Carlo subset distributions") {
  const FiniteMdp mdp = make_random_mdp(2, 3, RewardDistribution::uniform(0.0, 1.0), 23);
  Rng rng(24);
  const QTable q = random_table(2, 3, rng);
  // Uniform 2-subsets of three actions listed by hand.
  const PhiOperator listed(mdp, 0.9,
                           SubsetDistribution::list({{{ActionId{0}, ActionId{1}}, 1.0 / 3.0},
                                                     {{ActionId{0}, ActionId{2}}, 1.0 / 3.0},
                                                     {{ActionId{1}, ActionId{2}}, 1.0 / 3.0}}));
  const PhiOperator enumerated(mdp, 0.9, SubsetDistribution::uniform(2));
  CHECK(sup_norm_distance(listed.apply(q), enumerated.apply(q)) < 1e-12);

  const PhiOperator sampled(mdp, 0.9, SubsetDistribution::monte_carlo(2, 300000, 25));
  CHECK(sup_norm_distance(sampled.apply(q), enumerated.apply(q)) < 0.1);

  CHECK_THROWS_AS(PhiOperator(mdp, 0.9, SubsetDistribution::list({{{ActionId{0}}, 0.5}})), Error);
  CHECK_THROWS_AS(PhiOperator(mdp, 0.9, SubsetDistribution::list({{{ActionId{7}}, 1.0}})), Error);
  CHECK_THROWS_AS(PhiOperator(mdp, 1.5, SubsetDistribution::uniform(2)), Error);
  const FiniteMdp wide = make_random_mdp(1, 21, RewardDistribution::uniform(0.0, 1.0), 26);
  try {
    PhiOperator(wide, 0.9, SubsetDistribution::uniform(3));
    FAIL("expected enumeration-too-large");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::enumeration_too_large);
  }
}
