#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "stochq/stochmax.hpp"

using namespace stochq;

namespace {

std::set<std::size_t> as_set(const CandidateSet& c) {
  std::set<std::size_t> s;
  for (ActionId a : c.actions()) s.insert(a.index);
  return s;
}

}  // namespace

TEST_CASE("subset size is ceil(log2 n)") {
  CHECK(ceil_log2(1) == 0);
  CHECK(ceil_log2(2) == 1);
  CHECK(ceil_log2(16) == 4);
  CHECK(ceil_log2(17) == 5);
  CHECK(ceil_log2(512) == 9);
  CHECK(ceil_log2(1000) == 10);
  CHECK(ceil_log2(5000) == 13);
  CHECK(default_subset_size(1) == 1);
  CHECK(default_subset_size(1024) == 10);
}

TEST_CASE("sampling covers the trivial cases") {
  SubsetSampler one(1, 1, 3);
  CHECK(as_set(one.sample()) == std::set<std::size_t>{0});
  SubsetSampler full(4, 4, 3);
  CHECK(as_set(full.sample()) == std::set<std::size_t>{0, 1, 2, 3});
  SubsetSampler big(50, 50, 9);
  CHECK(big.sample().size() == 50);
}

TEST_CASE("invalid subset sizes are rejected") {
  auto code_of = [](std::size_t n, std::size_t k) {
    try {
      SubsetSampler s(n, k, 0);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::io;
  };
  CHECK(code_of(10, 0) == ErrorCode::invalid_config);
  CHECK(code_of(10, 11) == ErrorCode::invalid_config);
}

TEST_CASE("samples are distinct and in range") {
  for (std::size_t k : {1, 5, 32, 33, 90}) {
    SubsetSampler s(100, k, k);
    for (int i = 0; i < 200; ++i) {
      const auto c = s.sample();
      CHECK(c.size() == k);
      for (ActionId a : c.actions()) CHECK(a.index < 100);
    }
  }
}

TEST_CASE("inclusion frequency of a fixed action is k/n") {
  SubsetSampler s(256, 8, 11);
  std::size_t hits = 0;
  const std::size_t trials = 1000000;
  CandidateSet c;
  for (std::size_t t = 0; t < trials; ++t) {
    c.clear();
    s.sample_into(c);
    hits += c.contains(ActionId{17}) ? 1 : 0;
  }
  CHECK(std::abs(static_cast<double>(hits) / trials - 8.0 / 256.0) < 0.001);
}

TEST_CASE("inclusion frequency holds on the large-k path") {
  SubsetSampler s(100, 40, 5);
  std::vector<std::size_t> counts(100, 0);
  const std::size_t trials = 100000;
  for (std::size_t t = 0; t < trials; ++t) {
    const CandidateSet c = s.sample();
    for (ActionId a : c.actions()) ++counts[a.index];
  }
  const double p = 0.4;
  const double sigma = std::sqrt(p * (1 - p) / trials);
  for (std::size_t c : counts) CHECK(std::abs(static_cast<double>(c) / trials - p) < 4.5 * sigma);
}

TEST_CASE("every k-subset is equally likely") {
  // n=5, k=2: ten subsets; chi-square with 9 degrees of freedom, p = 0.001
  // critical value 27.88.
  SubsetSampler s(5, 2, 21);
  std::map<std::set<std::size_t>, std::size_t> freq;
  for (int t = 0; t < 100000; ++t) ++freq[as_set(s.sample())];
  REQUIRE(freq.size() == 10);
  std::vector<std::size_t> counts;
  for (const auto& [subset, c] : freq) counts.push_back(c);
  CHECK(oracle::chi_square_uniform(counts) < 27.88);
}

TEST_CASE("identical seeds give identical sample sequences") {
  SubsetSampler a(1000, 10, 77);
  SubsetSampler b(1000, 10, 77);
  SubsetSampler c(1000, 10, 78);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.sample();
    const auto y = b.sample();
    CHECK(std::equal(x.actions().begin(), x.actions().end(), y.actions().begin(), y.actions().end()));
    const auto z = c.sample();
    differs = differs || !std::equal(x.actions().begin(), x.actions().end(), z.actions().begin(), z.actions().end());
  }
  CHECK(differs);
}

TEST_CASE("candidate set union removes duplicates") {
  ActionMemory m = ActionMemory::per_state(1, 2);
  m.remember(0, ActionId{3});
  m.remember(0, ActionId{2});
  CandidateSet c;
  c.insert(ActionId{1});
  c.insert(ActionId{2});
  m.recall_into(0, c);
  CHECK(as_set(c) == std::set<std::size_t>{1, 2, 3});
  CHECK(c.size() == 3);
}

TEST_CASE("memory mode none leaves C = R") {
  SubsetSampler s(6, 1, 4);
  SubsetSampler twin(6, 1, 4);
  ActionMemory none = ActionMemory::none();
  none.remember(0, ActionId{5});
  for (int i = 0; i < 20; ++i) {
    const auto c = build_candidates(s, none, 0);
    CHECK(as_set(c) == as_set(twin.sample()));
  }
  CHECK(none.stored() == 0);
  CHECK(none.recall(0).empty());
}

TEST_CASE("candidate set never exceeds 2 ceil(log2 n)") {
  const std::size_t n = 1000;
  const std::size_t k = default_subset_size(n);
  SubsetSampler s(n, k, 1);
  ActionMemory per_state = ActionMemory::per_state(3, 2);
  ActionMemory global = ActionMemory::global(2 * k, k, 2);
  Rng rng(3);
  for (int i = 0; i < 5000; ++i) {
    per_state.remember(i % 3, ActionId{uniform_index(rng, n)});
    global.remember(0, ActionId{uniform_index(rng, n)});
    CHECK(build_candidates(s, per_state, i % 3).size() <= 20);
    const auto c = build_candidates(s, global, 0);
    CHECK(c.size() <= 20);
    CHECK(c.size() >= 1);
  }
}

TEST_CASE("per-state memory keeps the two most recent exploited actions") {
  ActionMemory m = ActionMemory::per_state(2, 2);
  m.remember(0, ActionId{4});
  m.remember(0, ActionId{7});
  m.remember(0, ActionId{9});
  CHECK(m.recall(0) == std::vector<ActionId>{ActionId{9}, ActionId{7}});
  m.remember(0, ActionId{7});
  CHECK(m.recall(0) == std::vector<ActionId>{ActionId{7}, ActionId{9}});
  CHECK(m.recall(1).empty());
  ActionMemory single = ActionMemory::per_state(1, 1);
  single.remember(0, ActionId{1});
  single.remember(0, ActionId{2});
  CHECK(single.recall(0) == std::vector<ActionId>{ActionId{2}});
}

TEST_CASE("an exploited action persists in memory while nothing else is exploited") {
  const std::size_t n = 64;
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = static_cast<double>((i * 37) % n);
  const ActionId best{static_cast<std::size_t>(std::max_element(q.begin(), q.end()) - q.begin())};
  SubsetSampler s(n, 3, 8);
  ActionMemory m = ActionMemory::per_state(1, 2);
  m.remember(0, best);
  auto value = [&](ActionId a) { return q[a.index]; };
  for (int t = 0; t < 1000; ++t) {
    const auto c = build_candidates(s, m, 0);
    CHECK(c.contains(best));
    const ActionId chosen = stoch_argmax(value, c);
    CHECK(chosen == best);
    m.remember(0, chosen);
  }
}

TEST_CASE("global memory returns min(sample size, stored) distinct slots") {
  ActionMemory m = ActionMemory::global(6, 3, 5);
  CHECK(m.recall(0).empty());
  m.remember(0, ActionId{10});
  CHECK(m.recall(0).size() == 1);
  m.remember(0, ActionId{11});
  m.remember(0, ActionId{12});
  m.remember(0, ActionId{13});
  CHECK(m.recall(0).size() == 3);
  for (std::size_t a = 20; a < 26; ++a) m.remember(0, ActionId{a});
  CHECK(m.stored() == 6);
  for (int i = 0; i < 100; ++i) {
    for (ActionId a : m.recall(0)) CHECK(a.index >= 20);
  }
}

TEST_CASE("stoch_max and stoch_argmax") {
  auto identity = [](ActionId a) { return static_cast<double>(a.index); };
  const CandidateSet c(std::vector<ActionId>{ActionId{3}, ActionId{9}, ActionId{12}});
  CHECK(stoch_max(identity, c) == 12.0);
  CHECK(stoch_argmax(identity, c) == ActionId{12});

  auto seven = [](ActionId) { return 7.0; };
  CHECK(stoch_max(seven, CandidateSet::all(16)) == 7.0);

  CHECK(stoch_argmax(identity, CandidateSet(std::vector<ActionId>{ActionId{4}})) == ActionId{4});
  const CandidateSet ties(std::vector<ActionId>{ActionId{5}, ActionId{2}, ActionId{8}});
  CHECK(stoch_argmax(seven, ties) == ActionId{2});

  CHECK_THROWS_AS(stoch_max(identity, CandidateSet{}), Error);
  try {
    stoch_argmax(identity, CandidateSet{});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::empty_candidates);
  }
}

TEST_CASE("full cover matches the exact maximum") {
  Rng rng(12);
  std::vector<double> q(40);
  for (int trial = 0; trial < 100; ++trial) {
    for (double& v : q) v = static_cast<double>(uniform_index(rng, 10));
    auto value = [&](ActionId a) { return q[a.index]; };
    const auto exact = exact_best(value, q.size());
    const auto stoch = stoch_best(value, CandidateSet::all(q.size()));
    CHECK(stoch.second == exact.second);
    CHECK(stoch.first == exact.first);
  }
}

TEST_CASE("stoch_max never exceeds the exact maximum") {
  Rng rng(13);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<double> q(300);
  SubsetSampler s(300, 9, 14);
  for (int trial = 0; trial < 2000; ++trial) {
    for (double& v : q) v = u(rng);
    auto value = [&](ActionId a) { return q[a.index]; };
    CHECK(stoch_max(value, s.sample()) <= exact_best(value, q.size()).second);
  }
}
