#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "stochq/envs.hpp"
#include "stochq/mdp.hpp"
#include "stochq/runner.hpp"
#include "stochq/tabular.hpp"

using namespace stochq;

namespace {

TabularAgentConfig exact_q() {
  TabularAgentConfig c;
  c.maximization = Maximization::exact;
  c.memory = MemoryMode::none;
  return c;
}

}  // namespace

TEST_CASE("learning rate and exploration schedules") {
  CHECK(learning_rate(1) == 1.0);
  CHECK(learning_rate(32) == doctest::Approx(0.0625).epsilon(1e-15));
  CHECK(learning_rate(1024) == doctest::Approx(0.00390625).epsilon(1e-15));
  CHECK(exploration_rate(1) == 1.0);
  CHECK(exploration_rate(4) == 0.5);
  CHECK(exploration_rate(100) == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("config validation") {
  TabularAgentConfig c;
  CHECK_NOTHROW(c.validate());
  c.gamma = 1.2;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.lr_exponent = 0.5;
  CHECK_THROWS_AS(c.validate(), Error);
  c.lr_exponent = 1.0;
  CHECK_NOTHROW(c.validate());
  c.memory = MemoryMode::global;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.fixed_epsilon = 1.5;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("epsilon = 1 selects uniformly") {
  // 16 cells, 15 degrees of freedom, p = 0.001 critical value 37.70.
  SubsetSampler sampler(16, 4, 1);
  ActionMemory memory = ActionMemory::per_state(1, 2);
  Rng rng(2);
  auto zero = [](ActionId) { return 0.0; };
  std::vector<std::size_t> counts(16, 0);
  for (int i = 0; i < 100000; ++i) {
    const auto sel = select_action(zero, 16, 0, 1.0, Maximization::stochastic, sampler, memory, rng);
    CHECK_FALSE(sel.exploited);
    ++counts[sel.action.index];
  }
  CHECK(oracle::chi_square_uniform(counts) < 37.70);
  CHECK(memory.recall(0).empty());
}

TEST_CASE("epsilon = 0 picks the greedy action") {
  const std::vector<double> q = {1.0, 5.0, 2.0};
  auto value = [&](ActionId a) { return q[a.index]; };
  SubsetSampler sampler(3, 3, 1);
  ActionMemory memory = ActionMemory::per_state(1, 2);
  Rng rng(2);
  const auto exact = select_action(value, 3, 0, 0.0, Maximization::exact, sampler, memory, rng);
  CHECK(exact.action == ActionId{1});
  CHECK(exact.exploited);
  const auto stoch = select_action(value, 3, 0, 0.0, Maximization::stochastic, sampler, memory, rng);
  CHECK(stoch.action == ActionId{1});
  CHECK(memory.recall(0) == std::vector<ActionId>{ActionId{1}});
}

TEST_CASE("first Q update with gamma 0 copies the reward") {
  QTable q(2, 3);
  TabularAgentConfig c = exact_q();
  c.gamma = 0.0;
  SubsetSampler sampler(3, 2, 0);
  ActionMemory memory = ActionMemory::none();
  q_update(q, {0, ActionId{1}, 3.0, 1, false}, c, sampler, memory);
  CHECK(q(0, ActionId{1}) == 3.0);
  CHECK(q.visits(0, ActionId{1}) == 2);
  CHECK(q.state_visits(0) == 2);
  CHECK(q.visits(0, ActionId{0}) == 1);
}

TEST_CASE("terminal transitions bootstrap zero") {
  QTable q(2, 2);
  q(1, ActionId{0}) = 100.0;
  TabularAgentConfig c = exact_q();
  SubsetSampler sampler(2, 1, 0);
  ActionMemory memory = ActionMemory::none();
  q_update(q, {0, ActionId{0}, -1.0, 1, true}, c, sampler, memory);
  CHECK(q(0, ActionId{0}) == -1.0);
  q_update(q, {0, ActionId{1}, -1.0, 1, false}, c, sampler, memory);
  CHECK(q(0, ActionId{1}) == -1.0 + 0.95 * 100.0);
}

TEST_CASE("single state, single action reaches 1/(1 - gamma)") {
  // With alpha = z^-0.8 the error shrinks like exp(-0.05 * 5 z^0.2), so
  // 1e-3 needs on the order of 1e8 updates; the error after 1e4 updates
  // matches the closed-form recursion.
  QTable q(1, 1);
  TabularAgentConfig c = exact_q();
  SubsetSampler sampler(1, 1, 0);
  ActionMemory memory = ActionMemory::none();
  double reference = 0.0;
  std::uint64_t t = 0;
  for (; t < 10000; ++t) {
    const double alpha = std::pow(static_cast<double>(t + 1), -0.8);
    reference = (1.0 - alpha) * reference + alpha * (1.0 + 0.95 * reference);
    q_update(q, {0, ActionId{0}, 1.0, 0, false}, c, sampler, memory);
  }
  CHECK(q(0, ActionId{0}) == doctest::Approx(reference).epsilon(1e-12));
  while (std::abs(q(0, ActionId{0}) - 20.0) >= 1e-3 && t < 200000000) {
    q_update(q, {0, ActionId{0}, 1.0, 0, false}, c, sampler, memory);
    ++t;
  }
  CHECK(std::abs(q(0, ActionId{0}) - 20.0) < 1e-3);
  CHECK(q(0, ActionId{0}) <= 20.0);
}

TEST_CASE("stochastic Q-learning converges to the random-subset fixed point") {
  const FiniteMdp mdp = make_random_mdp(3, 5, RewardDistribution::uniform(0.0, 1.0), 3);
  const double gamma = 0.5;
  const auto q_star = oracle::subset_value_iteration(mdp, gamma, 2);
  TabularAgentConfig c;
  c.gamma = gamma;
  c.subset_size = 2;
  c.memory = MemoryMode::none;
  c.fixed_epsilon = 0.3;
  TabularAgent agent(3, 5, c, 4);
  GeneratedMdp env(mdp, 200, 5);
  TabularTrainer trainer(env, agent, false);
  for (int t = 0; t < 200000; ++t) trainer.step();
  double dist = 0.0;
  for (std::size_t i = 0; i < q_star.size(); ++i) dist = std::max(dist, std::abs(agent.table().values()[i] - q_star[i]));
  CHECK(dist < 0.05);
}

TEST_CASE("double Q with gamma 0 averages the reward") {
  TabularAgentConfig c;
  c.algorithm = TabularAlgorithm::double_q;
  c.gamma = 0.0;
  c.lr_exponent = 1.0;
  QTable qa(1, 2), qb(1, 2);
  SubsetSampler sampler(2, 1, 0);
  ActionMemory memory = ActionMemory::per_state(1, 2);
  Rng rng(7);
  std::size_t a_updates = 0;
  const int steps = 100000;
  for (int t = 0; t < steps; ++t) {
    const double r = (t % 2 == 0) ? 1.0 : 3.0;
    a_updates += double_q_update(qa, qb, {0, ActionId{0}, r, 0, false}, c, sampler, memory, rng) ? 1 : 0;
  }
  CHECK(std::abs(static_cast<double>(a_updates) / steps - 0.5) < 0.01);
  CHECK(qa(0, ActionId{0}) == doctest::Approx(2.0).epsilon(0.01));
  CHECK(qb(0, ActionId{0}) == doctest::Approx(2.0).epsilon(0.01));
  CHECK(qa.visits(0, ActionId{0}) + qb.visits(0, ActionId{0}) == steps + 2);
}

TEST_CASE("double Q with full cover matches the exact step") {
  TabularAgentConfig stoch;
  stoch.algorithm = TabularAlgorithm::double_q;
  stoch.subset_size = 4;
  stoch.memory = MemoryMode::none;
  TabularAgentConfig exact = stoch;
  exact.maximization = Maximization::exact;
  QTable a1(2, 4), b1(2, 4);
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t x = 0; x < 4; ++x) {
      a1(s, ActionId{x}) = static_cast<double>((s * 7 + x * 3) % 5);
      b1(s, ActionId{x}) = a1(s, ActionId{x});
    }
  }
  QTable a2 = a1, b2 = b1;
  SubsetSampler s1(4, 4, 0), s2(4, 4, 0);
  ActionMemory m1 = ActionMemory::none(), m2 = ActionMemory::none();
  Rng r1(9), r2(9);
  for (int t = 0; t < 200; ++t) {
    const TabularTransition tr{static_cast<std::size_t>(t % 2), ActionId{static_cast<std::size_t>(t % 4)},
                               static_cast<double>(t % 3), static_cast<std::size_t>((t + 1) % 2), false};
    double_q_update(a1, b1, tr, stoch, s1, m1, r1);
    double_q_update(a2, b2, tr, exact, s2, m2, r2);
  }
  CHECK(a1 == a2);
  CHECK(b1 == b2);
}

TEST_CASE("sarsa targets the chosen next action") {
  TabularAgentConfig c;
  c.algorithm = TabularAlgorithm::sarsa;
  c.gamma = 0.0;
  QTable q(2, 2);
  sarsa_update(q, {0, ActionId{0}, -1.0, 1, false}, ActionId{1}, c);
  CHECK(q(0, ActionId{0}) == -1.0);

  c.gamma = 0.9;
  QTable loop(1, 1);
  loop(0, ActionId{0}) = 5.0;
  for (int t = 0; t < 20000; ++t) sarsa_update(loop, {0, ActionId{0}, 0.0, 0, false}, ActionId{0}, c);
  CHECK(loop(0, ActionId{0}) < 0.5);
  CHECK(loop(0, ActionId{0}) > 0.0);
}

TEST_CASE("sarsa on a three-step chain backs up the final reward") {
  // States 0 -> 1 -> 2 -> end, one action, reward 1 on the last move.
  TabularAgentConfig c;
  c.algorithm = TabularAlgorithm::sarsa;
  c.gamma = 1.0;
  QTable q(3, 1);
  for (int episode = 0; episode < 20000; ++episode) {
    sarsa_update(q, {0, ActionId{0}, 0.0, 1, false}, ActionId{0}, c);
    sarsa_update(q, {1, ActionId{0}, 0.0, 2, false}, ActionId{0}, c);
    sarsa_update(q, {2, ActionId{0}, 1.0, 0, true}, ActionId{0}, c);
  }
  CHECK(q(2, ActionId{0}) == 1.0);
  CHECK(q(1, ActionId{0}) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(q(0, ActionId{0}) == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("Q values stay inside the reward bounds") {
  const FiniteMdp mdp = make_random_mdp(4, 8, RewardDistribution::uniform(-1.0, 2.0), 11);
  for (auto algorithm : {TabularAlgorithm::q_learning, TabularAlgorithm::double_q, TabularAlgorithm::sarsa}) {
    TabularAgentConfig c;
    c.algorithm = algorithm;
    c.gamma = 0.9;
    TabularAgent agent(4, 8, c, 1);
    GeneratedMdp env(mdp, 50, 2);
    TabularTrainer trainer(env, agent, false);
    for (int t = 0; t < 20000; ++t) trainer.step();
    for (const QTable* q : {&agent.table(), &agent.table_b()}) {
      for (double v : q->values()) {
        CHECK(v >= -1.0 / 0.1 - 1e-9);
        CHECK(v <= 2.0 / 0.1 + 1e-9);
      }
    }
  }
}

TEST_CASE("full cover reproduces exact Q-learning step for step") {
  auto run = [](Maximization mode) {
    TabularAgentConfig c;
    c.maximization = mode;
    c.memory = MemoryMode::none;
    c.subset_size = 4;
    TabularAgent agent(16, 4, c, 3);
    FrozenLake env(true, 4);
    TabularTrainer trainer(env, agent, false);
    for (int t = 0; t < 5000; ++t) trainer.step();
    return agent.table();
  };
  CHECK(run(Maximization::stochastic) == run(Maximization::exact));
}

TEST_CASE("agent rejects out-of-range states and misuse of learn") {
  TabularAgentConfig c;
  TabularAgent agent(2, 4, c, 0);
  CHECK_THROWS_AS(agent.act(2), Error);
  CHECK_THROWS_AS(agent.learn_sarsa({0, ActionId{0}, 0.0, 1, false}, ActionId{0}), Error);
  c.algorithm = TabularAlgorithm::sarsa;
  TabularAgent sarsa(2, 4, c, 0);
  CHECK_THROWS_AS(sarsa.learn({0, ActionId{0}, 0.0, 1, false}), Error);
}

TEST_CASE("exploration decays with state visits") {
  TabularAgentConfig c = exact_q();
  TabularAgent agent(1, 2, c, 0);
  CHECK(agent.epsilon(0) == 1.0);
  for (int t = 0; t < 3; ++t) agent.learn({0, ActionId{0}, 0.0, 0, false});
  CHECK(agent.epsilon(0) == 0.5);
}

TEST_CASE("greedy policies on the generated MDP match value iteration") {
  GeneratedMdpSpec spec;
  spec.seed = 31;
  const GeneratedMdp proto = make_generated_mdp(spec);
  const double gamma = 0.5;
  const auto q_opt = oracle::value_iteration(proto.tables(), gamma);
  for (auto mode : {Maximization::exact, Maximization::stochastic}) {
    TabularAgentConfig c;
    c.maximization = mode;
    c.gamma = gamma;
    TabularAgent agent(3, 256, c, 32);
    GeneratedMdp env(proto.tables(), 200, 33);
    TabularTrainer trainer(env, agent, false);
    for (int t = 0; t < 1000000; ++t) trainer.step();
    for (std::size_t s = 0; s < 3; ++s) {
      const auto best = std::max_element(q_opt.begin() + s * 256, q_opt.begin() + (s + 1) * 256) - q_opt.begin();
      CHECK(agent.greedy_action(s).index == static_cast<std::size_t>(best) - s * 256);
    }
  }
}
