#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "mcac/gridworld.hpp"
#include "mcac/multi_critic.hpp"
#include "mcac/oracle.hpp"

using namespace mcac;

namespace {

CriticBank bank_of(std::vector<ValueTable> critics) {
  CriticBank bank;
  bank.state_count = critics.front().size();
  for (std::size_t i = 0; i < critics.size(); ++i)
    bank.scenario_names.push_back("c" + std::to_string(i));
  bank.critics = std::move(critics);
  return bank;
}

}  // namespace

TEST_CASE("combined_value identities") {
  const auto bank = bank_of({{10.0, 40.0}, {20.0, 60.0}});
  REQUIRE(combined_value(bank_of({{10.0, 40.0}}), {1.0}, 0) == 10.0);
  REQUIRE(combined_value(bank, {0.5, 0.5}, 0) == 15.0);

  const auto four = bank_of({{4.0}, {8.0}, {12.0}, {16.0}});
  REQUIRE(combined_value(four, {0.25, 0.25, 0.25, 0.25}, 0) == 10.0);
}

TEST_CASE("combined_value is linear in the weights") {
  const auto bank = bank_of({{3.0, 1.0}, {7.0, -2.0}, {0.5, 4.0}});
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    WeightVector w1 = project_simplex(std::vector<double>{unit(gen), unit(gen), unit(gen)});
    WeightVector w2 = project_simplex(std::vector<double>{unit(gen), unit(gen), unit(gen)});
    const double alpha = unit(gen);
    WeightVector mix(3);
    for (int i = 0; i < 3; ++i) mix[i] = alpha * w1[i] + (1 - alpha) * w2[i];
    const double lhs = combined_value(bank, mix, 1);
    const double rhs = alpha * combined_value(bank, w1, 1) +
                       (1 - alpha) * combined_value(bank, w2, 1);
    REQUIRE(lhs == Catch::Approx(rhs).margin(1e-12));
  }
}

TEST_CASE("critic_td examples and sign algebra") {
  // Bellman-consistent critic: zero TD.
  const double gamma = 0.9;
  const auto consistent = bank_of({{-1.0 + gamma * 5.0, 5.0}});
  REQUIRE(critic_td(consistent, 0, {0, 0, 1, -1.0}, gamma) ==
          Catch::Approx(0.0).margin(1e-12));

  const auto bank = bank_of({{50.0, 60.0}});
  REQUIRE(critic_td(bank, 0, {0, 0, 1, -1.0}, 0.95) == Catch::Approx(6.0));

  // The value parts of the two conventions are negated; with a shared
  // reward the conventions satisfy prose + algorithm1 = 2r, and they are
  // exact negatives on reward-free transitions.
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> val(-20.0, 20.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto b = bank_of({{val(gen), val(gen)}});
    const double r = val(gen);
    const Transition tr{0, 0, 1, r};
    const double prose = critic_td(b, 0, tr, 0.9, TdSign::Prose);
    const double alg1 = critic_td(b, 0, tr, 0.9, TdSign::Algorithm1);
    REQUIRE(prose + alg1 == Catch::Approx(2.0 * r).margin(1e-12));
    const Transition free{0, 0, 1, 0.0};
    REQUIRE(critic_td(b, 0, free, 0.9, TdSign::Prose) ==
            Catch::Approx(-critic_td(b, 0, free, 0.9, TdSign::Algorithm1))
                .margin(1e-12));
  }
}

TEST_CASE("per-critic reward source needs reward tables") {
  const auto bank = bank_of({{1.0, 2.0}});
  REQUIRE_THROWS_AS(critic_td(bank, 0, {0, 0, 1, -1.0}, 0.9, TdSign::Prose,
                              CriticRewardSource::PerCriticTables),
                    DataError);
}

TEST_CASE("weight_step evaluates the drift formula then projects") {
  // N=2, equal weights, TDs +2/-2, dw = 0.1: the drifted vector
  // [0.5 + 0.1*sqrt(0.5)*2, 0.5 - 0.1*sqrt(0.5)*2] is already feasible.
  const double gamma = 0.9;
  const auto bank = bank_of({{0.0, 2.0 / gamma}, {0.0, -2.0 / gamma}});
  const Transition tr{0, 0, 1, 0.0};
  REQUIRE(critic_td(bank, 0, tr, gamma) == Catch::Approx(2.0));
  REQUIRE(critic_td(bank, 1, tr, gamma) == Catch::Approx(-2.0));
  const WeightVector next = weight_step({0.5, 0.5}, bank, tr, 0.1, gamma);
  const double shift = 0.1 * std::sqrt(0.5) * 2.0;
  REQUIRE(next[0] == Catch::Approx(0.5 + shift).margin(1e-12));
  REQUIRE(next[1] == Catch::Approx(0.5 - shift).margin(1e-12));
}

TEST_CASE("weight_step with zero TDs keeps the weights") {
  const double gamma = 0.9;
  const auto bank = bank_of({{-1.0 + gamma * 5.0, 5.0}, {-1.0 + gamma * 5.0, 5.0}});
  const WeightVector next = weight_step({0.3, 0.7}, bank, {0, 0, 1, -1.0}, 0.5, gamma);
  REQUIRE(next[0] == Catch::Approx(0.3).margin(1e-12));
  REQUIRE(next[1] == Catch::Approx(0.7).margin(1e-12));
}

TEST_CASE("zero-weight coordinates receive no drift") {
  const auto bank = bank_of({{0.0, 100.0}, {0.0, 100.0}});
  const WeightVector next = weight_step({1.0, 0.0}, bank, {0, 0, 1, 0.0}, 0.1, 0.9);
  REQUIRE(next[1] < next[0]);
}

TEST_CASE("combined_td formula and algebraic identities") {
  const auto bank = bank_of({{10.0, 30.0}, {20.0, 40.0}});
  const WeightVector w{0.5, 0.5};
  const Transition tr{0, 0, 1, -1.0};
  // 15 - 0.9*35 + 1 = -15.5
  REQUIRE(combined_td(bank, w, tr, 0.9) == Catch::Approx(-15.5));

  // combined_td == -(r + gamma*Vhat(s') - Vhat(s)) on random inputs, and
  // equals -sum_i wi*critic_td(i) with the shared reward.
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> val(-10.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto b = bank_of({{val(gen), val(gen)}, {val(gen), val(gen)}});
    const WeightVector rw =
        project_simplex(std::vector<double>{std::abs(val(gen)), std::abs(val(gen))});
    const Transition t{0, 0, 1, val(gen)};
    const double gamma = 0.95;
    const double vhat_s = combined_value(b, rw, 0);
    const double vhat_s2 = combined_value(b, rw, 1);
    const double classical = t.reward + gamma * vhat_s2 - vhat_s;
    REQUIRE(combined_td(b, rw, t, gamma) == Catch::Approx(-classical).margin(1e-10));
    double weighted = 0.0;
    for (int i = 0; i < 2; ++i) weighted += rw[i] * critic_td(b, i, t, gamma);
    REQUIRE(combined_td(b, rw, t, gamma) == Catch::Approx(-weighted).margin(1e-10));
  }
}

TEST_CASE("policy_step_mcac moves with the descent direction") {
  const auto bank = bank_of({{0.0, 10.0}});
  PolicyTable pi = PolicyTable::uniform(2, 4);
  // positive classical TD (negative E) raises the taken action
  policy_step_mcac(pi, bank, {1.0}, {0, 2, 1, -1.0}, 0.05, 0.95);
  REQUIRE(pi.row(0)[2] > 0.25);
  double sum = 0.0;
  for (double p : pi.row(0)) sum += p;
  REQUIRE(sum == Catch::Approx(1.0).margin(1e-12));

  // zero E: unchanged
  const double gamma = 0.9;
  const auto flat = bank_of({{-1.0 + gamma * 5.0, 5.0}});
  PolicyTable pi2 = PolicyTable::uniform(2, 4);
  const auto before = pi2.probs;
  policy_step_mcac(pi2, flat, {1.0}, {0, 1, 1, -1.0}, 0.05, gamma);
  REQUIRE(pi2.probs == before);
}

TEST_CASE("identical critics keep the weights uniform") {
  const ValueTable shared{1.0, -3.0, 7.0, 2.0};
  const auto bank = bank_of({shared, shared, shared});
  GridScenario sc;
  sc.side = 2;
  sc.goal = {1, 1};
  const Mdp mdp = compile(sc);
  McacConfig cfg;
  cfg.episodes = 30;
  cfg.seed = 13;
  const McacResult res = train_mcac(mdp, 0, bank, cfg);
  for (const auto& w : res.weight_trace)
    for (double wi : w) REQUIRE(wi == Catch::Approx(1.0 / 3.0).margin(1e-9));
}

TEST_CASE("weight trace stays on the simplex over a full run") {
  GridScenario sc;
  sc.obstacles = {{2, 1}, {1, 3}};
  const Mdp mdp = compile(sc);
  const auto exact = oracle::value_iteration(mdp, 1e-10);
  const auto bank = bank_of({exact.optimal_values,
                             ValueTable(mdp.num_states, 0.0)});
  McacConfig cfg;
  cfg.episodes = 50;
  cfg.seed = 21;
  cfg.check_invariants = true;
  CriticBank fixed = bank;
  fixed.state_count = mdp.num_states;
  const McacResult res = train_mcac(mdp, 0, fixed, cfg);
  REQUIRE_FALSE(res.weight_trace.empty());
  for (const auto& w : res.weight_trace) {
    double sum = 0.0;
    for (double wi : w) {
      REQUIRE(wi >= 0.0);
      sum += wi;
    }
    REQUIRE(sum == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("train_mcac rejects a bank with the wrong state count") {
  GridScenario sc;
  const Mdp mdp = compile(sc);
  auto bank = bank_of({ValueTable(16, 0.0)});
  McacConfig cfg;
  REQUIRE_THROWS_AS(train_mcac(mdp, 0, bank, cfg), DataError);
}

TEST_CASE("train_mcac never mutates the critic bank") {
  GridScenario sc;
  const Mdp mdp = compile(sc);
  const auto exact = oracle::value_iteration(mdp, 1e-10);
  const auto bank = bank_of({exact.optimal_values});
  const auto snapshot = bank.critics;
  McacConfig cfg;
  cfg.episodes = 40;
  cfg.seed = 1;
  const McacResult res = train_mcac(mdp, 0, bank, cfg);
  REQUIRE(bank.critics == snapshot);
  // trainable parameters: N weights plus |S|*|A| policy entries
  REQUIRE(res.weights.size() == bank.size());
  REQUIRE(res.policy.probs.size() == mdp.num_states * mdp.num_actions);
}

TEST_CASE("same seed reproduces the weight trace bit-exactly") {
  GridScenario sc;
  sc.obstacles = {{3, 2}};
  const Mdp mdp = compile(sc);
  const auto exact = oracle::value_iteration(mdp, 1e-10);
  const auto bank = bank_of({exact.optimal_values, ValueTable(25, 1.0)});
  McacConfig cfg;
  cfg.episodes = 25;
  cfg.seed = 77;
  const McacResult a = train_mcac(mdp, 0, bank, cfg);
  const McacResult b = train_mcac(mdp, 0, bank, cfg);
  REQUIRE(a.weight_trace == b.weight_trace);
  REQUIRE(a.curves.reward == b.curves.reward);
}

TEST_CASE("N=1 bank with the exact critic recovers the oracle path on 3x3") {
  GridScenario sc;
  sc.side = 3;
  sc.goal = {2, 2};
  const Mdp mdp = compile(sc);
  const auto exact = oracle::value_iteration(mdp, 1e-12);
  const auto bank = bank_of({exact.optimal_values});
  McacConfig cfg;
  cfg.episodes = 500;
  cfg.seed = 4;
  const McacResult res = train_mcac(mdp, 0, bank, cfg);
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    if (mdp.is_terminal(s)) continue;
    const std::size_t greedy = res.policy.greedy_action(s);
    const auto& optimal = exact.optimal_action_sets[s];
    REQUIRE(std::find(optimal.begin(), optimal.end(), greedy) != optimal.end());
  }
}
