#include <catch2/catch_amalgamated.hpp>

#include "mcac/gridworld.hpp"
#include "mcac/mdp.hpp"

using namespace mcac;

namespace {

Mdp two_state_chain(double gamma = 0.9) {
  // s0 -> s1 deterministically, s1 absorbing.
  Mdp m = Mdp::zeros(2, 1, gamma);
  m.p(0, 0, 1) = 1.0;
  m.p(1, 0, 1) = 1.0;
  m.r(0, 0, 1) = 5.0;
  m.terminal[1] = true;
  return m;
}

}  // namespace

TEST_CASE("validate accepts a well-formed MDP") {
  REQUIRE(validate(two_state_chain()).ok());
}

TEST_CASE("validate reports the coordinates of a broken row") {
  Mdp m = two_state_chain();
  m.p(0, 0, 1) = 0.9;
  const auto report = validate(m);
  REQUIRE_FALSE(report.ok());
  REQUIRE(report.violations.front().find("s=0") != std::string::npos);
}

TEST_CASE("validate rejects gamma outside (0,1) and non-finite rewards") {
  Mdp m = two_state_chain();
  m.gamma = 1.0;
  REQUIRE_FALSE(validate(m).ok());
  m.gamma = 0.9;
  m.r(0, 0, 0) = std::numeric_limits<double>::infinity();
  REQUIRE_FALSE(validate(m).ok());
}

TEST_CASE("validate accepts a compiled 5x5 gridworld") {
  GridScenario sc;
  sc.name = "open";
  sc.obstacles = {{2, 2}};
  REQUIRE(validate(compile(sc)).ok());
}

TEST_CASE("sample_next follows a deterministic row") {
  const Mdp m = two_state_chain();
  RandomStream rng(7);
  for (int i = 0; i < 10; ++i) {
    const Transition tr = sample_next(m, 0, 0, rng);
    REQUIRE(tr.next_state == 1);
    REQUIRE(tr.reward == 5.0);
  }
}

TEST_CASE("sample_next from a terminal state is a contract violation") {
  const Mdp m = two_state_chain();
  RandomStream rng(7);
  REQUIRE_THROWS_AS(sample_next(m, 1, 0, rng), std::logic_error);
}

TEST_CASE("obstacle stay-frequency matches p_stay over many draws") {
  // 0.75 stay / 0.25 move row.
  Mdp m = Mdp::zeros(2, 1, 0.9);
  m.p(0, 0, 0) = 0.75;
  m.p(0, 0, 1) = 0.25;
  m.p(1, 0, 1) = 1.0;
  RandomStream rng(123);
  const int draws = 1'000'000;
  int stays = 0;
  for (int i = 0; i < draws; ++i)
    if (sample_next(m, 0, 0, rng).next_state == 0) ++stays;
  const double freq = static_cast<double>(stays) / draws;
  REQUIRE(freq == Catch::Approx(0.75).margin(0.002));
}

TEST_CASE("sample_next frequencies pass a chi-square sanity check") {
  Mdp m = Mdp::zeros(4, 1, 0.9);
  const double probs[4] = {0.1, 0.2, 0.3, 0.4};
  for (std::size_t s2 = 0; s2 < 4; ++s2) m.p(0, 0, s2) = probs[s2];
  for (std::size_t s = 1; s < 4; ++s) m.p(s, 0, s) = 1.0;
  RandomStream rng(99);
  const int draws = 1'000'000;
  int counts[4] = {0, 0, 0, 0};
  for (int i = 0; i < draws; ++i) ++counts[sample_next(m, 0, 0, rng).next_state];
  double chi2 = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double expected = probs[k] * draws;
    chi2 += (counts[k] - expected) * (counts[k] - expected) / expected;
  }
  // 3 degrees of freedom; 16.27 is the 0.1% tail.
  REQUIRE(chi2 < 16.27);
}

TEST_CASE("a fixed seed replays the identical transition sequence") {
  GridScenario sc;
  sc.obstacles = {{1, 1}, {3, 2}};
  const Mdp m = compile(sc);
  auto episode = [&](std::uint64_t seed) {
    RandomStream rng(seed);
    std::vector<Transition> out;
    std::size_t s = 0;
    for (int i = 0; i < 200 && !m.is_terminal(s); ++i) {
      const Transition tr = sample_next(m, s, i % 4, rng);
      out.push_back(tr);
      s = tr.next_state;
    }
    return out;
  };
  const auto a = episode(42);
  const auto b = episode(42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].next_state == b[i].next_state);
    REQUIRE(a[i].reward == b[i].reward);
  }
}

TEST_CASE("draw_action respects degenerate and uniform rows") {
  RandomStream rng(5);
  const std::vector<double> one_hot{1.0, 0.0, 0.0, 0.0};
  for (int i = 0; i < 100; ++i) REQUIRE(draw_action(one_hot, rng) == 0);

  const std::vector<double> half{0.5, 0.5, 0.0, 0.0};
  for (int i = 0; i < 1000; ++i) REQUIRE(draw_action(half, rng) < 2);

  const std::vector<double> uniform(4, 0.25);
  int counts[4] = {0, 0, 0, 0};
  const int draws = 1'000'000;
  for (int i = 0; i < draws; ++i) ++counts[draw_action(uniform, rng)];
  for (int a = 0; a < 4; ++a)
    REQUIRE(static_cast<double>(counts[a]) / draws ==
            Catch::Approx(0.25).margin(0.005));
}

TEST_CASE("draw_action rejects a row off the simplex") {
  RandomStream rng(5);
  const std::vector<double> bad{0.5, 0.6};
  REQUIRE_THROWS_AS(draw_action(bad, rng), std::invalid_argument);
  const std::vector<double> negative{1.2, -0.2};
  REQUIRE_THROWS_AS(draw_action(negative, rng), std::invalid_argument);
}
