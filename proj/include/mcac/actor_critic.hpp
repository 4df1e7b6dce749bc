#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "mcac/mdp.hpp"
#include "mcac/schedule.hpp"
#include "mcac/simplex.hpp"

namespace mcac {

using ValueTable = std::vector<double>;

/// |S| x |A| table of per-state action distributions.
struct PolicyTable {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::vector<double> probs;  // row-major

  static PolicyTable uniform(std::size_t states, std::size_t actions) {
    PolicyTable pi;
    pi.num_states = states;
    pi.num_actions = actions;
    pi.probs.assign(states * actions, 1.0 / static_cast<double>(actions));
    return pi;
  }

  std::span<double> row(std::size_t s) {
    return {probs.data() + s * num_actions, num_actions};
  }
  std::span<const double> row(std::size_t s) const {
    return {probs.data() + s * num_actions, num_actions};
  }

  /// Most probable action per state (lowest index wins ties).
  std::size_t greedy_action(std::size_t s) const {
    const auto r = row(s);
    std::size_t best = 0;
    for (std::size_t a = 1; a < r.size(); ++a)
      if (r[a] > r[best]) best = a;
    return best;
  }
};

/// Which reading of the TD-error sign drives the updates. Prose is the
/// classical convention delta = r + gamma*V(s') - V(s) applied as an
/// ascent direction; Algorithm1 is the alternate sign for sensitivity runs.
enum class TdSign { Prose, Algorithm1 };

struct AcConfig {
  double gamma = 0.95;
  Schedule value_schedule = default_two_timescale().fast;
  Schedule policy_schedule = default_two_timescale().slow;
  std::uint64_t episodes = 100;
  std::uint64_t max_steps_per_episode = 10'000;
  std::uint64_t seed = 0;
  TdSign td_sign = TdSign::Prose;
  bool check_invariants = false;
};

struct EpisodeCurves {
  std::vector<double> reward;        // total reward per episode
  std::vector<std::uint64_t> steps;  // steps per episode
  std::vector<bool> truncated;       // hit the step cap instead of the goal
  std::uint64_t truncation_count = 0;
};

struct AcResult {
  PolicyTable policy;
  ValueTable values;
  EpisodeCurves curves;
  std::uint64_t total_steps = 0;
  double wall_seconds = 0.0;  // episode loop only, no I/O
};

/// One critic recursion step: V(s) += dv * (gamma*V(s') - V(s) + r).
inline void critic_step(ValueTable& values, const Transition& tr, double dv,
                        double gamma) {
  values[tr.state] +=
      dv * (gamma * values[tr.next_state] - values[tr.state] + tr.reward);
}

namespace detail {

/// Nudges entry `a` of row `s` by dpi * sqrt(pi(s,a)) * direction, then
/// projects the row back onto the simplex.
inline void nudge_policy_row(PolicyTable& pi, std::size_t s, std::size_t a,
                             double dpi, double direction) {
  auto row = pi.row(s);
  row[a] += dpi * std::sqrt(row[a]) * direction;
  project_simplex_inplace(row);
}

inline double classical_td(const ValueTable& values, const Transition& tr,
                           double gamma) {
  return tr.reward + gamma * values[tr.next_state] - values[tr.state];
}

}  // namespace detail

/// Projected stochastic policy update driven by the critic's TD error.
inline void policy_step(PolicyTable& pi, const ValueTable& values,
                        const Transition& tr, double dpi, double gamma,
                        TdSign sign = TdSign::Prose) {
  const double td = detail::classical_td(values, tr, gamma);
  const double direction =
      sign == TdSign::Prose ? td : td - 2.0 * tr.reward;
  detail::nudge_policy_row(pi, tr.state, tr.action, dpi, direction);
}

namespace detail {

inline void check_row_simplex(std::span<const double> row) {
  double sum = 0.0;
  for (double p : row) {
    if (p < 0.0) throw std::logic_error("policy row left the simplex: negative entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::logic_error("policy row left the simplex: sum " + std::to_string(sum));
}

}  // namespace detail

/// Baseline actor-critic training loop. The step counter t is shared by
/// both schedules and advances once per environment step, across episodes.
inline AcResult train(const Mdp& mdp, std::size_t start_state,
                      const AcConfig& cfg) {
  AcResult result;
  result.policy = PolicyTable::uniform(mdp.num_states, mdp.num_actions);
  result.values.assign(mdp.num_states, 0.0);
  RandomStream rng(cfg.seed);

  std::uint64_t t = 0;
  const auto t_begin = std::chrono::steady_clock::now();
  for (std::uint64_t ep = 0; ep < cfg.episodes; ++ep) {
    std::size_t s = start_state;
    double total_reward = 0.0;
    std::uint64_t steps = 0;
    while (!mdp.is_terminal(s) && steps < cfg.max_steps_per_episode) {
      const std::size_t a = draw_action(result.policy.row(s), rng);
      const Transition tr = sample_next(mdp, s, a, rng);
      critic_step(result.values, tr, cfg.value_schedule.rate(t), cfg.gamma);
      policy_step(result.policy, result.values, tr, cfg.policy_schedule.rate(t),
                  cfg.gamma, cfg.td_sign);
      if (cfg.check_invariants) detail::check_row_simplex(result.policy.row(s));
      s = tr.next_state;
      total_reward += tr.reward;
      ++steps;
      ++t;
    }
    const bool truncated = !mdp.is_terminal(s);
    result.curves.reward.push_back(total_reward);
    result.curves.steps.push_back(steps);
    result.curves.truncated.push_back(truncated);
    if (truncated) ++result.curves.truncation_count;
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin)
          .count();
  result.total_steps = t;
  return result;
}

}  // namespace mcac
