#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mcac/actor_critic.hpp"
#include "mcac/error.hpp"
#include "mcac/mdp.hpp"
#include "mcac/schedule.hpp"
#include "mcac/simplex.hpp"

namespace mcac {

/// N converged value vectors from pre-trained scenarios. Reward tables
/// are optional: when the pre-trained environments' rewards are known
/// they can back the per-critic reward source; otherwise the bank only
/// carries values.
struct CriticBank {
  std::vector<ValueTable> critics;
  std::vector<std::string> scenario_names;
  std::vector<std::vector<double>> reward_tables;  // empty, or one per critic,
                                                   // laid out like Mdp::reward
  std::size_t state_count = 0;

  std::size_t size() const { return critics.size(); }
  bool has_reward_tables() const { return !reward_tables.empty(); }
};

using WeightVector = std::vector<double>;

/// Where the reward inside each per-critic TD term comes from: the reward
/// just observed in the current environment, or the critic's own table.
enum class CriticRewardSource { CurrentEnv, PerCriticTables };

struct McacConfig {
  double gamma = 0.95;
  TwoTimescale rates = default_two_timescale();  // fast = weights, slow = policy
  std::uint64_t episodes = 100;
  std::uint64_t max_steps_per_episode = 10'000;
  std::uint64_t seed = 0;
  TdSign td_sign = TdSign::Prose;
  CriticRewardSource reward_source = CriticRewardSource::CurrentEnv;
  bool record_weight_trace = true;
  bool check_invariants = false;
};

/// Weighted combination of the bank's values at one state.
inline double combined_value(const CriticBank& bank, const WeightVector& w,
                             std::size_t s) {
  double v = 0.0;
  for (std::size_t i = 0; i < bank.size(); ++i) v += w[i] * bank.critics[i][s];
  return v;
}

namespace detail {

inline double critic_reward(const CriticBank& bank, std::size_t i,
                            const Transition& tr, CriticRewardSource source,
                            std::size_t num_actions) {
  if (source == CriticRewardSource::CurrentEnv) return tr.reward;
  if (!bank.has_reward_tables())
    throw DataError("per-critic reward source selected but the bank carries no reward tables");
  const std::size_t idx =
      (tr.state * num_actions + tr.action) * bank.state_count + tr.next_state;
  return bank.reward_tables[i][idx];
}

}  // namespace detail

/// Per-critic TD term. Prose convention: r + gamma*Vi(s') - Vi(s).
/// Algorithm1 convention: Vi(s) - gamma*Vi(s') + ri.
inline double critic_td(const CriticBank& bank, std::size_t i,
                        const Transition& tr, double gamma,
                        TdSign sign = TdSign::Prose,
                        CriticRewardSource source = CriticRewardSource::CurrentEnv,
                        std::size_t num_actions = 4) {
  const ValueTable& v = bank.critics[i];
  const double ri = detail::critic_reward(bank, i, tr, source, num_actions);
  const double drift = gamma * v[tr.next_state] - v[tr.state];
  return sign == TdSign::Prose ? ri + drift : -drift + ri;
}

/// Simultaneous per-coordinate drift wi + dw*sqrt(wi)*critic_td(i), then a
/// joint projection back onto the simplex.
inline WeightVector weight_step(const WeightVector& w, const CriticBank& bank,
                                const Transition& tr, double dw, double gamma,
                                TdSign sign = TdSign::Prose,
                                CriticRewardSource source = CriticRewardSource::CurrentEnv,
                                std::size_t num_actions = 4) {
  WeightVector next(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    next[i] = w[i] + dw * std::sqrt(w[i]) *
                         critic_td(bank, i, tr, gamma, sign, source, num_actions);
  }
  project_simplex_inplace(next);
  return next;
}

/// Total estimated TD error driving the policy. Prose convention:
/// sum_i wi*[Vi(s) - gamma*Vi(s')] - r, i.e. the negated classical TD
/// error of the combined value.
inline double combined_td(const CriticBank& bank, const WeightVector& w,
                          const Transition& tr, double gamma,
                          TdSign sign = TdSign::Prose) {
  double drift = 0.0;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    const ValueTable& v = bank.critics[i];
    drift += w[i] * (v[tr.state] - gamma * v[tr.next_state]);
  }
  return sign == TdSign::Prose ? drift - tr.reward : drift + tr.reward;
}

/// Policy row update pi(s,a) -= dpi*sqrt(pi(s,a))*E, then projection.
inline void policy_step_mcac(PolicyTable& pi, const CriticBank& bank,
                             const WeightVector& w, const Transition& tr,
                             double dpi, double gamma,
                             TdSign sign = TdSign::Prose) {
  const double e_hat = combined_td(bank, w, tr, gamma, sign);
  detail::nudge_policy_row(pi, tr.state, tr.action, dpi, -e_hat);
}

struct McacResult {
  PolicyTable policy;
  WeightVector weights;
  std::vector<WeightVector> weight_trace;  // one entry per step when recorded
  EpisodeCurves curves;
  std::uint64_t total_steps = 0;
  double wall_seconds = 0.0;
};

/// Full multi-critic training loop. Weights start uniform and evolve on
/// the fast timescale; the policy on the slow one. The bank is never
/// mutated: the only trainable critic-side parameters are the N weights.
/// Within a step the policy update reads the pre-update weights.
inline McacResult train_mcac(const Mdp& mdp, std::size_t start_state,
                             const CriticBank& bank, const McacConfig& cfg) {
  if (bank.state_count != mdp.num_states)
    throw DataError("critic bank has " + std::to_string(bank.state_count) +
                    " states but the environment has " +
                    std::to_string(mdp.num_states));
  if (bank.size() == 0) throw DataError("critic bank is empty");

  McacResult result;
  result.policy = PolicyTable::uniform(mdp.num_states, mdp.num_actions);
  result.weights.assign(bank.size(), 1.0 / static_cast<double>(bank.size()));
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
      WeightVector next_w = weight_step(
          result.weights, bank, tr, cfg.rates.fast.rate(t), cfg.gamma,
          cfg.td_sign, cfg.reward_source, mdp.num_actions);
      policy_step_mcac(result.policy, bank, result.weights, tr,
                       cfg.rates.slow.rate(t), cfg.gamma, cfg.td_sign);
      result.weights = std::move(next_w);
      if (cfg.record_weight_trace) result.weight_trace.push_back(result.weights);
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
