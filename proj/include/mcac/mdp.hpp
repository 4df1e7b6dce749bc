#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mcac/rng.hpp"

namespace mcac {

/// Finite MDP with dense transition and reward tables, both indexed
/// (state, action, next_state). Immutable after construction by
/// convention; nothing in the training loops writes to it.
struct Mdp {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::vector<double> transition;  // P(s'|s,a), row-major over (s, a, s')
  std::vector<double> reward;      // r(s,a,s'), same layout
  double gamma = 0.0;              // in (0, 1)
  std::vector<bool> terminal;      // per-state absorbing flag

  static Mdp zeros(std::size_t states, std::size_t actions, double gamma) {
    Mdp m;
    m.num_states = states;
    m.num_actions = actions;
    m.gamma = gamma;
    m.transition.assign(states * actions * states, 0.0);
    m.reward.assign(states * actions * states, 0.0);
    m.terminal.assign(states, false);
    return m;
  }

  std::size_t index(std::size_t s, std::size_t a, std::size_t s2) const {
    return (s * num_actions + a) * num_states + s2;
  }
  double& p(std::size_t s, std::size_t a, std::size_t s2) {
    return transition[index(s, a, s2)];
  }
  double p(std::size_t s, std::size_t a, std::size_t s2) const {
    return transition[index(s, a, s2)];
  }
  double& r(std::size_t s, std::size_t a, std::size_t s2) {
    return reward[index(s, a, s2)];
  }
  double r(std::size_t s, std::size_t a, std::size_t s2) const {
    return reward[index(s, a, s2)];
  }
  std::span<const double> row(std::size_t s, std::size_t a) const {
    return {transition.data() + (s * num_actions + a) * num_states, num_states};
  }
  bool is_terminal(std::size_t s) const { return terminal[s]; }
};

/// One sampled environment step.
struct Transition {
  std::size_t state = 0;
  std::size_t action = 0;
  std::size_t next_state = 0;
  double reward = 0.0;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks row-stochasticity (within 1e-12), nonnegativity, finite rewards
/// and gamma in (0,1). Report-valued; never throws.
inline ValidationReport validate(const Mdp& mdp) {
  ValidationReport report;
  if (!(mdp.gamma > 0.0 && mdp.gamma < 1.0)) {
    report.violations.push_back("gamma " + std::to_string(mdp.gamma) +
                                " outside (0,1)");
  }
  if (mdp.num_states == 0 || mdp.num_actions == 0) {
    report.violations.push_back("empty state or action set");
    return report;
  }
  const std::size_t expected = mdp.num_states * mdp.num_actions * mdp.num_states;
  if (mdp.transition.size() != expected || mdp.reward.size() != expected ||
      mdp.terminal.size() != mdp.num_states) {
    report.violations.push_back("table sizes inconsistent with |S|, |A|");
    return report;
  }
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    for (std::size_t a = 0; a < mdp.num_actions; ++a) {
      double sum = 0.0;
      for (std::size_t s2 = 0; s2 < mdp.num_states; ++s2) {
        const double p = mdp.p(s, a, s2);
        if (p < 0.0) {
          report.violations.push_back("negative probability at (s=" +
                                      std::to_string(s) + ",a=" +
                                      std::to_string(a) + ")");
        }
        if (!std::isfinite(mdp.r(s, a, s2))) {
          report.violations.push_back("non-finite reward at (s=" +
                                      std::to_string(s) + ",a=" +
                                      std::to_string(a) + ")");
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12) {
        report.violations.push_back("row sum " + std::to_string(sum) +
                                    " at (s=" + std::to_string(s) + ",a=" +
                                    std::to_string(a) + ")");
      }
    }
  }
  return report;
}

/// Samples s' ~ P(.|s,a) and the associated reward. Consumes exactly one
/// uniform draw. Sampling from a terminal state is a harness bug.
inline Transition sample_next(const Mdp& mdp, std::size_t s, std::size_t a,
                              RandomStream& rng) {
  if (s >= mdp.num_states || a >= mdp.num_actions)
    throw std::logic_error("sample_next: state or action out of bounds");
  if (mdp.is_terminal(s))
    throw std::logic_error("sample_next: sampling from terminal state " +
                           std::to_string(s));
  const double u = rng.uniform();
  const auto row = mdp.row(s, a);
  double cum = 0.0;
  std::size_t next = mdp.num_states;
  for (std::size_t s2 = 0; s2 < mdp.num_states; ++s2) {
    if (row[s2] <= 0.0) continue;
    cum += row[s2];
    next = s2;
    if (u < cum) break;
  }
  // u can land in the rounding slack past the last positive entry; the
  // last such entry absorbs it.
  if (next == mdp.num_states)
    throw std::logic_error("sample_next: all-zero transition row");
  return {s, a, next, mdp.r(s, a, next)};
}

/// Draws an action from one policy row. The row must already be on the
/// probability simplex; a non-normalized row signals a missed projection.
inline std::size_t draw_action(std::span<const double> policy_row,
                               RandomStream& rng) {
  double sum = 0.0;
  for (double p : policy_row) {
    if (p < 0.0)
      throw std::invalid_argument("draw_action: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("draw_action: row sum " + std::to_string(sum) +
                                " off the simplex");
  const double u = rng.uniform();
  double cum = 0.0;
  std::size_t pick = policy_row.size();
  for (std::size_t a = 0; a < policy_row.size(); ++a) {
    if (policy_row[a] <= 0.0) continue;
    cum += policy_row[a];
    pick = a;
    if (u < cum) break;
  }
  return pick;
}

}  // namespace mcac
