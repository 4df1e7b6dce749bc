#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mcac/actor_critic.hpp"
#include "mcac/gridworld.hpp"
#include "mcac/mdp.hpp"

namespace mcac {
namespace oracle {

/// Exact solvers for test and acceptance use only; the training code
/// never calls into this namespace.

struct ExactSolution {
  std::vector<double> optimal_values;
  std::vector<std::vector<std::size_t>> optimal_action_sets;
  std::size_t iterations = 0;
  double residual = 0.0;
};

constexpr double kArgmaxTieTolerance = 1e-9;

inline ExactSolution value_iteration(const Mdp& mdp, double tol,
                                     std::size_t max_iterations = 1'000'000) {
  std::vector<double> values(mdp.num_states, 0.0);
  std::vector<double> next(mdp.num_states, 0.0);
  double residual = 0.0;
  std::size_t iter = 0;
  for (; iter < max_iterations; ++iter) {
    residual = 0.0;
    for (std::size_t s = 0; s < mdp.num_states; ++s) {
      if (mdp.is_terminal(s)) {
        next[s] = 0.0;
        continue;
      }
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < mdp.num_actions; ++a) {
        double q = 0.0;
        for (std::size_t s2 = 0; s2 < mdp.num_states; ++s2) {
          const double p = mdp.p(s, a, s2);
          if (p > 0.0) q += p * (mdp.r(s, a, s2) + mdp.gamma * values[s2]);
        }
        best = std::max(best, q);
      }
      next[s] = best;
      residual = std::max(residual, std::abs(next[s] - values[s]));
    }
    values.swap(next);
    if (residual < tol) break;
  }
  if (residual >= tol)
    throw std::runtime_error("value_iteration: no convergence after " +
                             std::to_string(max_iterations) + " sweeps");

  ExactSolution sol;
  sol.optimal_values = values;
  sol.iterations = iter + 1;
  sol.residual = residual;
  sol.optimal_action_sets.resize(mdp.num_states);
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    if (mdp.is_terminal(s)) continue;
    std::vector<double> q(mdp.num_actions, 0.0);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < mdp.num_actions; ++a) {
      for (std::size_t s2 = 0; s2 < mdp.num_states; ++s2) {
        const double p = mdp.p(s, a, s2);
        if (p > 0.0) q[a] += p * (mdp.r(s, a, s2) + mdp.gamma * values[s2]);
      }
      best = std::max(best, q[a]);
    }
    for (std::size_t a = 0; a < mdp.num_actions; ++a)
      if (q[a] >= best - kArgmaxTieTolerance) sol.optimal_action_sets[s].push_back(a);
  }
  return sol;
}

/// Iterative solve of V = sum_a pi(s,a) sum_s' P (r + gamma V(s')).
inline std::vector<double> policy_evaluation(const Mdp& mdp,
                                             const PolicyTable& pi, double tol,
                                             std::size_t max_iterations = 1'000'000) {
  std::vector<double> values(mdp.num_states, 0.0);
  double residual = 0.0;
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    residual = 0.0;
    for (std::size_t s = 0; s < mdp.num_states; ++s) {
      if (mdp.is_terminal(s)) continue;
      double v = 0.0;
      for (std::size_t a = 0; a < mdp.num_actions; ++a) {
        const double pa = pi.row(s)[a];
        if (pa <= 0.0) continue;
        double q = 0.0;
        for (std::size_t s2 = 0; s2 < mdp.num_states; ++s2) {
          const double p = mdp.p(s, a, s2);
          if (p > 0.0) q += p * (mdp.r(s, a, s2) + mdp.gamma * values[s2]);
        }
        v += pa * q;
      }
      residual = std::max(residual, std::abs(v - values[s]));
      values[s] = v;  // Gauss-Seidel sweep
    }
    if (residual < tol) return values;
  }
  throw std::runtime_error("policy_evaluation: no convergence");
}

/// Minimum number of moves from start to goal, treating obstacles as
/// passable (stickiness affects time, not reachability).
inline std::size_t shortest_path_steps(const GridScenario& sc) {
  const std::size_t n = static_cast<std::size_t>(sc.side) * sc.side;
  std::vector<std::size_t> dist(n, n + 1);
  std::deque<Cell> frontier{sc.start};
  dist[sc.state_index(sc.start)] = 0;
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop_front();
    const std::size_t d = dist[sc.state_index(c)];
    if (c == sc.goal) return d;
    for (Cell step : {Cell{0, -1}, Cell{0, 1}, Cell{-1, 0}, Cell{1, 0}}) {
      const Cell t{c.x + step.x, c.y + step.y};
      if (!sc.in_bounds(t)) continue;
      if (dist[sc.state_index(t)] <= d + 1) continue;
      dist[sc.state_index(t)] = d + 1;
      frontier.push_back(t);
    }
  }
  throw std::runtime_error("shortest_path_steps: goal unreachable");
}

/// Action set greedy with respect to an arbitrary value table, with a
/// caller-chosen tie tolerance (learned critics need a looser one than
/// the exact solver).
inline std::vector<std::size_t> greedy_actions(const Mdp& mdp,
                                               const std::vector<double>& values,
                                               std::size_t s,
                                               double tie_tolerance) {
  std::vector<double> q(mdp.num_actions, 0.0);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < mdp.num_actions; ++a) {
    for (std::size_t s2 = 0; s2 < mdp.num_states; ++s2) {
      const double p = mdp.p(s, a, s2);
      if (p > 0.0) q[a] += p * (mdp.r(s, a, s2) + mdp.gamma * values[s2]);
    }
    best = std::max(best, q[a]);
  }
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < mdp.num_actions; ++a)
    if (q[a] >= best - tie_tolerance) out.push_back(a);
  return out;
}

}  // namespace oracle
}  // namespace mcac
