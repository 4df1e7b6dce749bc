#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace mcac {

/// Exact Euclidean projection onto the probability simplex, in place.
/// Sort-based: find the largest k such that the k largest entries stay
/// positive after the uniform shift that restores sum 1, then clamp.
inline void project_simplex_inplace(std::span<double> v) {
  if (v.empty()) throw std::invalid_argument("project_simplex: empty vector");
  // Already-feasible inputs pass through untouched. This makes the
  // projection exactly idempotent: a projected vector sums to 1 up to
  // rounding and is nonnegative, so a second call takes this path. The
  // 1e-9 slack matches the feasibility tolerance used everywhere else.
  double sum = 0.0;
  double min = v[0];
  for (double x : v) {
    sum += x;
    min = std::min(min, x);
  }
  if (min >= 0.0 && std::abs(sum - 1.0) <= 1e-9) return;
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumsum = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumsum += sorted[k];
    const double candidate = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) tau = candidate;
  }
  for (double& x : v) x = std::max(x - tau, 0.0);
}

/// Euclidean-nearest point on the probability simplex.
inline std::vector<double> project_simplex(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  project_simplex_inplace(out);
  return out;
}

/// Per-state policy rows live on the same simplex; identical contract.
inline std::vector<double> project_policy_row(std::span<const double> row) {
  return project_simplex(row);
}

}  // namespace mcac
