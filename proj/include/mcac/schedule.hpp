#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace mcac {

/// Learning-rate schedule rate(t) = scale / (t + offset)^exponent.
/// The non-constant forms satisfy the Robbins-Monro conditions
/// (sum = inf, sum of squares < inf) whenever exponent is in (0.5, 1].
/// The constant form exists for tests only and is non-conformant.
struct Schedule {
  enum class Form { InverseTime, PowerLaw, Constant };

  Form form = Form::InverseTime;
  double scale = 1.0;      // c > 0
  double exponent = 1.0;   // alpha, in (0.5, 1] for conformance
  double offset = 1.0;     // t0 > 0, keeps rate(0) finite

  double rate(std::uint64_t t) const {
    switch (form) {
      case Form::Constant:
        return scale;
      case Form::InverseTime:
        return scale / (static_cast<double>(t) + offset);
      case Form::PowerLaw:
        return scale / std::pow(static_cast<double>(t) + offset, exponent);
    }
    throw std::logic_error("Schedule: unknown form");
  }

  bool conformant() const {
    if (form == Form::Constant) return false;
    const double alpha = form == Form::InverseTime ? 1.0 : exponent;
    return scale > 0.0 && offset > 0.0 && alpha > 0.5 && alpha <= 1.0;
  }

  static Schedule inverse_time(double c, double t0) {
    return {Form::InverseTime, c, 1.0, t0};
  }
  static Schedule power_law(double c, double alpha, double t0) {
    return {Form::PowerLaw, c, alpha, t0};
  }
  static Schedule constant(double c) { return {Form::Constant, c, 1.0, 1.0}; }
};

/// Coupled schedule pair: the slow (policy) rate must stay below the fast
/// (weight/value) rate and their ratio must vanish as t grows.
struct TwoTimescale {
  Schedule fast;
  Schedule slow;

  /// Spot-check of the separation invariant over a sampled range of t.
  bool separated(std::uint64_t t_max = 1'000'000) const {
    double prev_ratio = slow.rate(1) / fast.rate(1);
    if (!(slow.rate(1) < fast.rate(1))) return false;
    for (std::uint64_t t = 2; t <= t_max; t = t < 64 ? t + 1 : t + t / 16) {
      const double ratio = slow.rate(t) / fast.rate(t);
      if (!(slow.rate(t) < fast.rate(t)) || ratio > prev_ratio) return false;
      prev_ratio = ratio;
    }
    return true;
  }
};

/// Default rate pair: fast weight/value rate 1/(1 + t/250)^0.6, slow
/// policy rate 0.1/(1 + t/250). The slow rate carries the larger decay
/// exponent so the ratio slow/fast shrinks like (t + 250)^-0.4.
inline TwoTimescale default_two_timescale() {
  return {Schedule::power_law(std::pow(250.0, 0.6), 0.6, 250.0),
          Schedule::inverse_time(0.1 * 250.0, 250.0)};
}

/// Rate pair for critic pre-training, where the goal is a value table
/// that is accurate at every state rather than fast autonomy. The much
/// colder policy rate keeps exploration alive long enough for the critic
/// to track the evaluated policy everywhere; with the default pair the
/// policy pins to a vertex within the first episodes (reward scale ~100)
/// and off-path values freeze stale.
inline TwoTimescale pretrain_two_timescale() {
  return {Schedule::power_law(std::pow(250.0, 0.8), 0.8, 250.0),
          Schedule::inverse_time(0.625, 250.0)};
}

}  // namespace mcac
