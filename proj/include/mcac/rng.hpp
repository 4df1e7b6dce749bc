#pragma once

#include <cstdint>
#include <random>

namespace mcac {

/// Seeded uniform stream. Every uniform() consumes exactly one engine
/// output, so a replayed seed reproduces draw sequences bit-exactly
/// regardless of what the draws are used for.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1), built from the top 53 bits of one output.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mcac
