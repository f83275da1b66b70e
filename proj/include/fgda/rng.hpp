#pragma once

#include <cstdint>
#include <random>

namespace fgda {

// Seeded random stream with a fixed mapping from raw 64-bit draws to doubles,
// so generated noise is identical across platforms and standard library
// versions.  std::uniform_real_distribution is deliberately avoided: its
// output is implementation defined.
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0,1) with 53 random bits.
  double unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Identifier recorded in run manifests so outputs declare their noise law.
  static const char* id() { return "mt19937_64/u53"; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fgda
