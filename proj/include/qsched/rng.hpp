#pragma once

#include <cstdint>
#include <random>

namespace qsched {

// Seeded random stream. Uniform variates are built from the raw 64-bit
// engine output so results do not depend on the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential(double mean);

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Independent sub-stream seed for (base, stream) via splitmix64 mixing.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace qsched
