#pragma once

#include <cstdint>
#include <random>

namespace evc {

// Seedable generator with a platform-independent output sequence.
//
// The engine is std::mt19937_64, whose output is fixed by the standard. The
// std:: distributions are not (libstdc++ and libc++ disagree), so the
// integer and real mappings below are spelled out:
//   * UniformInt(lo, hi): with span = hi - lo + 1, raw draws below
//     2^64 mod span are rejected and the result is lo + (x mod span).
//   * UniformReal(lo, hi): lo + (hi - lo) * ((x >> 11) * 2^-53).
//   * Coin(): top bit of one 64-bit draw.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  // Inclusive on both ends. Requires lo <= hi.
  std::int64_t UniformInt(std::int64_t lo, std::int64_t hi);

  // [lo, hi).
  double UniformReal(double lo, double hi);

  double Uniform01() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

  bool Coin() { return (NextU64() >> 63) != 0; }

  // Standard normal via Box-Muller on two Uniform01 draws.
  double Gaussian();

 private:
  std::mt19937_64 engine_;
};

}  // namespace evc
