#include "evc/random.hpp"

#include <cmath>
#include <numbers>

#include "evc/error.hpp"

namespace evc {

std::int64_t Rng::UniformInt(std::int64_t lo, std::int64_t hi) {
  Require(lo <= hi, ErrorCode::kInvalidArgument, "UniformInt: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(NextU64());  // full 64-bit range
  const std::uint64_t threshold = (0 - span) % span;
  std::uint64_t x = NextU64();
  while (x < threshold) x = NextU64();
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + x % span);
}

double Rng::UniformReal(double lo, double hi) {
  return lo + (hi - lo) * Uniform01();
}

double Rng::Gaussian() {
  const double u1 = 1.0 - Uniform01();  // (0, 1]
  const double u2 = Uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace evc
