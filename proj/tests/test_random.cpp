#include <gtest/gtest.h>

#include <cmath>

#include "evc/random.hpp"
#include "test_util.hpp"

namespace evc {
namespace {

// The standard fixes the 10000th output of a default-seeded mt19937_64.
TEST(Rng, EngineMatchesTheStandardSequence) {
  Rng rng(5489);
  std::uint64_t x = 0;
  for (int i = 0; i < 10000; ++i) x = rng.NextU64();
  EXPECT_EQ(x, 9981545732273789042ull);
}

TEST(Rng, MappingsFollowTheDocumentedFormulas) {
  Rng a(123), b(123);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t raw = b.NextU64();
    EXPECT_EQ(a.Uniform01(), static_cast<double>(raw >> 11) / 9007199254740992.0);
  }
  Rng c(9), d(9);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(c.Coin(), (d.NextU64() >> 63) == 1);
  // Span 8 divides 2^64, so nothing is ever rejected.
  Rng e(10), f(10);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(e.UniformInt(-3, 4), -3 + static_cast<std::int64_t>(f.NextU64() % 8));
  }
}

TEST(Rng, RangesRespected) {
  Rng rng(1);
  for (int i = 0; i < 20000; ++i) {
    const auto k = rng.UniformInt(-15, 15);
    EXPECT_GE(k, -15);
    EXPECT_LE(k, 15);
    const double u = rng.UniformReal(0.4, 1.6);
    EXPECT_GE(u, 0.4);
    EXPECT_LT(u, 1.6);
  }
  EXPECT_EQ(rng.UniformInt(7, 7), 7);
  EXPECT_EQ(testing::CodeOf([&] { rng.UniformInt(2, 1); }), ErrorCode::kInvalidArgument);
}

TEST(Rng, GaussianMoments) {
  Rng rng(2);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double g = rng.Gaussian();
    ASSERT_TRUE(std::isfinite(g));
    s += g;
    s2 += g * g;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

}  // namespace
}  // namespace evc
