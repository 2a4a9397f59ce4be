#include <gtest/gtest.h>

#include <cmath>

#include "evc/selfcheck.hpp"

namespace evc::check {
namespace {

TEST(SelfCheck, GradientSuitePasses) {
  const auto results = RunGradientChecks(7, 100);
  ASSERT_EQ(results.size(), 3u);
  for (const auto& r : results) {
    EXPECT_TRUE(r.passed) << r.name << " " << r.max_error;
    EXPECT_LT(r.max_error, 1e-5) << r.name;
    EXPECT_EQ(r.cases, 100u);
  }
}

TEST(SelfCheck, OracleSuitePasses) {
  for (const auto& r : RunOracleChecks(7)) EXPECT_TRUE(r.passed) << r.name << " " << r.max_error;
}

TEST(Oracles, BruteForceDtwSmallCases) {
  EXPECT_EQ(BruteForceDtwCost(std::vector<double>{0}, std::vector<double>{1, 1, 1}), 3.0);
  EXPECT_EQ(BruteForceDtwCost(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}), 0.0);
  // Best path pairs 0-0, 3-3 and needs one extra step through 0-3 or 3-0.
  EXPECT_EQ(BruteForceDtwCost(std::vector<double>{0, 3}, std::vector<double>{0, 0, 3}), 0.0);
  EXPECT_EQ(BruteForceDtwCost(std::vector<double>{0, 3}, std::vector<double>{3, 0}), 6.0);
}

TEST(Oracles, SavgolOracleReproducesAQuadratic) {
  std::vector<double> x(15);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] = 0.5 * t * t - 3.0 * t + 1.0;
  const auto y = SavgolOracle(x, 7, 2);
  for (std::size_t t = 0; t < x.size(); ++t) EXPECT_NEAR(y[t], x[t], 1e-9);
}

TEST(Oracles, NumericGradientDetectsAWrongDerivative) {
  const auto f = [](std::span<const double> v) { return v[0] * v[0] * v[1] + std::sin(v[1]); };
  const std::vector<double> x = {1.5, -0.7};
  const auto num = NumericGradient(f, x);
  const std::vector<double> right = {2.0 * 1.5 * -0.7, 1.5 * 1.5 + std::cos(-0.7)};
  const std::vector<double> wrong = {right[0], right[1] * 1.001};
  EXPECT_LT(GradientRelativeError(right, num), 1e-8);
  EXPECT_GT(GradientRelativeError(wrong, num), 1e-5);
}

TEST(CheckResult, Json) {
  CheckResult r{"x", true, 0.5, 1.0, 3};
  EXPECT_EQ(CheckResultToJson(r), R"({"check":"x","passed":true,"max_error":0.5,"tolerance":1.0,"cases":3})");
}

}  // namespace
}  // namespace evc::check
