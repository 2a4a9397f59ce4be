#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

// Reference oracles and the on-demand check suites behind `evc check`.
//
// The oracles are deliberately naive and share no code with the routines
// they check: DTW cost by enumerating every monotone path, Savitzky-Golay by
// solving one least-squares problem per window, gradients by central
// differences.
namespace evc::check {

inline constexpr double kFiniteDifferenceStep = 1e-5;
inline constexpr double kGradientTolerance = 1e-5;
inline constexpr double kSavgolTolerance = 1e-9;

// Minimum total |a_i - b_j| over all monotone paths from (0,0) to the far
// corner with unit steps right, down or diagonal.
double BruteForceDtwCost(std::span<const double> a, std::span<const double> b);

// Per-frame least-squares polynomial fit evaluated at the frame, fitted over
// the centred window (or the first/last full window near the edges).
std::vector<double> SavgolOracle(std::span<const double> values, std::size_t window,
                                 std::size_t order);

// Central-difference gradient of a scalar function.
std::vector<double> NumericGradient(const std::function<double(std::span<const double>)>& f,
                                    std::vector<double> x, double step = kFiniteDifferenceStep);

// |a - n|_2 / max(|a|_2 + |n|_2, 1e-12).
double GradientRelativeError(std::span<const double> analytic, std::span<const double> numeric);

struct CheckResult {
  std::string name;
  bool passed = false;
  double max_error = 0.0;
  double tolerance = 0.0;
  std::size_t cases = 0;
};

std::string CheckResultToJson(const CheckResult& r);

// loss_prosody, loss_triplet and cross_entropy against central differences.
std::vector<CheckResult> RunGradientChecks(std::uint64_t seed = 7, std::size_t instances = 100);

// DTW brute-force sweep, Savitzky-Golay polynomial exactness and
// least-squares oracle equality.
std::vector<CheckResult> RunOracleChecks(std::uint64_t seed = 7);

}  // namespace evc::check
