#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "evc/contour.hpp"
#include "evc/random.hpp"

namespace evc {

struct AugmentParams {
  int max_shift = 15;  // shifts are drawn from [-max_shift, max_shift]
  int min_segments = 2;
  int max_segments = 5;
  double min_scale = 0.4;
  double max_scale = 1.6;

  void Validate() const;
};

enum class AugmentOp { kShift, kWarp };

const char* AugmentOpName(AugmentOp op);

// The random draw that pro-aug made, enough to replay it.
struct AugmentDraw {
  AugmentOp op = AugmentOp::kShift;
  int shift = 0;
  std::vector<std::size_t> boundaries;  // interior split indices, ascending
  std::vector<double> scales;           // one per segment
};

struct AugmentResult {
  Contour f0;
  Contour energy;
  AugmentDraw draw;
};

// Linear interpolation onto `out_len` points with the end points pinned
// (output i samples input position i * (n - 1) / (out_len - 1)). A single
// output point samples the midpoint of the input.
std::vector<double> ResampleLinear(std::span<const double> values, std::size_t out_len);

// Moves values by `shift` frames (positive = later). Vacated frames repeat
// the nearest original boundary value. Requires |shift| < size.
std::vector<double> RandomShift(std::span<const double> values, int shift);

// Splits at `boundaries`, resamples segment k to max(1, round(len_k *
// scales[k])) frames, concatenates, and resamples the result back to the
// input length.
std::vector<double> PiecewiseTimeWarp(std::span<const double> values,
                                      std::span<const std::size_t> boundaries,
                                      std::span<const double> scales);

// Draws one augmentation for a contour of `length` frames. Shifts are clipped
// to |shift| < length and the segment count to at most `length`.
AugmentDraw DrawAugment(std::size_t length, const AugmentParams& p, Rng& rng);

std::vector<double> ApplyAugment(std::span<const double> values, const AugmentDraw& draw);

// Picks shift or warp with equal probability and applies the same draw to
// both contours.
AugmentResult ProAug(const Contour& f0_smooth, const Contour& energy_smooth,
                     const AugmentParams& p, Rng& rng);

}  // namespace evc
