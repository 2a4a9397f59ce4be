#include "evc/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "evc/error.hpp"

namespace evc {

void AugmentParams::Validate() const {
  Require(max_shift >= 0, ErrorCode::kInvalidArgument, "augment: max_shift must be >= 0");
  Require(min_segments >= 2 && min_segments <= max_segments, ErrorCode::kInvalidArgument,
          "augment: need 2 <= min_segments <= max_segments");
  Require(min_scale > 0.0 && min_scale <= max_scale && std::isfinite(max_scale),
          ErrorCode::kInvalidArgument, "augment: need 0 < min_scale <= max_scale");
}

const char* AugmentOpName(AugmentOp op) {
  return op == AugmentOp::kShift ? "shift" : "warp";
}

std::vector<double> ResampleLinear(std::span<const double> values, std::size_t out_len) {
  const std::size_t n = values.size();
  Require(n >= 1, ErrorCode::kInvalidArgument, "cannot resample an empty sequence");
  std::vector<double> out(out_len);
  if (out_len == 0) return out;
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos = out_len == 1
                           ? static_cast<double>(n - 1) / 2.0
                           : static_cast<double>(i) * static_cast<double>(n - 1) /
                                 static_cast<double>(out_len - 1);
    const auto lo = std::min(static_cast<std::size_t>(pos), n - 1);
    if (lo + 1 >= n) {
      out[i] = values[n - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(lo);
    const double a = values[lo];
    const double b = values[lo + 1];
    // Clamp so rounding can never step outside the bracketing samples.
    out[i] = std::clamp(a + frac * (b - a), std::min(a, b), std::max(a, b));
  }
  return out;
}

std::vector<double> RandomShift(std::span<const double> values, int shift) {
  const auto n = static_cast<std::ptrdiff_t>(values.size());
  Require(std::abs(static_cast<std::ptrdiff_t>(shift)) < n, ErrorCode::kInvalidArgument,
          "shift of " + std::to_string(shift) + " frames needs a contour longer than " +
              std::to_string(std::abs(shift)) + " frames");
  std::vector<double> out(values.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t src = std::clamp<std::ptrdiff_t>(i - shift, 0, n - 1);
    out[static_cast<std::size_t>(i)] = values[static_cast<std::size_t>(src)];
  }
  return out;
}

std::vector<double> PiecewiseTimeWarp(std::span<const double> values,
                                      std::span<const std::size_t> boundaries,
                                      std::span<const double> scales) {
  const std::size_t n = values.size();
  Require(n >= 1, ErrorCode::kInvalidArgument, "cannot warp an empty contour");
  Require(scales.size() == boundaries.size() + 1, ErrorCode::kInvalidArgument,
          "time warp: need exactly one scale per segment");
  std::size_t prev = 0;
  for (std::size_t b : boundaries) {
    Require(b > prev && b < n, ErrorCode::kInvalidArgument,
            "time warp: boundaries must be strictly increasing interior indices");
    prev = b;
  }
  for (double s : scales) {
    Require(std::isfinite(s) && s > 0.0, ErrorCode::kInvalidArgument,
            "time warp: scales must be positive");
  }

  std::vector<double> stretched;
  std::size_t begin = 0;
  for (std::size_t k = 0; k < scales.size(); ++k) {
    const std::size_t end = k < boundaries.size() ? boundaries[k] : n;
    const std::size_t len = end - begin;
    const auto target = static_cast<std::size_t>(
        std::max<long>(1, std::lround(static_cast<double>(len) * scales[k])));
    const auto seg = ResampleLinear(values.subspan(begin, len), target);
    stretched.insert(stretched.end(), seg.begin(), seg.end());
    begin = end;
  }
  return ResampleLinear(stretched, n);
}

AugmentDraw DrawAugment(std::size_t length, const AugmentParams& p, Rng& rng) {
  p.Validate();
  Require(length >= 1, ErrorCode::kInvalidArgument, "cannot augment an empty contour");
  AugmentDraw draw;
  draw.op = rng.Coin() ? AugmentOp::kWarp : AugmentOp::kShift;
  if (draw.op == AugmentOp::kShift) {
    const auto limit = std::min<std::int64_t>(p.max_shift, static_cast<std::int64_t>(length) - 1);
    draw.shift = static_cast<int>(rng.UniformInt(-limit, limit));
    return draw;
  }

  auto segments = static_cast<std::size_t>(rng.UniformInt(p.min_segments, p.max_segments));
  segments = std::min(segments, length);
  // Partial Fisher-Yates over the interior indices 1..length-1.
  std::vector<std::size_t> interior(length - 1);
  std::iota(interior.begin(), interior.end(), std::size_t{1});
  for (std::size_t k = 0; k + 1 < segments; ++k) {
    const auto j = static_cast<std::size_t>(
        rng.UniformInt(static_cast<std::int64_t>(k), static_cast<std::int64_t>(interior.size()) - 1));
    std::swap(interior[k], interior[j]);
  }
  draw.boundaries.assign(interior.begin(), interior.begin() + static_cast<std::ptrdiff_t>(segments - 1));
  std::sort(draw.boundaries.begin(), draw.boundaries.end());
  draw.scales.resize(segments);
  for (auto& s : draw.scales) s = rng.UniformReal(p.min_scale, p.max_scale);
  return draw;
}

std::vector<double> ApplyAugment(std::span<const double> values, const AugmentDraw& draw) {
  if (draw.op == AugmentOp::kShift) return RandomShift(values, draw.shift);
  return PiecewiseTimeWarp(values, draw.boundaries, draw.scales);
}

AugmentResult ProAug(const Contour& f0_smooth, const Contour& energy_smooth,
                     const AugmentParams& p, Rng& rng) {
  Require(f0_smooth.size() == energy_smooth.size(), ErrorCode::kInvalidArgument,
          "pro-aug: F0 and energy contours differ in length");
  AugmentResult r;
  r.draw = DrawAugment(f0_smooth.size(), p, rng);
  r.f0.frame_hop = f0_smooth.frame_hop;
  r.energy.frame_hop = energy_smooth.frame_hop;
  r.f0.values = ApplyAugment(f0_smooth.values, r.draw);
  r.energy.values = ApplyAugment(energy_smooth.values, r.draw);
  return r;
}

}  // namespace evc
