#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "evc/contour.hpp"
#include "evc/signal_io.hpp"

namespace evc {

struct F0Params {
  double f0_min = 50.0;
  double f0_max = 600.0;
  double periodicity_threshold = 0.45;
  // Frames are laid out exactly like the mel frames of the same
  // frame_length/hop so F0 and energy contours line up one-to-one.
  std::size_t frame_length = 1024;
  std::size_t hop_size = 256;

  void Validate(int sample_rate) const;

  // ceil(2 * sample_rate / f0_min) samples.
  std::size_t AnalysisWindow(int sample_rate) const;
};

// RMS floor below which a frame is always unvoiced.
inline constexpr double kVoicingRmsFloor = 1e-4;

struct F0Track {
  Contour f0;
  VuvMask vuv;
  // Peak normalized autocorrelation per frame (0 when no peak was found).
  std::vector<double> periodicity;
};

// Normalized-autocorrelation pitch tracker. Each frame analyses a window of
// AnalysisWindow() samples centred on the matching mel frame's centre, picks
// the shortest-lag local maximum within 90% of the best correlation in the
// [1/f0_max, 1/f0_min] lag range and refines it by parabolic interpolation.
// A frame is voiced iff its peak exceeds periodicity_threshold, its RMS
// exceeds kVoicingRmsFloor and the refined F0 lies in [f0_min, f0_max].
F0Track EstimateF0(const Waveform& w, const F0Params& p);

struct SavgolParams {
  std::size_t window = 9;
  std::size_t order = 2;

  void Validate() const;
};

// Centre-evaluation weights of the least-squares polynomial fit of `order`
// over a window of `window` points. Row r holds the weights that evaluate the
// fit at offset r - window / 2, so the middle row is the ordinary filter and
// the outer rows are used on the edges.
RowMatrix SavgolWeights(std::size_t window, std::size_t order);

// Savitzky-Golay smoothing. Interior frames use the centred filter; the first
// and last window/2 frames evaluate the polynomial fitted to the first/last
// full window, so polynomials of degree <= order pass through unchanged
// everywhere. Contours shorter than the window are fitted with the largest
// odd window that fits.
std::vector<double> SavgolSmooth(std::span<const double> values, const SavgolParams& p);
Contour SavgolSmooth(const Contour& c, const SavgolParams& p);

// F0 variant: unvoiced gaps are linearly bridged from the flanking voiced
// values (leading/trailing gaps hold the nearest voiced value), the result is
// smoothed, and unvoiced frames are reset to 0. All-unvoiced input yields all
// zeros.
Contour SavgolSmoothF0(const Contour& f0, const VuvMask& vuv, const SavgolParams& p);

}  // namespace evc
