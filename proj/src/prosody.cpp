#include "evc/prosody.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

#include "evc/error.hpp"

namespace evc {

void F0Params::Validate(int sample_rate) const {
  Require(sample_rate > 0, ErrorCode::kInvalidArgument, "sample rate must be positive");
  Require(f0_min > 0.0 && f0_min < f0_max, ErrorCode::kInvalidArgument,
          "f0 params: need 0 < f0_min < f0_max");
  Require(f0_max <= sample_rate / 2.0, ErrorCode::kInvalidArgument,
          "f0 params: f0_max must not exceed the Nyquist frequency");
  Require(periodicity_threshold > 0.0 && periodicity_threshold < 1.0,
          ErrorCode::kInvalidArgument, "f0 params: periodicity_threshold must be in (0, 1)");
  Require(hop_size > 0 && hop_size <= frame_length, ErrorCode::kInvalidArgument,
          "f0 params: need 0 < hop_size <= frame_length");
}

std::size_t F0Params::AnalysisWindow(int sample_rate) const {
  return static_cast<std::size_t>(std::ceil(2.0 * sample_rate / f0_min));
}

F0Track EstimateF0(const Waveform& w, const F0Params& p) {
  p.Validate(w.sample_rate);
  Require(std::all_of(w.samples.begin(), w.samples.end(), [](double x) { return std::isfinite(x); }),
          ErrorCode::kInvalidArgument, "waveform contains non-finite samples");
  const std::size_t n = w.samples.size();
  const std::size_t win = p.AnalysisWindow(w.sample_rate);
  Require(n >= win && n >= p.frame_length, ErrorCode::kTooShort,
          "signal has " + std::to_string(n) + " samples; F0 analysis needs at least " +
              std::to_string(std::max(win, p.frame_length)));

  const double sr = static_cast<double>(w.sample_rate);
  const auto lag_min = static_cast<std::ptrdiff_t>(std::max(2.0, std::floor(sr / p.f0_max)));
  const auto lag_max = static_cast<std::ptrdiff_t>(std::ceil(sr / p.f0_min));
  const auto iwin = static_cast<std::ptrdiff_t>(win);

  const std::size_t frames = NumFrames(n, p.frame_length, p.hop_size);
  F0Track track;
  track.f0.frame_hop = p.hop_size;
  track.f0.values.assign(frames, 0.0);
  track.vuv.flags.assign(frames, 0);
  track.periodicity.assign(frames, 0.0);

  std::vector<double> x(win);
  // r[lag - lag_min + 1] for lag in [lag_min - 1, lag_max + 1]
  std::vector<double> r(static_cast<std::size_t>(lag_max - lag_min + 3));

  for (std::size_t t = 0; t < frames; ++t) {
    const auto centre = static_cast<std::ptrdiff_t>(t * p.hop_size + p.frame_length / 2);
    const std::ptrdiff_t start = centre - iwin / 2;
    double mean = 0.0;
    for (std::ptrdiff_t i = 0; i < iwin; ++i) {
      const std::ptrdiff_t s = start + i;
      x[static_cast<std::size_t>(i)] =
          (s >= 0 && s < static_cast<std::ptrdiff_t>(n)) ? w.samples[static_cast<std::size_t>(s)] : 0.0;
      mean += x[static_cast<std::size_t>(i)];
    }
    mean /= static_cast<double>(win);
    double energy = 0.0;
    for (auto& v : x) {
      v -= mean;
      energy += v * v;
    }
    const double rms = std::sqrt(energy / static_cast<double>(win));
    if (rms <= kVoicingRmsFloor) continue;

    double best = 0.0;
    for (std::ptrdiff_t lag = lag_min - 1; lag <= lag_max + 1; ++lag) {
      double num = 0.0, e0 = 0.0, e1 = 0.0;
      for (std::ptrdiff_t i = 0; i + lag < iwin; ++i) {
        const double a = x[static_cast<std::size_t>(i)];
        const double b = x[static_cast<std::size_t>(i + lag)];
        num += a * b;
        e0 += a * a;
        e1 += b * b;
      }
      const double v = (e0 > 0.0 && e1 > 0.0) ? num / std::sqrt(e0 * e1) : 0.0;
      r[static_cast<std::size_t>(lag - lag_min + 1)] = v;
      if (lag >= lag_min && lag <= lag_max) best = std::max(best, v);
    }
    if (best <= 0.0) continue;

    auto at = [&](std::ptrdiff_t lag) { return r[static_cast<std::size_t>(lag - lag_min + 1)]; };
    std::ptrdiff_t peak = -1;
    for (std::ptrdiff_t lag = lag_min; lag <= lag_max; ++lag) {
      const double v = at(lag);
      if (v >= 0.9 * best && v >= at(lag - 1) && v > at(lag + 1)) {
        peak = lag;
        break;
      }
    }
    if (peak < 0) continue;

    const double a = at(peak - 1), b = at(peak), c = at(peak + 1);
    const double denom = a - 2.0 * b + c;
    double delta = denom < 0.0 ? 0.5 * (a - c) / denom : 0.0;
    delta = std::clamp(delta, -0.5, 0.5);
    const double f0 = sr / (static_cast<double>(peak) + delta);

    track.periodicity[t] = b;
    if (b > p.periodicity_threshold && f0 >= p.f0_min && f0 <= p.f0_max) {
      track.f0.values[t] = f0;
      track.vuv.flags[t] = 1;
    }
  }
  return track;
}

void SavgolParams::Validate() const {
  Require(window % 2 == 1, ErrorCode::kInvalidArgument, "savgol window must be odd");
  Require(window > order, ErrorCode::kInvalidArgument, "savgol window must exceed the order");
}

RowMatrix SavgolWeights(std::size_t window, std::size_t order) {
  SavgolParams{window, order}.Validate();
  const auto w = static_cast<Eigen::Index>(window);
  const auto cols = static_cast<Eigen::Index>(order + 1);
  const double half = static_cast<double>(window / 2);
  const double scale = half > 0.0 ? half : 1.0;

  // Offsets scaled into [-1, 1] keep the Vandermonde system well conditioned.
  Eigen::MatrixXd vander(w, cols);
  for (Eigen::Index r = 0; r < w; ++r) {
    const double u = (static_cast<double>(r) - half) / scale;
    double pw = 1.0;
    for (Eigen::Index k = 0; k < cols; ++k) {
      vander(r, k) = pw;
      pw *= u;
    }
  }
  // Least-squares coefficients as a linear map of the window values.
  const Eigen::MatrixXd pinv =
      vander.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(w, w));
  return vander * pinv;
}

std::vector<double> SavgolSmooth(std::span<const double> values, const SavgolParams& p) {
  p.Validate();
  const std::size_t n = values.size();
  Require(n >= 1, ErrorCode::kInvalidArgument, "cannot smooth an empty contour");

  std::size_t window = p.window;
  std::size_t order = p.order;
  if (n < window) {
    window = (n % 2 == 1) ? n : n - 1;
    order = std::min(order, window - 1);
  }
  const RowMatrix weights = SavgolWeights(window, order);
  const std::size_t half = window / 2;

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t start, row;
    if (i < half) {
      start = 0;
      row = i;
    } else if (i + half >= n) {
      start = n - window;
      row = i - start;
    } else {
      start = i - half;
      row = half;
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < window; ++j) {
      acc += weights(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) * values[start + j];
    }
    out[i] = acc;
  }
  return out;
}

Contour SavgolSmooth(const Contour& c, const SavgolParams& p) {
  Contour out;
  out.frame_hop = c.frame_hop;
  out.values = SavgolSmooth(std::span<const double>(c.values), p);
  return out;
}

Contour SavgolSmoothF0(const Contour& f0, const VuvMask& vuv, const SavgolParams& p) {
  Require(f0.size() == vuv.size(), ErrorCode::kInvalidArgument,
          "F0 contour and VUV mask lengths differ");
  const std::size_t n = f0.size();
  Contour out;
  out.frame_hop = f0.frame_hop;
  out.values.assign(n, 0.0);
  p.Validate();
  Require(n >= 1, ErrorCode::kInvalidArgument, "cannot smooth an empty contour");

  std::vector<std::size_t> voiced;
  for (std::size_t i = 0; i < n; ++i) {
    if (vuv.flags[i]) voiced.push_back(i);
  }
  if (voiced.empty()) return out;

  std::vector<double> bridged(n);
  std::size_t next = 0;  // index into `voiced` of the first voiced frame >= i
  for (std::size_t i = 0; i < n; ++i) {
    while (next < voiced.size() && voiced[next] < i) ++next;
    if (next < voiced.size() && voiced[next] == i) {
      bridged[i] = f0.values[i];
    } else if (next == 0) {
      bridged[i] = f0.values[voiced.front()];
    } else if (next == voiced.size()) {
      bridged[i] = f0.values[voiced.back()];
    } else {
      const std::size_t lo = voiced[next - 1];
      const std::size_t hi = voiced[next];
      const double frac = static_cast<double>(i - lo) / static_cast<double>(hi - lo);
      bridged[i] = f0.values[lo] + frac * (f0.values[hi] - f0.values[lo]);
    }
  }

  const auto smoothed = SavgolSmooth(std::span<const double>(bridged), p);
  for (std::size_t i = 0; i < n; ++i) {
    if (vuv.flags[i]) out.values[i] = smoothed[i];
  }
  return out;
}

}  // namespace evc
