#include "evc/signal_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "evc/error.hpp"
#include "io_util.hpp"

namespace evc {

namespace {

std::uint32_t ReadU32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t ReadU16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void PutU16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void PutTag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

// Planning is not thread-safe in FFTW; execution with the new-array
// interface is.
std::mutex g_fftw_planner_mutex;

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    in_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    out_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
    std::lock_guard<std::mutex> lock(g_fftw_planner_mutex);
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard<std::mutex> lock(g_fftw_planner_mutex);
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_; }

  // Magnitudes of bins 0..n/2 of the current input.
  void Magnitudes(double* dst) {
    fftw_execute(plan_);
    for (std::size_t k = 0; k <= n_ / 2; ++k) dst[k] = std::hypot(out_[k][0], out_[k][1]);
  }

 private:
  std::size_t n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_;
};

constexpr double kMelFsp = 200.0 / 3.0;
constexpr double kMinLogHz = 1000.0;
constexpr double kMinLogMel = kMinLogHz / kMelFsp;
const double kLogStep = std::log(6.4) / 27.0;

}  // namespace

void FrameParams::Validate(int sample_rate) const {
  Require(sample_rate > 0, ErrorCode::kInvalidArgument, "sample rate must be positive");
  Require(hop_size > 0 && hop_size <= window_size, ErrorCode::kInvalidArgument,
          "frame params: need 0 < hop_size <= window_size");
  Require(n_mels >= 1, ErrorCode::kInvalidArgument, "frame params: n_mels must be >= 1");
  Require(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate / 2.0, ErrorCode::kInvalidArgument,
          "frame params: need 0 <= fmin < fmax <= sample_rate / 2");
}

std::size_t NumFrames(std::size_t num_samples, std::size_t window_size, std::size_t hop_size) {
  if (num_samples < window_size || hop_size == 0) return 0;
  return 1 + (num_samples - window_size) / hop_size;
}

Waveform LoadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());

  auto bad = [&](const std::string& why) { Fail(ErrorCode::kFormat, path + ": " + why); };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    bad("not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  int channels = 0;
  int bits = 0;
  int sample_rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    std::size_t size = ReadU32(chunk + 4);
    std::size_t body = pos + 8;
    std::size_t available = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || size > available) bad("truncated fmt chunk");
      const std::uint8_t* f = bytes.data() + body;
      std::uint16_t tag = ReadU16(f);
      channels = ReadU16(f + 2);
      sample_rate = static_cast<int>(ReadU32(f + 4));
      bits = ReadU16(f + 14);
      if (tag == 0xFFFE) {
        if (size < 40) bad("truncated WAVE_FORMAT_EXTENSIBLE header");
        tag = ReadU16(f + 24);  // first two bytes of the sub-format GUID
      }
      if (tag == 3) {
        Fail(ErrorCode::kUnsupportedDepth, path + ": floating-point samples are not supported");
      }
      if (tag != 1) bad("unsupported format tag " + std::to_string(tag));
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = std::min(size, available);
      break;
    }
    pos = body + size + (size & 1);
  }

  if (!have_fmt) bad("missing fmt chunk");
  if (data == nullptr) bad("missing data chunk");
  if (channels != 1) {
    Fail(ErrorCode::kUnsupportedChannels,
         path + ": expected mono, got " + std::to_string(channels) + " channels");
  }
  if (bits != 16) {
    Fail(ErrorCode::kUnsupportedDepth,
         path + ": expected 16-bit samples, got " + std::to_string(bits));
  }
  if (sample_rate <= 0) bad("invalid sample rate");

  Waveform w;
  w.sample_rate = sample_rate;
  const std::size_t n = data_size / 2;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto v = static_cast<std::int16_t>(ReadU16(data + 2 * i));
    w.samples[i] = static_cast<double>(v) / 32768.0;
  }
  return w;
}

void SaveWav(const Waveform& w, const std::string& path) {
  Require(w.sample_rate > 0, ErrorCode::kInvalidArgument, "sample rate must be positive");
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  PutTag(out, "RIFF");
  PutU32(out, 36 + data_bytes);
  PutTag(out, "WAVE");
  PutTag(out, "fmt ");
  PutU32(out, 16);
  PutU16(out, 1);
  PutU16(out, 1);
  PutU32(out, static_cast<std::uint32_t>(w.sample_rate));
  PutU32(out, static_cast<std::uint32_t>(w.sample_rate) * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  PutTag(out, "data");
  PutU32(out, data_bytes);
  for (double x : w.samples) {
    double scaled = std::round(x * 32768.0);
    scaled = std::clamp(scaled, -32768.0, 32767.0);
    PutU16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }
  WriteTextFile(path, std::string_view(reinterpret_cast<const char*>(out.data()), out.size()));
}

double HzToMel(double hz) {
  if (hz < kMinLogHz) return hz / kMelFsp;
  return kMinLogMel + std::log(hz / kMinLogHz) / kLogStep;
}

double MelToHz(double mel) {
  if (mel < kMinLogMel) return mel * kMelFsp;
  return kMinLogHz * std::exp(kLogStep * (mel - kMinLogMel));
}

std::vector<double> MelBandEdges(const FrameParams& p) {
  const double lo = HzToMel(p.fmin);
  const double hi = HzToMel(p.fmax);
  const std::size_t n = p.n_mels + 2;
  std::vector<double> edges(n);
  for (std::size_t i = 0; i < n; ++i) {
    edges[i] = MelToHz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return edges;
}

RowMatrix MelFilterbank(const FrameParams& p, int sample_rate) {
  p.Validate(sample_rate);
  const std::size_t bins = p.window_size / 2 + 1;
  const auto edges = MelBandEdges(p);
  RowMatrix fb = RowMatrix::Zero(static_cast<Eigen::Index>(p.n_mels), static_cast<Eigen::Index>(bins));
  for (std::size_t m = 0; m < p.n_mels; ++m) {
    const double left = edges[m];
    const double centre = edges[m + 1];
    const double right = edges[m + 2];
    const double norm = 2.0 / (right - left);
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(p.window_size);
      const double rise = (f - left) / (centre - left);
      const double fall = (right - f) / (right - centre);
      const double w = std::max(0.0, std::min(rise, fall));
      fb(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) = w * norm;
    }
  }
  return fb;
}

MelSpectrogram ComputeMelSpectrogram(const Waveform& w, const FrameParams& p) {
  p.Validate(w.sample_rate);
  Require(std::all_of(w.samples.begin(), w.samples.end(), [](double x) { return std::isfinite(x); }),
          ErrorCode::kInvalidArgument, "waveform contains non-finite samples");
  Require(w.samples.size() >= p.window_size, ErrorCode::kTooShort,
          "signal has " + std::to_string(w.samples.size()) + " samples, shorter than one " +
              std::to_string(p.window_size) + "-sample window");

  const std::size_t n = p.window_size;
  const std::size_t bins = n / 2 + 1;
  const std::size_t frames = NumFrames(w.samples.size(), n, p.hop_size);

  std::vector<double> window(n);
  for (std::size_t i = 0; i < n; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }

  RowMatrix spec(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(bins));
  RealFft fft(n);
  for (std::size_t t = 0; t < frames; ++t) {
    const double* src = w.samples.data() + t * p.hop_size;
    double* dst = fft.input();
    for (std::size_t i = 0; i < n; ++i) dst[i] = src[i] * window[i];
    fft.Magnitudes(spec.row(static_cast<Eigen::Index>(t)).data());
  }

  MelSpectrogram mel;
  mel.params = p;
  mel.sample_rate = w.sample_rate;
  mel.frames = spec * MelFilterbank(p, w.sample_rate).transpose();
  return mel;
}

Contour FrameEnergy(const MelSpectrogram& m) {
  Contour c;
  c.frame_hop = m.params.hop_size;
  c.values.resize(m.num_frames());
  for (Eigen::Index t = 0; t < m.frames.rows(); ++t) {
    const double norm = m.frames.row(t).norm();
    c.values[static_cast<std::size_t>(t)] = std::log(std::max(norm, 1e-5));
  }
  return c;
}

}  // namespace evc
