#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "evc/contour.hpp"

namespace evc {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Mono audio. Samples are nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;
};

struct FrameParams {
  std::size_t window_size = 1024;
  std::size_t hop_size = 256;
  std::size_t n_mels = 80;
  double fmin = 0.0;
  double fmax = 8000.0;

  // Throws kInvalidArgument unless 0 < hop <= window, n_mels >= 1 and
  // 0 <= fmin < fmax <= sample_rate / 2.
  void Validate(int sample_rate) const;
};

// T x n_mels amplitude mel spectrogram.
struct MelSpectrogram {
  RowMatrix frames;
  FrameParams params;
  int sample_rate = 16000;

  std::size_t num_frames() const { return static_cast<std::size_t>(frames.rows()); }
};

// Number of frames produced by no-padding framing; 0 when the signal is
// shorter than one window.
std::size_t NumFrames(std::size_t num_samples, std::size_t window_size, std::size_t hop_size);

// Reads a 16-bit PCM mono RIFF/WAVE file. Samples are divided by 32768.
Waveform LoadWav(const std::string& path);

// Writes a 16-bit PCM mono file; values are clamped to the int16 range after
// scaling by 32768.
void SaveWav(const Waveform& w, const std::string& path);

// Slaney-style mel scale (linear below 1 kHz, logarithmic above).
double HzToMel(double hz);
double MelToHz(double mel);

// n_mels + 2 band edge frequencies in Hz, evenly spaced on the mel scale
// over [fmin, fmax]. Filter m has its peak at edges[m + 1].
std::vector<double> MelBandEdges(const FrameParams& p);

// n_mels x (window_size / 2 + 1) triangular filterbank with Slaney area
// normalisation (each filter scaled by 2 / bandwidth).
RowMatrix MelFilterbank(const FrameParams& p, int sample_rate);

// Periodic Hann window, magnitude STFT with no centering or padding, then
// projection through MelFilterbank.
MelSpectrogram ComputeMelSpectrogram(const Waveform& w, const FrameParams& p);

// Per frame: ln(max(||m_t||_2, 1e-5)).
Contour FrameEnergy(const MelSpectrogram& m);

}  // namespace evc
