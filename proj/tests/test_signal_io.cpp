#include <gtest/gtest.h>

#include <cmath>

#include "evc/error.hpp"
#include "evc/random.hpp"
#include "evc/signal_io.hpp"
#include "test_util.hpp"

namespace evc {
namespace {

using testing::CodeOf;
using testing::Pcm16;
using testing::Sine;
using testing::TempDir;
using testing::WriteRawWav;

TEST(LoadWav, OneSecondOfZeros) {
  TempDir dir;
  WriteRawWav(dir / "z.wav", 1, 16, 1, 16000, Pcm16(std::vector<std::int16_t>(16000, 0)));
  const auto w = LoadWav(dir / "z.wav");
  EXPECT_EQ(w.sample_rate, 16000);
  ASSERT_EQ(w.samples.size(), 16000u);
  for (double x : w.samples) EXPECT_EQ(x, 0.0);
}

TEST(LoadWav, FullScaleSampleNormalisedBy32768) {
  TempDir dir;
  WriteRawWav(dir / "one.wav", 1, 16, 1, 16000, Pcm16({32767, -32768}));
  const auto w = LoadWav(dir / "one.wav");
  ASSERT_EQ(w.samples.size(), 2u);
  EXPECT_DOUBLE_EQ(w.samples[0], 32767.0 / 32768.0);
  EXPECT_NEAR(w.samples[0], 0.99997, 1e-5);
  EXPECT_DOUBLE_EQ(w.samples[1], -1.0);
}

TEST(LoadWav, RejectsStereo) {
  TempDir dir;
  WriteRawWav(dir / "st.wav", 2, 16, 1, 16000, Pcm16({1, 2, 3, 4}));
  EXPECT_EQ(CodeOf([&] { LoadWav(dir / "st.wav"); }), ErrorCode::kUnsupportedChannels);
}

TEST(LoadWav, RejectsOtherDepths) {
  TempDir dir;
  WriteRawWav(dir / "u8.wav", 1, 8, 1, 16000, {128, 129, 130});
  EXPECT_EQ(CodeOf([&] { LoadWav(dir / "u8.wav"); }), ErrorCode::kUnsupportedDepth);
  WriteRawWav(dir / "f32.wav", 1, 32, 3, 16000, std::vector<std::uint8_t>(8, 0));
  EXPECT_EQ(CodeOf([&] { LoadWav(dir / "f32.wav"); }), ErrorCode::kUnsupportedDepth);
}

TEST(LoadWav, MalformedAndMissing) {
  TempDir dir;
  {
    std::ofstream f(dir / "junk.wav", std::ios::binary);
    f << "definitely not a riff file";
  }
  EXPECT_EQ(CodeOf([&] { LoadWav(dir / "junk.wav"); }), ErrorCode::kFormat);
  EXPECT_EQ(CodeOf([&] { LoadWav(dir / "missing.wav"); }), ErrorCode::kIo);
}

// Streaming writers often leave a placeholder data size; read what is there.
TEST(LoadWav, DataChunkClampedToFileSize) {
  TempDir dir;
  WriteRawWav(dir / "t.wav", 1, 16, 1, 16000, Pcm16({16384, 2, 3, 4}));
  std::filesystem::resize_file(dir / "t.wav", 44 + 3);
  const auto w = LoadWav(dir / "t.wav");
  ASSERT_EQ(w.samples.size(), 1u);
  EXPECT_EQ(w.samples[0], 0.5);
}

TEST(SaveWav, RoundTripIsExactOnTheInt16Grid) {
  TempDir dir;
  Rng rng(3);
  Waveform w;
  for (int i = 0; i < 500; ++i) w.samples.push_back(static_cast<double>(rng.UniformInt(-32768, 32767)) / 32768.0);
  SaveWav(w, dir / "r.wav");
  const auto back = LoadWav(dir / "r.wav");
  EXPECT_EQ(back.samples, w.samples);
  EXPECT_EQ(back.sample_rate, 16000);
}

TEST(Framing, CountFormula) {
  EXPECT_EQ(NumFrames(4096, 1024, 256), 13u);
  EXPECT_EQ(NumFrames(1024, 1024, 256), 1u);
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const auto win = static_cast<std::size_t>(rng.UniformInt(1, 2048));
    const auto hop = static_cast<std::size_t>(rng.UniformInt(1, static_cast<std::int64_t>(win)));
    const auto len = win + static_cast<std::size_t>(rng.UniformInt(0, 20000));
    std::size_t frames = 0;
    for (std::size_t start = 0; start + win <= len; start += hop) ++frames;
    EXPECT_EQ(NumFrames(len, win, hop), frames) << len << " " << win << " " << hop;
  }
}

TEST(MelScale, KnownPoints) {
  EXPECT_DOUBLE_EQ(HzToMel(0.0), 0.0);
  EXPECT_NEAR(HzToMel(1000.0), 15.0, 1e-12);
  EXPECT_NEAR(HzToMel(440.0), 6.6, 1e-12);
  EXPECT_NEAR(HzToMel(6400.0), 42.0, 1e-12);
  for (double hz : {10.0, 250.0, 999.0, 1001.0, 4000.0, 8000.0}) EXPECT_NEAR(MelToHz(HzToMel(hz)), hz, 1e-9);
}

TEST(MelFilterbank, SlaneyAreaNormalisation) {
  const FrameParams p;
  const auto fb = MelFilterbank(p, 16000);
  ASSERT_EQ(fb.rows(), 80);
  ASSERT_EQ(fb.cols(), 513);
  const auto edges = MelBandEdges(p);
  ASSERT_EQ(edges.size(), 82u);
  for (Eigen::Index m = 0; m < fb.rows(); ++m) {
    // Peak height of a triangle with area one over its Hz support.
    const double peak = 2.0 / (edges[static_cast<std::size_t>(m) + 2] - edges[static_cast<std::size_t>(m)]);
    EXPECT_LE(fb.row(m).maxCoeff(), peak + 1e-12);
    EXPECT_GE(fb.row(m).minCoeff(), 0.0);
  }
}

TEST(MelSpectrogram, ZerosGiveZeroFrames) {
  Waveform w{std::vector<double>(4096, 0.0), 16000};
  const auto m = ComputeMelSpectrogram(w, FrameParams{});
  EXPECT_EQ(m.num_frames(), 13u);
  EXPECT_EQ(m.frames.cols(), 80);
  EXPECT_EQ(m.frames.cwiseAbs().maxCoeff(), 0.0);
}

TEST(MelSpectrogram, ExactlyOneWindow) {
  Waveform w{Sine(300.0, 1024.0 / 16000.0), 16000};
  EXPECT_EQ(ComputeMelSpectrogram(w, FrameParams{}).num_frames(), 1u);
}

TEST(MelSpectrogram, TooShort) {
  Waveform w{std::vector<double>(1023, 0.1), 16000};
  EXPECT_EQ(CodeOf([&] { ComputeMelSpectrogram(w, FrameParams{}); }), ErrorCode::kTooShort);
}

TEST(MelSpectrogram, BadParams) {
  Waveform w{std::vector<double>(4096, 0.0), 16000};
  FrameParams p;
  p.fmax = 9000.0;
  EXPECT_EQ(CodeOf([&] { ComputeMelSpectrogram(w, p); }), ErrorCode::kInvalidArgument);
  p = FrameParams{};
  p.hop_size = 2048;
  EXPECT_EQ(CodeOf([&] { ComputeMelSpectrogram(w, p); }), ErrorCode::kInvalidArgument);
  p = FrameParams{};
  w.samples[7] = std::nan("");
  EXPECT_EQ(CodeOf([&] { ComputeMelSpectrogram(w, p); }), ErrorCode::kInvalidArgument);
}

// Centre frequencies recomputed here from the Slaney formula rather than
// taken from the library.
TEST(MelSpectrogram, Tone440PeaksAtNearestCentre) {
  auto mel = [](double hz) { return hz < 1000.0 ? hz * 3.0 / 200.0 : 15.0 + std::log(hz / 1000.0) * 27.0 / std::log(6.4); };
  auto hz = [](double m) { return m < 15.0 ? m * 200.0 / 3.0 : 1000.0 * std::exp((m - 15.0) * std::log(6.4) / 27.0); };
  const double top = mel(8000.0);
  int best = -1;
  double best_gap = 1e300;
  for (int m = 0; m < 80; ++m) {
    const double centre = hz(top * (m + 1) / 81.0);
    if (std::abs(centre - 440.0) < best_gap) {
      best_gap = std::abs(centre - 440.0);
      best = m;
    }
  }
  ASSERT_EQ(best, 11);

  Waveform w{Sine(440.0, 1.0, 1.0), 16000};
  const auto m = ComputeMelSpectrogram(w, FrameParams{});
  for (Eigen::Index t = 0; t < m.frames.rows(); ++t) {
    Eigen::Index arg;
    m.frames.row(t).maxCoeff(&arg);
    EXPECT_EQ(arg, best) << "frame " << t;
  }
}

TEST(MelSpectrogram, NonNegativeAndHomogeneous) {
  Rng rng(5);
  Waveform w;
  for (int i = 0; i < 6000; ++i) w.samples.push_back(0.3 * rng.Gaussian());
  const auto m = ComputeMelSpectrogram(w, FrameParams{});
  EXPECT_GE(m.frames.minCoeff(), 0.0);
  Waveform scaled = w;
  for (auto& x : scaled.samples) x *= 2.5;
  const auto m2 = ComputeMelSpectrogram(scaled, FrameParams{});
  EXPECT_LE((m2.frames - 2.5 * m.frames).cwiseAbs().maxCoeff(), 1e-9 * m2.frames.maxCoeff());
}

TEST(FrameEnergy, FloorUnitAndDirectFormula) {
  MelSpectrogram m;
  m.params = FrameParams{};
  m.frames = RowMatrix::Zero(3, 80);
  m.frames(1, 4) = 1.0;
  Rng rng(9);
  double sq = 0.0;
  for (Eigen::Index j = 0; j < 80; ++j) {
    m.frames(2, j) = rng.Uniform01();
    sq += m.frames(2, j) * m.frames(2, j);
  }
  const auto e = FrameEnergy(m);
  ASSERT_EQ(e.size(), 3u);
  EXPECT_DOUBLE_EQ(e.values[0], std::log(1e-5));
  EXPECT_DOUBLE_EQ(e.values[1], 0.0);
  EXPECT_NEAR(e.values[2], 0.5 * std::log(sq), 1e-12);
}

TEST(FrameEnergy, MonotoneInScale) {
  Rng rng(13);
  MelSpectrogram m;
  m.frames = RowMatrix(1, 80);
  for (Eigen::Index j = 0; j < 80; ++j) m.frames(0, j) = 1e-4 * rng.Uniform01();
  double prev = FrameEnergy(m).values[0];
  for (double k : {1.5, 2.0, 10.0, 1000.0}) {
    MelSpectrogram s = m;
    s.frames *= k;
    const double e = FrameEnergy(s).values[0];
    EXPECT_GE(e, prev);
    prev = e;
  }
}

}  // namespace
}  // namespace evc
