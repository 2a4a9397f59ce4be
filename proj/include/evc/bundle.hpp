#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evc/augment.hpp"
#include "evc/contour.hpp"
#include "evc/prosody.hpp"
#include "evc/signal_io.hpp"
#include "evc/units.hpp"

namespace evc {

inline constexpr int kBundleSchema = 1;

struct BundleMeta {
  int sample_rate = 16000;
  std::size_t hop = 256;
  std::string source;
  std::optional<std::uint64_t> seed;  // set once the bundle has been augmented
};

// Prosody of one utterance: raw and smoothed F0/energy with the VUV mask,
// optional unit durations, optional augmented contours.
struct ProsodyBundle {
  BundleMeta meta;
  Contour f0;
  Contour energy;
  VuvMask vuv;
  Contour f0_smooth;
  Contour energy_smooth;
  std::optional<DedupResult> durations;
  std::optional<Contour> durations_smooth;
  std::optional<Contour> f0_aug;
  std::optional<Contour> energy_aug;
  std::optional<AugmentDraw> augment;

  // Throws kSchema when lengths disagree or a DedupResult invariant fails.
  void Validate() const;
};

// Serialised with sorted keys and shortest round-trip numbers, so equal
// bundles always produce identical bytes.
std::string BundleToJson(const ProsodyBundle& b);
ProsodyBundle BundleFromJson(const std::string& text);
void SaveBundle(const ProsodyBundle& b, const std::string& path);
ProsodyBundle LoadBundle(const std::string& path);

struct ExtractParams {
  FrameParams frame;
  F0Params f0;
  SavgolParams smooth;
};

// load_wav -> mel -> energy, F0 + VUV, smoothing. Rejects sample rates other
// than 16 kHz. When `units` is given its run lengths become the durations.
ProsodyBundle ExtractBundle(const Waveform& w, const ExtractParams& p, const std::string& source,
                            const UnitSequence* units = nullptr);

// Recomputes the smoothed fields from the raw ones.
void SmoothBundle(ProsodyBundle& b, const SavgolParams& p);

// Fills f0_aug / energy_aug from the smoothed contours and records the seed
// and the draw.
void AugmentBundle(ProsodyBundle& b, const AugmentParams& p, std::uint64_t seed);

}  // namespace evc
