#include "evc/bundle.hpp"

#include "evc/error.hpp"
#include "io_util.hpp"
#include "json.hpp"

namespace evc {

using nlohmann::json;

void ProsodyBundle::Validate() const {
  const std::size_t n = f0.size();
  Require(energy.size() == n && vuv.size() == n, ErrorCode::kSchema,
          "bundle: f0, energy and vuv lengths differ (" + std::to_string(n) + ", " +
              std::to_string(energy.size()) + ", " + std::to_string(vuv.size()) + ")");
  Require(f0_smooth.size() == n && energy_smooth.size() == n, ErrorCode::kSchema,
          "bundle: smoothed contours differ in length from the raw ones");
  for (std::size_t t = 0; t < n; ++t) {
    Require(vuv.flags[t] <= 1, ErrorCode::kSchema, "bundle: vuv entries must be 0 or 1");
    Require(vuv.flags[t] == 1 || f0.values[t] == 0.0, ErrorCode::kSchema,
            "bundle: unvoiced frame " + std::to_string(t) + " has non-zero f0");
  }
  if (durations) {
    Require(durations->units.size() == durations->counts.size(), ErrorCode::kSchema,
            "bundle: duration units and counts differ in length");
    for (std::size_t i = 0; i < durations->size(); ++i) {
      Require(durations->counts[i] >= 1, ErrorCode::kSchema, "bundle: duration counts must be >= 1");
      Require(i == 0 || durations->units[i] != durations->units[i - 1], ErrorCode::kSchema,
              "bundle: adjacent duration units must differ");
    }
    Require(!durations_smooth || durations_smooth->size() == durations->size(), ErrorCode::kSchema,
            "bundle: durations_smooth length differs from durations");
  } else {
    Require(!durations_smooth, ErrorCode::kSchema, "bundle: durations_smooth without durations");
  }
  Require(f0_aug.has_value() == energy_aug.has_value(), ErrorCode::kSchema,
          "bundle: f0_aug and energy_aug must be present together");
  if (f0_aug) {
    Require(f0_aug->size() == n && energy_aug->size() == n, ErrorCode::kSchema,
            "bundle: augmented contours differ in length from the raw ones");
  }
}

namespace {

json ValuesToJson(const std::vector<double>& v) { return json(v); }

std::vector<double> ValuesFromJson(const json& j, const char* key) {
  const auto& a = j.at(key);
  if (!a.is_array()) Fail(ErrorCode::kSchema, std::string("bundle: `") + key + "` must be an array");
  std::vector<double> out;
  out.reserve(a.size());
  for (const auto& x : a) {
    if (!x.is_number()) Fail(ErrorCode::kSchema, std::string("bundle: `") + key + "` has a non-number");
    out.push_back(x.get<double>());
  }
  return out;
}

Contour ContourFromJson(const json& j, const char* key, std::size_t hop) {
  return {ValuesFromJson(j, key), hop};
}

}  // namespace

std::string BundleToJson(const ProsodyBundle& b) {
  b.Validate();
  json meta = {{"sample_rate", b.meta.sample_rate}, {"hop", b.meta.hop}, {"source", b.meta.source}};
  if (b.meta.seed) meta["seed"] = *b.meta.seed;
  std::vector<int> vuv(b.vuv.flags.begin(), b.vuv.flags.end());
  json j = {
      {"schema", kBundleSchema},
      {"meta", std::move(meta)},
      {"f0", ValuesToJson(b.f0.values)},
      {"energy", ValuesToJson(b.energy.values)},
      {"vuv", vuv},
      {"f0_smooth", ValuesToJson(b.f0_smooth.values)},
      {"energy_smooth", ValuesToJson(b.energy_smooth.values)},
  };
  if (b.durations) j["durations"] = {{"units", b.durations->units}, {"counts", b.durations->counts}};
  if (b.durations_smooth) j["durations_smooth"] = ValuesToJson(b.durations_smooth->values);
  if (b.f0_aug) {
    j["f0_aug"] = ValuesToJson(b.f0_aug->values);
    j["energy_aug"] = ValuesToJson(b.energy_aug->values);
  }
  if (b.augment) {
    const auto& d = *b.augment;
    json aug = {{"op", AugmentOpName(d.op)}};
    if (d.op == AugmentOp::kShift) {
      aug["shift"] = d.shift;
    } else {
      aug["boundaries"] = d.boundaries;
      aug["scales"] = d.scales;
    }
    j["augment"] = std::move(aug);
  }
  return j.dump() + "\n";
}

ProsodyBundle BundleFromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kSchema, std::string("bundle is not valid JSON: ") + e.what());
  }
  try {
    Require(j.is_object(), ErrorCode::kSchema, "bundle must be a JSON object");
    Require(j.contains("schema") && j.at("schema").is_number_integer() && j.at("schema").get<int>() == kBundleSchema,
            ErrorCode::kSchema, "bundle: unsupported or missing schema version");
    ProsodyBundle b;
    const auto& meta = j.at("meta");
    b.meta.sample_rate = meta.at("sample_rate").get<int>();
    b.meta.hop = meta.at("hop").get<std::size_t>();
    b.meta.source = meta.at("source").get<std::string>();
    if (meta.contains("seed")) b.meta.seed = meta.at("seed").get<std::uint64_t>();
    const std::size_t hop = b.meta.hop;

    b.f0 = ContourFromJson(j, "f0", hop);
    b.energy = ContourFromJson(j, "energy", hop);
    for (const auto& f : j.at("vuv")) {
      const int v = f.get<int>();
      Require(v == 0 || v == 1, ErrorCode::kSchema, "bundle: vuv entries must be 0 or 1");
      b.vuv.flags.push_back(static_cast<std::uint8_t>(v));
    }
    b.f0_smooth = ContourFromJson(j, "f0_smooth", hop);
    b.energy_smooth = ContourFromJson(j, "energy_smooth", hop);
    if (j.contains("durations")) {
      DedupResult d;
      d.units = j.at("durations").at("units").get<UnitSequence>();
      d.counts = j.at("durations").at("counts").get<std::vector<std::int32_t>>();
      b.durations = std::move(d);
    }
    if (j.contains("durations_smooth")) b.durations_smooth = ContourFromJson(j, "durations_smooth", hop);
    if (j.contains("f0_aug")) b.f0_aug = ContourFromJson(j, "f0_aug", hop);
    if (j.contains("energy_aug")) b.energy_aug = ContourFromJson(j, "energy_aug", hop);
    if (j.contains("augment")) {
      const auto& a = j.at("augment");
      AugmentDraw d;
      const auto op = a.at("op").get<std::string>();
      if (op == "shift") {
        d.op = AugmentOp::kShift;
        d.shift = a.at("shift").get<int>();
      } else if (op == "warp") {
        d.op = AugmentOp::kWarp;
        d.boundaries = a.at("boundaries").get<std::vector<std::size_t>>();
        d.scales = a.at("scales").get<std::vector<double>>();
      } else {
        Fail(ErrorCode::kSchema, "bundle: unknown augment op `" + op + "`");
      }
      b.augment = std::move(d);
    }
    b.Validate();
    return b;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kSchema, std::string("bundle: ") + e.what());
  }
}

void SaveBundle(const ProsodyBundle& b, const std::string& path) {
  WriteTextFile(path, BundleToJson(b));
}

ProsodyBundle LoadBundle(const std::string& path) {
  return BundleFromJson(ReadTextFile(path));
}

void SmoothBundle(ProsodyBundle& b, const SavgolParams& p) {
  b.f0_smooth = SavgolSmoothF0(b.f0, b.vuv, p);
  b.energy_smooth = SavgolSmooth(b.energy, p);
  if (b.durations) {
    Contour counts;
    counts.frame_hop = b.meta.hop;
    counts.values.assign(b.durations->counts.begin(), b.durations->counts.end());
    b.durations_smooth = SavgolSmooth(counts, p);
  } else {
    b.durations_smooth.reset();
  }
}

ProsodyBundle ExtractBundle(const Waveform& w, const ExtractParams& p, const std::string& source,
                            const UnitSequence* units) {
  Require(w.sample_rate == 16000, ErrorCode::kFormat,
          "expected a 16 kHz waveform, got " + std::to_string(w.sample_rate) + " Hz");
  ProsodyBundle b;
  b.meta.sample_rate = w.sample_rate;
  b.meta.hop = p.frame.hop_size;
  b.meta.source = source;

  const auto mel = ComputeMelSpectrogram(w, p.frame);
  b.energy = FrameEnergy(mel);

  F0Params f0p = p.f0;
  f0p.frame_length = p.frame.window_size;
  f0p.hop_size = p.frame.hop_size;
  auto track = EstimateF0(w, f0p);
  Require(track.f0.size() == b.energy.size(), ErrorCode::kInternal,
          "F0 and energy frame counts disagree");
  b.f0 = std::move(track.f0);
  b.vuv = std::move(track.vuv);
  b.f0.frame_hop = b.meta.hop;
  b.energy.frame_hop = b.meta.hop;

  if (units) b.durations = Dedup(*units);
  SmoothBundle(b, p.smooth);
  return b;
}

void AugmentBundle(ProsodyBundle& b, const AugmentParams& p, std::uint64_t seed) {
  Rng rng(seed);
  auto r = ProAug(b.f0_smooth, b.energy_smooth, p, rng);
  b.f0_aug = std::move(r.f0);
  b.energy_aug = std::move(r.energy);
  b.augment = std::move(r.draw);
  b.meta.seed = seed;
}

}  // namespace evc
