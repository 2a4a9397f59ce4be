#include "evc/evc.h"

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <map>
#include <new>
#include <string>

#include "evc/bundle.hpp"
#include "evc/error.hpp"
#include "evc/metrics.hpp"
#include "evc/nn.hpp"
#include "evc/selfcheck.hpp"
#include "io_util.hpp"
#include "json.hpp"

struct evc_seq {
  std::vector<double> v;
};
struct evc_waveform {
  evc::Waveform w;
};
struct evc_bundle {
  evc::ProsodyBundle b;
};
struct evc_matrix {
  evc::FeatureMatrix m;
};
struct evc_codebook {
  evc::Codebook cb;
};
struct evc_units {
  evc::UnitSequence u;
};
struct evc_dedup_result {
  evc::DedupResult d;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
evc_status Guard(F&& f) {
  try {
    f();
    return EVC_OK;
  } catch (const evc::Error& e) {
    g_last_error = e.what();
    return static_cast<evc_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return EVC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return EVC_ERR_INTERNAL;
  }
}

void NotNull(const void* p, const char* what) {
  if (p == nullptr) evc::Fail(evc::ErrorCode::kInvalidArgument, std::string(what) + " must not be NULL");
}

char* DupString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

evc_seq* NewSeq(std::vector<double> v) { return new evc_seq{std::move(v)}; }

evc::FrameParams ToFrame(const evc_frame_params* p) {
  evc::FrameParams f;
  if (p) {
    f.window_size = p->window_size;
    f.hop_size = p->hop_size;
    f.n_mels = p->n_mels;
    f.fmin = p->fmin;
    f.fmax = p->fmax;
  }
  return f;
}

evc::F0Params ToF0(const evc_f0_params* p, const evc::FrameParams& frame) {
  evc::F0Params f;
  if (p) {
    f.f0_min = p->f0_min;
    f.f0_max = p->f0_max;
    f.periodicity_threshold = p->periodicity_threshold;
  }
  f.frame_length = frame.window_size;
  f.hop_size = frame.hop_size;
  return f;
}

evc::SavgolParams ToSmooth(const evc_smooth_params* p) {
  evc::SavgolParams s;
  if (p) {
    s.window = p->window;
    s.order = p->order;
  }
  return s;
}

evc::AugmentParams ToAugment(const evc_augment_params* p) {
  evc::AugmentParams a;
  if (p) {
    a.max_shift = p->max_shift;
    a.min_segments = p->min_segments;
    a.max_segments = p->max_segments;
    a.min_scale = p->min_scale;
    a.max_scale = p->max_scale;
  }
  return a;
}

evc::VuvMask ToVuv(std::span<const double> v) {
  evc::VuvMask m;
  for (double x : v) {
    if (x != 0.0 && x != 1.0) evc::Fail(evc::ErrorCode::kInvalidArgument, "VUV flags must be 0 or 1");
    m.flags.push_back(x == 1.0 ? 1 : 0);
  }
  return m;
}

evc::nn::Mat MapMat(const double* p, std::size_t r, std::size_t c) {
  if (r * c > 0) NotNull(p, "matrix");
  return evc::nn::Mat(Eigen::Map<const evc::nn::Mat>(p, static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
}

void CopyOut(const evc::nn::Mat& m, double* out) {
  if (out) std::memcpy(out, m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
}

std::span<const double> Span(const double* p, std::size_t n) {
  if (n > 0) NotNull(p, "array");
  return {p, n};
}

nlohmann::ordered_json ReportJson(const evc_metric_report& r) {
  nlohmann::ordered_json j;
  auto put = [&](const char* key, int has, double v) {
    j[key] = has ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
  };
  put("wer", r.has_wer, r.wer);
  put("cer", r.has_cer, r.cer);
  put("eecs", r.has_eecs, r.eecs);
  put("f0_pcc", r.has_f0_pcc, r.f0_pcc);
  put("e_pcc", r.has_e_pcc, r.e_pcc);
  return j;
}

evc::MetricReport FromC(const evc_metric_report& r) {
  evc::MetricReport m;
  if (r.has_wer) m.wer = r.wer;
  if (r.has_cer) m.cer = r.cer;
  if (r.has_eecs) m.eecs = r.eecs;
  if (r.has_f0_pcc) m.f0_pcc = r.f0_pcc;
  if (r.has_e_pcc) m.e_pcc = r.e_pcc;
  return m;
}

}  // namespace

extern "C" {

const char* evc_version(void) { return "0.1.0"; }

const char* evc_status_name(evc_status status) {
  switch (status) {
    case EVC_OK: return "ok";
    case EVC_ERR_INVALID_ARGUMENT: return "invalid argument";
    case EVC_ERR_IO: return "i/o error";
    case EVC_ERR_FORMAT: return "format error";
    case EVC_ERR_UNSUPPORTED_CHANNELS: return "unsupported channel count";
    case EVC_ERR_UNSUPPORTED_DEPTH: return "unsupported sample format";
    case EVC_ERR_TOO_SHORT: return "signal too short";
    case EVC_ERR_INSUFFICIENT_DATA: return "insufficient data";
    case EVC_ERR_DEGENERATE: return "degenerate input";
    case EVC_ERR_UNDEFINED: return "undefined result";
    case EVC_ERR_LOOKUP: return "lookup error";
    case EVC_ERR_SCHEMA: return "schema error";
    case EVC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* evc_last_error(void) { return g_last_error.c_str(); }

void evc_string_free(char* s) { std::free(s); }

// ---------------------------------------------------------------- sequences

evc_status evc_seq_create(const double* values, size_t n, evc_seq** out) {
  return Guard([&] {
    NotNull(out, "out");
    auto s = Span(values, n);
    *out = NewSeq({s.begin(), s.end()});
  });
}

size_t evc_seq_size(const evc_seq* s) { return s ? s->v.size() : 0; }
const double* evc_seq_data(const evc_seq* s) { return s ? s->v.data() : nullptr; }
void evc_seq_free(evc_seq* s) { delete s; }

evc_status evc_seq_read_text(const char* path, evc_seq** out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    const std::string text = evc::ReadTextFile(path);
    std::vector<double> v;
    std::size_t i = 0;
    while (i < text.size()) {
      const auto end = text.find_first_of(" \t\r\n,", i);
      const auto tok = text.substr(i, end == std::string::npos ? std::string::npos : end - i);
      if (!tok.empty()) {
        double x = 0.0;
        if (!evc::ParseDouble(tok, x)) evc::Fail(evc::ErrorCode::kFormat, std::string(path) + ": bad number `" + tok + "`");
        v.push_back(x);
      }
      if (end == std::string::npos) break;
      i = end + 1;
    }
    *out = NewSeq(std::move(v));
  });
}

evc_status evc_seq_write_csv(const evc_seq* s, const char* path) {
  return Guard([&] {
    NotNull(s, "seq");
    NotNull(path, "path");
    std::string text = "frame,value\n";
    char buf[64];
    for (std::size_t i = 0; i < s->v.size(); ++i) {
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, s->v[i]);
      text += std::to_string(i) + "," + std::string(buf, p) + "\n";
    }
    evc::WriteTextFile(path, text);
  });
}

// ----------------------------------------------------------------- waveform

evc_status evc_waveform_load(const char* path, evc_waveform** out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    *out = new evc_waveform{evc::LoadWav(path)};
  });
}

evc_status evc_waveform_create(const double* samples, size_t n, int sample_rate, evc_waveform** out) {
  return Guard([&] {
    NotNull(out, "out");
    evc::Require(sample_rate > 0, evc::ErrorCode::kInvalidArgument, "sample rate must be positive");
    auto s = Span(samples, n);
    *out = new evc_waveform{evc::Waveform{{s.begin(), s.end()}, sample_rate}};
  });
}

evc_status evc_waveform_save(const evc_waveform* w, const char* path) {
  return Guard([&] {
    NotNull(w, "waveform");
    NotNull(path, "path");
    evc::SaveWav(w->w, path);
  });
}

size_t evc_waveform_length(const evc_waveform* w) { return w ? w->w.samples.size() : 0; }
int evc_waveform_sample_rate(const evc_waveform* w) { return w ? w->w.sample_rate : 0; }
const double* evc_waveform_samples(const evc_waveform* w) { return w ? w->w.samples.data() : nullptr; }
void evc_waveform_free(evc_waveform* w) { delete w; }

// --------------------------------------------------------------- parameters

void evc_frame_params_default(evc_frame_params* p) {
  if (!p) return;
  const evc::FrameParams f;
  *p = {f.window_size, f.hop_size, f.n_mels, f.fmin, f.fmax};
}

void evc_f0_params_default(evc_f0_params* p) {
  if (!p) return;
  const evc::F0Params f;
  *p = {f.f0_min, f.f0_max, f.periodicity_threshold};
}

void evc_smooth_params_default(evc_smooth_params* p) {
  if (!p) return;
  const evc::SavgolParams s;
  *p = {s.window, s.order};
}

void evc_augment_params_default(evc_augment_params* p) {
  if (!p) return;
  const evc::AugmentParams a;
  *p = {a.max_shift, a.min_segments, a.max_segments, a.min_scale, a.max_scale};
}

// -------------------------------------------------------- signal and prosody

evc_status evc_mel_spectrogram(const evc_waveform* w, const evc_frame_params* p, evc_seq** mel,
                               size_t* frames) {
  return Guard([&] {
    NotNull(w, "waveform");
    NotNull(mel, "mel");
    const auto m = evc::ComputeMelSpectrogram(w->w, ToFrame(p));
    *mel = NewSeq({m.frames.data(), m.frames.data() + m.frames.size()});
    if (frames) *frames = static_cast<size_t>(m.frames.rows());
  });
}

evc_status evc_frame_energy(const evc_waveform* w, const evc_frame_params* p, evc_seq** energy) {
  return Guard([&] {
    NotNull(w, "waveform");
    NotNull(energy, "energy");
    *energy = NewSeq(evc::FrameEnergy(evc::ComputeMelSpectrogram(w->w, ToFrame(p))).values);
  });
}

evc_status evc_estimate_f0(const evc_waveform* w, const evc_frame_params* frame, const evc_f0_params* p,
                           evc_seq** f0, evc_seq** vuv) {
  return Guard([&] {
    NotNull(w, "waveform");
    NotNull(f0, "f0");
    auto track = evc::EstimateF0(w->w, ToF0(p, ToFrame(frame)));
    if (vuv) *vuv = NewSeq({track.vuv.flags.begin(), track.vuv.flags.end()});
    *f0 = NewSeq(std::move(track.f0.values));
  });
}

evc_status evc_savgol(const evc_seq* values, const evc_smooth_params* p, evc_seq** out) {
  return Guard([&] {
    NotNull(values, "values");
    NotNull(out, "out");
    *out = NewSeq(evc::SavgolSmooth(std::span<const double>(values->v), ToSmooth(p)));
  });
}

evc_status evc_savgol_f0(const evc_seq* f0, const evc_seq* vuv, const evc_smooth_params* p, evc_seq** out) {
  return Guard([&] {
    NotNull(f0, "f0");
    NotNull(vuv, "vuv");
    NotNull(out, "out");
    *out = NewSeq(evc::SavgolSmoothF0(evc::Contour{f0->v}, ToVuv(vuv->v), ToSmooth(p)).values);
  });
}

// --------------------------------------------------------------- augmenting

evc_status evc_random_shift(const evc_seq* values, int shift, evc_seq** out) {
  return Guard([&] {
    NotNull(values, "values");
    NotNull(out, "out");
    *out = NewSeq(evc::RandomShift(values->v, shift));
  });
}

evc_status evc_time_warp(const evc_seq* values, const size_t* boundaries, size_t n_boundaries,
                         const double* scales, size_t n_scales, evc_seq** out) {
  return Guard([&] {
    NotNull(values, "values");
    NotNull(out, "out");
    if (n_boundaries > 0) NotNull(boundaries, "boundaries");
    std::vector<std::size_t> b(boundaries, boundaries + n_boundaries);
    *out = NewSeq(evc::PiecewiseTimeWarp(values->v, b, Span(scales, n_scales)));
  });
}

evc_status evc_pro_aug(const evc_seq* f0, const evc_seq* energy, const evc_augment_params* p, uint64_t seed,
                       evc_seq** f0_out, evc_seq** energy_out, int* op_out) {
  return Guard([&] {
    NotNull(f0, "f0");
    NotNull(energy, "energy");
    NotNull(f0_out, "f0_out");
    NotNull(energy_out, "energy_out");
    evc::Rng rng(seed);
    auto r = evc::ProAug(evc::Contour{f0->v}, evc::Contour{energy->v}, ToAugment(p), rng);
    *f0_out = NewSeq(std::move(r.f0.values));
    *energy_out = NewSeq(std::move(r.energy.values));
    if (op_out) *op_out = r.draw.op == evc::AugmentOp::kShift ? 0 : 1;
  });
}

// ------------------------------------------------------------------ bundles

evc_status evc_bundle_read(const char* path, evc_bundle** out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    *out = new evc_bundle{evc::LoadBundle(path)};
  });
}

evc_status evc_bundle_write(const evc_bundle* b, const char* path) {
  return Guard([&] {
    NotNull(b, "bundle");
    NotNull(path, "path");
    evc::SaveBundle(b->b, path);
  });
}

evc_status evc_bundle_to_json(const evc_bundle* b, char** out) {
  return Guard([&] {
    NotNull(b, "bundle");
    NotNull(out, "out");
    *out = DupString(evc::BundleToJson(b->b));
  });
}

void evc_bundle_free(evc_bundle* b) { delete b; }

evc_status evc_bundle_get(const evc_bundle* b, const char* field, evc_seq** out) {
  return Guard([&] {
    NotNull(b, "bundle");
    NotNull(field, "field");
    NotNull(out, "out");
    const auto& x = b->b;
    const std::string f = field;
    auto absent = [&] { evc::Fail(evc::ErrorCode::kLookup, "bundle has no `" + f + "` field"); };
    std::vector<double> v;
    if (f == "f0") {
      v = x.f0.values;
    } else if (f == "energy") {
      v = x.energy.values;
    } else if (f == "vuv") {
      v.assign(x.vuv.flags.begin(), x.vuv.flags.end());
    } else if (f == "f0_smooth") {
      v = x.f0_smooth.values;
    } else if (f == "energy_smooth") {
      v = x.energy_smooth.values;
    } else if (f == "f0_aug") {
      if (!x.f0_aug) absent();
      v = x.f0_aug->values;
    } else if (f == "energy_aug") {
      if (!x.energy_aug) absent();
      v = x.energy_aug->values;
    } else if (f == "durations_smooth") {
      if (!x.durations_smooth) absent();
      v = x.durations_smooth->values;
    } else if (f == "duration_units") {
      if (!x.durations) absent();
      v.assign(x.durations->units.begin(), x.durations->units.end());
    } else if (f == "duration_counts") {
      if (!x.durations) absent();
      v.assign(x.durations->counts.begin(), x.durations->counts.end());
    } else {
      absent();
    }
    *out = NewSeq(std::move(v));
  });
}

int evc_bundle_has_seed(const evc_bundle* b) { return b && b->b.meta.seed ? 1 : 0; }
uint64_t evc_bundle_seed(const evc_bundle* b) { return b && b->b.meta.seed ? *b->b.meta.seed : 0; }

evc_status evc_extract(const char* wav_path, const evc_frame_params* frame, const evc_f0_params* f0,
                       const evc_smooth_params* smooth, const char* units_path, evc_bundle** out) {
  return Guard([&] {
    NotNull(wav_path, "wav_path");
    NotNull(out, "out");
    evc::ExtractParams p;
    p.frame = ToFrame(frame);
    p.f0 = ToF0(f0, p.frame);
    p.smooth = ToSmooth(smooth);
    const auto w = evc::LoadWav(wav_path);
    std::optional<evc::UnitSequence> units;
    if (units_path) units = evc::LoadUnits(units_path);
    std::string source = wav_path;
    if (const auto slash = source.find_last_of('/'); slash != std::string::npos) source = source.substr(slash + 1);
    *out = new evc_bundle{evc::ExtractBundle(w, p, source, units ? &*units : nullptr)};
  });
}

evc_status evc_bundle_smooth(evc_bundle* b, const evc_smooth_params* p) {
  return Guard([&] {
    NotNull(b, "bundle");
    auto copy = b->b;
    evc::SmoothBundle(copy, ToSmooth(p));
    b->b = std::move(copy);
  });
}

evc_status evc_bundle_augment(evc_bundle* b, const evc_augment_params* p, uint64_t seed) {
  return Guard([&] {
    NotNull(b, "bundle");
    auto copy = b->b;
    evc::AugmentBundle(copy, ToAugment(p), seed);
    b->b = std::move(copy);
  });
}

// -------------------------------------------------------------------- units

evc_status evc_features_load(const char* path, evc_matrix** out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    *out = new evc_matrix{evc::LoadFeatures(path)};
  });
}

evc_status evc_matrix_create(const double* row_major, size_t rows, size_t cols, evc_matrix** out) {
  return Guard([&] {
    NotNull(out, "out");
    *out = new evc_matrix{MapMat(row_major, rows, cols)};
  });
}

size_t evc_matrix_rows(const evc_matrix* m) { return m ? static_cast<size_t>(m->m.rows()) : 0; }
size_t evc_matrix_cols(const evc_matrix* m) { return m ? static_cast<size_t>(m->m.cols()) : 0; }
const double* evc_matrix_data(const evc_matrix* m) { return m ? m->m.data() : nullptr; }
void evc_matrix_free(evc_matrix* m) { delete m; }

evc_status evc_kmeans_fit(const evc_matrix* features, size_t k, uint64_t seed, size_t max_iters, size_t jobs,
                          evc_codebook** out, evc_seq** inertia) {
  return Guard([&] {
    NotNull(features, "features");
    NotNull(out, "out");
    evc::KMeansOptions o;
    o.k = k;
    o.seed = seed;
    o.max_iters = max_iters;
    o.jobs = jobs;
    auto r = evc::KMeansFit(features->m, o);
    if (inertia) *inertia = NewSeq(std::move(r.inertia_history));
    *out = new evc_codebook{std::move(r.codebook)};
  });
}

evc_status evc_codebook_read(const char* path, evc_codebook** out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    *out = new evc_codebook{evc::LoadCodebook(path)};
  });
}

evc_status evc_codebook_write(const evc_codebook* cb, const char* path) {
  return Guard([&] {
    NotNull(cb, "codebook");
    NotNull(path, "path");
    evc::SaveCodebook(cb->cb, path);
  });
}

size_t evc_codebook_k(const evc_codebook* cb) { return cb ? cb->cb.k() : 0; }
size_t evc_codebook_dim(const evc_codebook* cb) { return cb ? cb->cb.dim() : 0; }
void evc_codebook_free(evc_codebook* cb) { delete cb; }

evc_status evc_kmeans_assign(const evc_matrix* features, const evc_codebook* cb, evc_units** out) {
  return Guard([&] {
    NotNull(features, "features");
    NotNull(cb, "codebook");
    NotNull(out, "out");
    *out = new evc_units{evc::KMeansAssign(features->m, cb->cb)};
  });
}

evc_status evc_units_create(const int32_t* units, size_t n, evc_units** out) {
  return Guard([&] {
    NotNull(out, "out");
    if (n > 0) NotNull(units, "units");
    *out = new evc_units{evc::UnitSequence(units, units + n)};
  });
}

evc_status evc_units_read(const char* path, evc_units** out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    *out = new evc_units{evc::LoadUnits(path)};
  });
}

evc_status evc_units_write(const evc_units* u, const char* path) {
  return Guard([&] {
    NotNull(u, "units");
    NotNull(path, "path");
    evc::SaveUnits(u->u, path);
  });
}

size_t evc_units_size(const evc_units* u) { return u ? u->u.size() : 0; }
const int32_t* evc_units_data(const evc_units* u) { return u ? u->u.data() : nullptr; }
void evc_units_free(evc_units* u) { delete u; }

evc_status evc_dedup(const evc_units* u, evc_dedup_result** out) {
  return Guard([&] {
    NotNull(u, "units");
    NotNull(out, "out");
    *out = new evc_dedup_result{evc::Dedup(u->u)};
  });
}

evc_status evc_expand(const evc_dedup_result* d, evc_units** out) {
  return Guard([&] {
    NotNull(d, "dedup");
    NotNull(out, "out");
    *out = new evc_units{evc::Expand(d->d)};
  });
}

evc_status evc_dedup_read(const char* path, evc_dedup_result** out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    *out = new evc_dedup_result{evc::LoadDedup(path)};
  });
}

evc_status evc_dedup_write(const evc_dedup_result* d, const char* path) {
  return Guard([&] {
    NotNull(d, "dedup");
    NotNull(path, "path");
    evc::SaveDedup(d->d, path);
  });
}

size_t evc_dedup_size(const evc_dedup_result* d) { return d ? d->d.size() : 0; }
const int32_t* evc_dedup_units(const evc_dedup_result* d) { return d ? d->d.units.data() : nullptr; }
const int32_t* evc_dedup_counts(const evc_dedup_result* d) { return d ? d->d.counts.data() : nullptr; }
void evc_dedup_free(evc_dedup_result* d) { delete d; }

// ---------------------------------------------------------- neural numerics

evc_status evc_cross_attention(const double* q_in, size_t tq, const double* kv_in, size_t tk, size_t d,
                               const double* wq, const double* wk, const double* wv, const double* wo,
                               double* out, double* weights) {
  return Guard([&] {
    NotNull(out, "out");
    const evc::nn::AttentionParams p{MapMat(wq, d, d), MapMat(wk, d, d), MapMat(wv, d, d), MapMat(wo, d, d)};
    const auto r = evc::nn::CrossAttention(MapMat(q_in, tq, d), MapMat(kv_in, tk, d), p);
    CopyOut(r.output, out);
    CopyOut(r.weights, weights);
  });
}

evc_status evc_grl_backward(const double* upstream, size_t n, double lambda, double* out) {
  return Guard([&] {
    if (n > 0) NotNull(out, "out");
    CopyOut(evc::nn::GrlBackward(MapMat(upstream, 1, n), lambda), out);
  });
}

evc_status evc_loss_prosody(const double* f0_hat, const double* f0, const double* vuv, size_t n_frames,
                            const double* energy_hat, const double* energy, const double* dur_hat,
                            const double* dur, size_t n_units, double* value, double* grad_f0_hat,
                            double* grad_energy_hat, double* grad_dur_hat) {
  return Guard([&] {
    NotNull(value, "value");
    const auto l = evc::nn::LossProsody(Span(f0_hat, n_frames), Span(f0, n_frames), ToVuv(Span(vuv, n_frames)),
                                        Span(energy_hat, n_frames), Span(energy, n_frames),
                                        Span(dur_hat, n_units), Span(dur, n_units));
    *value = l.value;
    auto copy = [](const std::vector<double>& g, double* dst) {
      if (dst && !g.empty()) std::memcpy(dst, g.data(), sizeof(double) * g.size());
    };
    copy(l.grad_f0_hat, grad_f0_hat);
    copy(l.grad_energy_hat, grad_energy_hat);
    copy(l.grad_dur_hat, grad_dur_hat);
  });
}

evc_status evc_loss_triplet(const double* a, const double* p, const double* n, size_t n_rows, size_t d,
                            double alpha, double* value, double* grad_a, double* grad_p, double* grad_n) {
  return Guard([&] {
    NotNull(value, "value");
    const auto l = evc::nn::LossTriplet(MapMat(a, n_rows, d), MapMat(p, n_rows, d), MapMat(n, n_rows, d), alpha);
    *value = l.value;
    CopyOut(l.grad_anchor, grad_a);
    CopyOut(l.grad_positive, grad_p);
    CopyOut(l.grad_negative, grad_n);
  });
}

evc_status evc_cross_entropy(const double* logits, size_t n_rows, size_t n_classes, const int32_t* labels,
                             double* value, double* grad) {
  return Guard([&] {
    NotNull(value, "value");
    if (n_rows > 0) NotNull(labels, "labels");
    const auto l = evc::nn::CrossEntropy(MapMat(logits, n_rows, n_classes),
                                         std::span<const std::int32_t>(labels, n_rows));
    *value = l.value;
    CopyOut(l.grad_logits, grad);
  });
}

evc_status evc_cosine_similarity(const double* u, const double* v, size_t n, double* out) {
  return Guard([&] {
    NotNull(out, "out");
    *out = evc::nn::CosineSimilarity(Span(u, n), Span(v, n));
  });
}

evc_status evc_assemble_losses(const char* const* part_names, const double* part_values, size_t n_parts,
                               const char* const* weight_names, const double* weight_values, size_t n_weights,
                               double* total) {
  return Guard([&] {
    NotNull(total, "total");
    std::map<std::string, double> parts, weights;
    for (size_t i = 0; i < n_parts; ++i) {
      NotNull(part_names[i], "part name");
      parts[part_names[i]] = part_values[i];
    }
    for (size_t i = 0; i < n_weights; ++i) {
      NotNull(weight_names[i], "weight name");
      weights[weight_names[i]] = weight_values[i];
    }
    *total = evc::nn::AssembleTotalLosses(parts, weights).total;
  });
}

// ------------------------------------------------------------------ metrics

evc_status evc_dtw(const double* a, size_t na, const double* b, size_t nb, double* cost, size_t* path_len) {
  return Guard([&] {
    const auto p = evc::DtwAlign(Span(a, na), Span(b, nb));
    if (cost) *cost = p.cost;
    if (path_len) *path_len = p.pairs.size();
  });
}

evc_status evc_aligned_pcc(const double* a, size_t na, const double* b, size_t nb, int drop_zeros, double* out) {
  return Guard([&] {
    NotNull(out, "out");
    *out = evc::AlignedPcc(Span(a, na), Span(b, nb), drop_zeros != 0);
  });
}

evc_status evc_wer(const char* ref, const char* hyp, double* out) {
  return Guard([&] {
    NotNull(ref, "ref");
    NotNull(hyp, "hyp");
    NotNull(out, "out");
    *out = evc::WordErrorRate(ref, hyp);
  });
}

evc_status evc_cer(const char* ref, const char* hyp, double* out) {
  return Guard([&] {
    NotNull(ref, "ref");
    NotNull(hyp, "hyp");
    NotNull(out, "out");
    *out = evc::CharacterErrorRate(ref, hyp);
  });
}

evc_status evc_eecs(const double* e1, const double* e2, size_t n, double* out) {
  return Guard([&] {
    NotNull(out, "out");
    *out = evc::Eecs(Span(e1, n), Span(e2, n));
  });
}

evc_status evc_evaluate(const evc_bundle* ref, const evc_bundle* hyp, const char* ref_text, const char* hyp_text,
                        const evc_seq* ref_emb, const evc_seq* hyp_emb, evc_metric_report* out) {
  return Guard([&] {
    NotNull(ref, "ref");
    NotNull(hyp, "hyp");
    NotNull(out, "out");
    evc_metric_report r{};
    if (ref_text && hyp_text) {
      r.wer = evc::WordErrorRate(ref_text, hyp_text);
      r.cer = evc::CharacterErrorRate(ref_text, hyp_text);
      r.has_wer = r.has_cer = 1;
    }
    if (ref_emb && hyp_emb) {
      r.eecs = evc::Eecs(ref_emb->v, hyp_emb->v);
      r.has_eecs = 1;
    }
    try {
      r.f0_pcc = evc::AlignedPcc(ref->b.f0.values, hyp->b.f0.values, true);
      r.has_f0_pcc = 1;
    } catch (const evc::Error& e) {
      if (e.code() != evc::ErrorCode::kUndefined) throw;
      r.warnings |= EVC_WARN_F0_PCC_UNDEFINED;
    }
    try {
      r.e_pcc = evc::AlignedPcc(ref->b.energy.values, hyp->b.energy.values, false);
      r.has_e_pcc = 1;
    } catch (const evc::Error& e) {
      if (e.code() != evc::ErrorCode::kUndefined) throw;
      r.warnings |= EVC_WARN_E_PCC_UNDEFINED;
    }
    *out = r;
  });
}

evc_status evc_metric_report_to_json(const evc_metric_report* r, const char* ref_name, const char* hyp_name,
                                     char** out) {
  return Guard([&] {
    NotNull(r, "report");
    NotNull(out, "out");
    nlohmann::ordered_json j;
    if (ref_name) j["ref"] = ref_name;
    if (hyp_name) j["hyp"] = hyp_name;
    j.update(ReportJson(*r));
    *out = DupString(j.dump());
  });
}

evc_status evc_metric_summary_to_json(const evc_metric_report* reports, size_t n, char** out) {
  return Guard([&] {
    NotNull(out, "out");
    if (n > 0) NotNull(reports, "reports");
    std::vector<evc::MetricReport> all;
    for (size_t i = 0; i < n; ++i) all.push_back(FromC(reports[i]));
    const auto mean = evc::MeanReport(all);
    nlohmann::ordered_json j;
    j["summary"] = true;
    j["count"] = n;
    j.update(nlohmann::ordered_json::parse(evc::MetricReportToJson(mean)));
    *out = DupString(j.dump());
  });
}

// ------------------------------------------------------------------- checks

evc_status evc_run_checks(unsigned which, uint64_t seed, evc_check_callback cb, void* user, int* all_passed) {
  return Guard([&] {
    evc::Require((which & (EVC_CHECK_GRADIENTS | EVC_CHECK_ORACLES)) != 0, evc::ErrorCode::kInvalidArgument,
                  "no check suite selected");
    std::vector<evc::check::CheckResult> results;
    if (which & EVC_CHECK_GRADIENTS) {
      for (auto& r : evc::check::RunGradientChecks(seed)) results.push_back(std::move(r));
    }
    if (which & EVC_CHECK_ORACLES) {
      for (auto& r : evc::check::RunOracleChecks(seed)) results.push_back(std::move(r));
    }
    bool ok = true;
    for (const auto& r : results) {
      ok = ok && r.passed;
      if (cb) cb(evc::check::CheckResultToJson(r).c_str(), user);
    }
    if (all_passed) *all_passed = ok ? 1 : 0;
  });
}

}  // extern "C"
