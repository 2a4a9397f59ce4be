// evc: command-line front end over the C API in libevc.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "evc/evc.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct CliError {
  int exit_code;
  std::string message;
};

int ExitCodeFor(evc_status s) {
  switch (s) {
    case EVC_OK:
      return kExitOk;
    case EVC_ERR_DEGENERATE:
    case EVC_ERR_UNDEFINED:
    case EVC_ERR_INTERNAL:
      return kExitFailure;
    default:
      return kExitUsage;
  }
}

void Check(evc_status s, const std::string& context) {
  if (s == EVC_OK) return;
  throw CliError{ExitCodeFor(s), context + ": " + evc_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};

using Seq = std::unique_ptr<evc_seq, Deleter<evc_seq, evc_seq_free>>;
using Bundle = std::unique_ptr<evc_bundle, Deleter<evc_bundle, evc_bundle_free>>;
using Matrix = std::unique_ptr<evc_matrix, Deleter<evc_matrix, evc_matrix_free>>;
using Codebook = std::unique_ptr<evc_codebook, Deleter<evc_codebook, evc_codebook_free>>;
using Units = std::unique_ptr<evc_units, Deleter<evc_units, evc_units_free>>;
using Runs = std::unique_ptr<evc_dedup_result, Deleter<evc_dedup_result, evc_dedup_free>>;

struct CString {
  char* p = nullptr;
  ~CString() { evc_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

Bundle ReadBundle(const std::string& path) {
  evc_bundle* b = nullptr;
  Check(evc_bundle_read(path.c_str(), &b), path);
  return Bundle(b);
}

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{kExitUsage, "cannot open " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// One unit of work per input file. Outputs are independent, so they run on
// up to `jobs` threads; diagnostics are reported in input order afterwards.
struct JobResult {
  int exit_code = kExitOk;
  std::string message;
  std::string stdout_text;
};

template <typename F>
int RunJobs(std::size_t count, std::size_t jobs, F&& work) {
  std::vector<JobResult> results(count);
  auto run_one = [&](std::size_t i) {
    try {
      results[i].stdout_text = work(i);
    } catch (const CliError& e) {
      results[i] = {e.exit_code, e.message, {}};
    } catch (const std::exception& e) {
      results[i] = {kExitFailure, e.what(), {}};
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) run_one(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  int code = kExitOk;
  for (const auto& r : results) {
    if (!r.stdout_text.empty()) std::cout << r.stdout_text;
    if (r.exit_code != kExitOk) {
      std::cerr << "evc: " << r.message << "\n";
      code = std::max(code, r.exit_code);
    }
  }
  std::cout.flush();
  return code;
}

// Output path for input i: -o for a single input, otherwise <out-dir>/<stem>.json.
std::string OutputFor(const std::vector<std::string>& inputs, std::size_t i, const std::string& out,
                      const std::string& out_dir) {
  if (!out.empty()) return out;
  namespace fs = std::filesystem;
  return (fs::path(out_dir) / fs::path(inputs[i]).stem()).string() + ".json";
}

void ValidateOutputs(const std::vector<std::string>& inputs, const std::string& out, const std::string& out_dir) {
  if (!out.empty() && !out_dir.empty()) throw CliError{kExitUsage, "use either -o or --out-dir, not both"};
  if (out.empty() && out_dir.empty()) throw CliError{kExitUsage, "an output is required (-o or --out-dir)"};
  if (!out.empty() && inputs.size() != 1) throw CliError{kExitUsage, "-o takes exactly one input; use --out-dir"};
  if (!out_dir.empty() && !std::filesystem::is_directory(out_dir)) {
    throw CliError{kExitUsage, "output directory does not exist: " + out_dir};
  }
}

struct Globals {
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
};

struct PathArgs {
  std::vector<std::string> inputs;
  std::string out;
  std::string out_dir;
};

void AddPathArgs(CLI::App* cmd, PathArgs& a, const char* what) {
  cmd->add_option("inputs", a.inputs, what)->required();
  cmd->add_option("-o,--out", a.out, "Output file (single input)");
  cmd->add_option("--out-dir", a.out_dir, "Output directory (one <stem>.json per input)");
}

// ------------------------------------------------------------------ extract

struct ExtractArgs {
  PathArgs paths;
  std::string units;
  evc_frame_params frame{};
  evc_f0_params f0{};
  evc_smooth_params smooth{};
};

void AddSmoothArgs(CLI::App* cmd, evc_smooth_params& p) {
  cmd->add_option("--smooth-window", p.window, "Savitzky-Golay window in frames (odd)")->capture_default_str();
  cmd->add_option("--smooth-order", p.order, "Savitzky-Golay polynomial order")->capture_default_str();
}

int CmdExtract(const ExtractArgs& a, const Globals& g) {
  ValidateOutputs(a.paths.inputs, a.paths.out, a.paths.out_dir);
  if (!a.units.empty() && a.paths.inputs.size() != 1) {
    throw CliError{kExitUsage, "--units takes exactly one input"};
  }
  const auto& in = a.paths.inputs;
  return RunJobs(in.size(), g.jobs, [&](std::size_t i) {
    evc_bundle* raw = nullptr;
    Check(evc_extract(in[i].c_str(), &a.frame, &a.f0, &a.smooth, a.units.empty() ? nullptr : a.units.c_str(), &raw),
          in[i]);
    Bundle b(raw);
    const auto out = OutputFor(in, i, a.paths.out, a.paths.out_dir);
    Check(evc_bundle_write(b.get(), out.c_str()), out);
    return std::string();
  });
}

// ------------------------------------------------------------------- smooth

struct SmoothArgs {
  PathArgs paths;
  evc_smooth_params smooth{};
};

int CmdSmooth(const SmoothArgs& a, const Globals& g) {
  ValidateOutputs(a.paths.inputs, a.paths.out, a.paths.out_dir);
  const auto& in = a.paths.inputs;
  return RunJobs(in.size(), g.jobs, [&](std::size_t i) {
    auto b = ReadBundle(in[i]);
    Check(evc_bundle_smooth(b.get(), &a.smooth), in[i]);
    const auto out = OutputFor(in, i, a.paths.out, a.paths.out_dir);
    Check(evc_bundle_write(b.get(), out.c_str()), out);
    return std::string();
  });
}

// ------------------------------------------------------------------ augment

struct AugmentArgs {
  PathArgs paths;
  evc_augment_params aug{};
  std::vector<int> shift_range;
  std::vector<int> segments;
  std::vector<double> scales;
};

void ApplyRanges(AugmentArgs& a) {
  if (!a.shift_range.empty()) {
    if (a.shift_range[0] != -a.shift_range[1]) throw CliError{kExitUsage, "--shift-range must be symmetric, e.g. -15,15"};
    a.aug.max_shift = a.shift_range[1];
  }
  if (!a.segments.empty()) {
    a.aug.min_segments = a.segments[0];
    a.aug.max_segments = a.segments[1];
  }
  if (!a.scales.empty()) {
    a.aug.min_scale = a.scales[0];
    a.aug.max_scale = a.scales[1];
  }
}

int CmdAugment(AugmentArgs& a, const Globals& g) {
  ApplyRanges(a);
  ValidateOutputs(a.paths.inputs, a.paths.out, a.paths.out_dir);
  std::uint64_t base = 0;
  if (g.seed) {
    base = *g.seed;
  } else {
    std::random_device rd;
    base = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  const auto& in = a.paths.inputs;
  return RunJobs(in.size(), g.jobs, [&](std::size_t i) {
    auto b = ReadBundle(in[i]);
    // Input i draws from seed + i so every file gets its own stream.
    Check(evc_bundle_augment(b.get(), &a.aug, base + i), in[i]);
    const auto out = OutputFor(in, i, a.paths.out, a.paths.out_dir);
    Check(evc_bundle_write(b.get(), out.c_str()), out);
    return std::string();
  });
}

// -------------------------------------------------------------------- units

struct UnitsArgs {
  std::string input;
  std::string out;
  std::string codebook;
  std::string inertia;
  std::size_t k = 500;
  std::size_t max_iters = 100;
};

Matrix LoadFeatures(const std::string& path) {
  evc_matrix* m = nullptr;
  Check(evc_features_load(path.c_str(), &m), path);
  return Matrix(m);
}

int CmdUnitsFit(const UnitsArgs& a, const Globals& g) {
  auto feats = LoadFeatures(a.input);
  evc_codebook* cb = nullptr;
  evc_seq* inertia = nullptr;
  Check(evc_kmeans_fit(feats.get(), a.k, g.seed.value_or(0), a.max_iters, g.jobs, &cb, &inertia), "units fit");
  Codebook codebook(cb);
  Seq history(inertia);
  Check(evc_codebook_write(codebook.get(), a.out.c_str()), a.out);
  if (!a.inertia.empty()) Check(evc_seq_write_csv(history.get(), a.inertia.c_str()), a.inertia);
  return kExitOk;
}

int CmdUnitsEncode(const UnitsArgs& a, const Globals&) {
  auto feats = LoadFeatures(a.input);
  evc_codebook* cb = nullptr;
  Check(evc_codebook_read(a.codebook.c_str(), &cb), a.codebook);
  Codebook codebook(cb);
  evc_units* u = nullptr;
  Check(evc_kmeans_assign(feats.get(), codebook.get(), &u), "units encode");
  Units units(u);
  Check(evc_units_write(units.get(), a.out.c_str()), a.out);
  return kExitOk;
}

int CmdUnitsDedup(const UnitsArgs& a, const Globals&) {
  evc_units* u = nullptr;
  Check(evc_units_read(a.input.c_str(), &u), a.input);
  Units units(u);
  evc_dedup_result* d = nullptr;
  Check(evc_dedup(units.get(), &d), "units dedup");
  Runs runs(d);
  Check(evc_dedup_write(runs.get(), a.out.c_str()), a.out);
  return kExitOk;
}

int CmdUnitsExpand(const UnitsArgs& a, const Globals&) {
  evc_dedup_result* d = nullptr;
  Check(evc_dedup_read(a.input.c_str(), &d), a.input);
  Runs runs(d);
  evc_units* u = nullptr;
  Check(evc_expand(runs.get(), &u), "units expand");
  Units units(u);
  Check(evc_units_write(units.get(), a.out.c_str()), a.out);
  return kExitOk;
}

// --------------------------------------------------------------------- eval

struct EvalArgs {
  std::string ref, hyp;
  std::optional<std::string> ref_text, hyp_text;
  std::string ref_text_file, hyp_text_file;
  std::string ref_emb, hyp_emb;
  std::string pairs;
  std::string out;
};

struct EvalItem {
  std::string ref, hyp;
  std::optional<std::string> ref_text, hyp_text;
  std::string ref_emb, hyp_emb;
};

Seq ReadSeq(const std::string& path) {
  evc_seq* s = nullptr;
  Check(evc_seq_read_text(path.c_str(), &s), path);
  return Seq(s);
}

std::string Chomp(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

void WarnUndefined(const evc_metric_report& r, const std::string& label, std::string& warnings) {
  if (r.warnings & EVC_WARN_F0_PCC_UNDEFINED) warnings += "evc: warning: " + label + ": f0_pcc undefined\n";
  if (r.warnings & EVC_WARN_E_PCC_UNDEFINED) warnings += "evc: warning: " + label + ": e_pcc undefined\n";
}

evc_metric_report Evaluate(const EvalItem& item, std::string& warnings) {
  auto ref = ReadBundle(item.ref);
  auto hyp = ReadBundle(item.hyp);
  Seq ref_emb, hyp_emb;
  if (!item.ref_emb.empty() && !item.hyp_emb.empty()) {
    ref_emb = ReadSeq(item.ref_emb);
    hyp_emb = ReadSeq(item.hyp_emb);
  }
  const bool texts = item.ref_text && item.hyp_text;
  evc_metric_report r{};
  Check(evc_evaluate(ref.get(), hyp.get(), texts ? item.ref_text->c_str() : nullptr,
                     texts ? item.hyp_text->c_str() : nullptr, ref_emb.get(), hyp_emb.get(), &r),
        item.ref + " vs " + item.hyp);
  WarnUndefined(r, item.ref + " vs " + item.hyp, warnings);
  return r;
}

std::string ReportLine(const evc_metric_report& r, const EvalItem& item) {
  CString s;
  Check(evc_metric_report_to_json(&r, item.ref.c_str(), item.hyp.c_str(), &s.p), "report");
  return s.str() + "\n";
}

// Pairs file: one `ref hyp [ref_text_file hyp_text_file [ref_emb hyp_emb]]`
// per line, `-` for a missing column, `#` starts a comment.
std::vector<EvalItem> ReadPairs(const std::string& path) {
  std::istringstream in(ReadText(path));
  std::vector<EvalItem> items;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> cols;
    for (std::string c; ls >> c;) cols.push_back(c);
    if (cols.empty()) continue;
    if (cols.size() != 2 && cols.size() != 4 && cols.size() != 6) {
      throw CliError{kExitUsage, path + ":" + std::to_string(lineno) + ": expected 2, 4 or 6 columns"};
    }
    auto col = [&](std::size_t k) { return k < cols.size() && cols[k] != "-" ? cols[k] : std::string(); };
    EvalItem it{cols[0], cols[1], std::nullopt, std::nullopt, col(4), col(5)};
    if (!col(2).empty() && !col(3).empty()) {
      it.ref_text = Chomp(ReadText(col(2)));
      it.hyp_text = Chomp(ReadText(col(3)));
    }
    items.push_back(std::move(it));
  }
  return items;
}

int CmdEval(const EvalArgs& a, const Globals& g) {
  std::vector<EvalItem> items;
  const bool batch = !a.pairs.empty();
  if (batch) {
    if (!a.ref.empty() || !a.hyp.empty()) throw CliError{kExitUsage, "--pairs excludes --ref/--hyp"};
    items = ReadPairs(a.pairs);
  } else {
    if (a.ref.empty() || a.hyp.empty()) throw CliError{kExitUsage, "eval needs --ref and --hyp, or --pairs"};
    EvalItem it{a.ref, a.hyp, a.ref_text, a.hyp_text, a.ref_emb, a.hyp_emb};
    if (!a.ref_text_file.empty()) it.ref_text = Chomp(ReadText(a.ref_text_file));
    if (!a.hyp_text_file.empty()) it.hyp_text = Chomp(ReadText(a.hyp_text_file));
    if (it.ref_text.has_value() != it.hyp_text.has_value()) {
      throw CliError{kExitUsage, "reference and hypothesis transcripts must be given together"};
    }
    if (it.ref_emb.empty() != it.hyp_emb.empty()) {
      throw CliError{kExitUsage, "reference and hypothesis embeddings must be given together"};
    }
    items.push_back(std::move(it));
  }

  std::vector<evc_metric_report> reports(items.size());
  std::vector<char> ok(items.size(), 0);
  std::vector<std::string> warnings(items.size());
  int code = RunJobs(items.size(), g.jobs, [&](std::size_t i) {
    reports[i] = Evaluate(items[i], warnings[i]);
    ok[i] = 1;
    return std::string();
  });
  std::string text;
  std::vector<evc_metric_report> good;
  for (std::size_t i = 0; i < items.size(); ++i) {
    std::cerr << warnings[i];
    if (!ok[i]) continue;
    text += ReportLine(reports[i], items[i]);
    good.push_back(reports[i]);
  }
  if (batch) {
    CString s;
    Check(evc_metric_summary_to_json(good.data(), good.size(), &s.p), "summary");
    text += s.str() + "\n";
  }
  if (a.out.empty()) {
    std::cout << text;
  } else if (!text.empty()) {
    std::ofstream out(a.out, std::ios::binary | std::ios::trunc);
    if (!(out << text)) throw CliError{kExitUsage, "cannot write " + a.out};
  }
  return code;
}

// -------------------------------------------------------------------- check

struct CheckArgs {
  bool grads = false;
  bool oracles = false;
};

void PrintLine(const char* line, void*) { std::cout << line << "\n"; }

int CmdCheck(const CheckArgs& a, const Globals& g) {
  unsigned which = 0;
  if (a.grads) which |= EVC_CHECK_GRADIENTS;
  if (a.oracles) which |= EVC_CHECK_ORACLES;
  if (which == 0) which = EVC_CHECK_GRADIENTS | EVC_CHECK_ORACLES;
  int all_passed = 0;
  Check(evc_run_checks(which, g.seed.value_or(7), PrintLine, nullptr, &all_passed), "check");
  std::cout.flush();
  return all_passed ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evc - prosody extraction, augmentation, discrete units and evaluation"};
  app.set_version_flag("--version", std::string(evc_version()));
  app.set_config("--config", "", "Read options from a key=value (TOML/INI) file");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Seed for every random draw");
  app.add_option("--jobs", g.jobs, "Worker threads for multi-file commands")->check(CLI::PositiveNumber);

  ExtractArgs ex;
  evc_frame_params_default(&ex.frame);
  evc_f0_params_default(&ex.f0);
  evc_smooth_params_default(&ex.smooth);
  auto* extract = app.add_subcommand("extract", "WAV -> prosody bundle (F0, energy, VUV, smoothed contours)");
  AddPathArgs(extract, ex.paths, "16 kHz mono 16-bit WAV files");
  extract->add_option("--units", ex.units, "Unit sequence file; its run lengths become the durations");
  extract->add_option("--window", ex.frame.window_size, "STFT window in samples")->capture_default_str();
  extract->add_option("--hop", ex.frame.hop_size, "Hop in samples")->capture_default_str();
  extract->add_option("--n-mels", ex.frame.n_mels, "Mel bands")->capture_default_str();
  extract->add_option("--fmin", ex.frame.fmin, "Lowest mel frequency (Hz)")->capture_default_str();
  extract->add_option("--fmax", ex.frame.fmax, "Highest mel frequency (Hz)")->capture_default_str();
  extract->add_option("--f0-min", ex.f0.f0_min, "Lowest F0 (Hz)")->capture_default_str();
  extract->add_option("--f0-max", ex.f0.f0_max, "Highest F0 (Hz)")->capture_default_str();
  extract->add_option("--threshold", ex.f0.periodicity_threshold, "Voicing periodicity threshold")
      ->capture_default_str();
  AddSmoothArgs(extract, ex.smooth);

  SmoothArgs sm;
  evc_smooth_params_default(&sm.smooth);
  auto* smooth = app.add_subcommand("smooth", "Recompute the smoothed contours of a bundle");
  AddPathArgs(smooth, sm.paths, "Bundle files");
  AddSmoothArgs(smooth, sm.smooth);

  AugmentArgs au;
  evc_augment_params_default(&au.aug);
  auto* augment = app.add_subcommand("augment", "Add randomly shifted or time-warped contours to a bundle");
  AddPathArgs(augment, au.paths, "Bundle files");
  augment->add_option("--shift-range", au.shift_range, "Shift interval in frames, symmetric (LO,HI)")
      ->expected(2)
      ->delimiter(',');
  augment->add_option("--segments", au.segments, "Warp segment count interval (LO,HI)")->expected(2)->delimiter(',');
  augment->add_option("--scale-range", au.scales, "Warp scale interval (LO,HI)")->expected(2)->delimiter(',');

  UnitsArgs un;
  auto* units = app.add_subcommand("units", "Discrete speech units");
  units->require_subcommand(1);
  auto* fit = units->add_subcommand("fit", "k-means codebook from a feature matrix (.csv or float32 .bin)");
  fit->add_option("features", un.input, "Feature file")->required();
  fit->add_option("-o,--out", un.out, "Codebook JSON")->required();
  fit->add_option("--k", un.k, "Codebook size")->capture_default_str();
  fit->add_option("--max-iters", un.max_iters, "Lloyd iterations")->capture_default_str();
  fit->add_option("--inertia", un.inertia, "Write the per-iteration inertia as CSV");
  auto* encode = units->add_subcommand("encode", "Nearest-centroid unit per frame");
  encode->add_option("features", un.input, "Feature file")->required();
  encode->add_option("--codebook", un.codebook, "Codebook JSON")->required();
  encode->add_option("-o,--out", un.out, "Unit file")->required();
  auto* dedup = units->add_subcommand("dedup", "Run-length encode a unit file");
  dedup->add_option("units", un.input, "Unit file")->required();
  dedup->add_option("-o,--out", un.out, "Runs JSON")->required();
  auto* expand = units->add_subcommand("expand", "Inverse of dedup");
  expand->add_option("runs", un.input, "Runs JSON")->required();
  expand->add_option("-o,--out", un.out, "Unit file")->required();

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Objective metrics between reference and converted bundles");
  eval->add_option("--ref", ev.ref, "Reference bundle");
  eval->add_option("--hyp", ev.hyp, "Hypothesis bundle");
  eval->add_option("--ref-text", ev.ref_text, "Reference transcript");
  eval->add_option("--hyp-text", ev.hyp_text, "Hypothesis transcript (ASR output)");
  eval->add_option("--ref-text-file", ev.ref_text_file, "Reference transcript file");
  eval->add_option("--hyp-text-file", ev.hyp_text_file, "Hypothesis transcript file");
  eval->add_option("--ref-emb", ev.ref_emb, "Reference emotion embedding (whitespace separated numbers)");
  eval->add_option("--hyp-emb", ev.hyp_emb, "Hypothesis emotion embedding");
  eval->add_option("--pairs", ev.pairs, "Batch file of `ref hyp [ref_txt hyp_txt [ref_emb hyp_emb]]` lines");
  eval->add_option("-o,--out", ev.out, "Write the JSON lines here instead of stdout");

  CheckArgs ck;
  auto* check = app.add_subcommand("check", "Run the gradient and oracle self-checks");
  check->add_flag("--grads", ck.grads, "Finite-difference gradient checks");
  check->add_flag("--oracles", ck.oracles, "DTW and Savitzky-Golay oracle checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    if (extract->parsed()) return CmdExtract(ex, g);
    if (smooth->parsed()) return CmdSmooth(sm, g);
    if (augment->parsed()) return CmdAugment(au, g);
    if (fit->parsed()) return CmdUnitsFit(un, g);
    if (encode->parsed()) return CmdUnitsEncode(un, g);
    if (dedup->parsed()) return CmdUnitsDedup(un, g);
    if (expand->parsed()) return CmdUnitsExpand(un, g);
    if (eval->parsed()) return CmdEval(ev, g);
    if (check->parsed()) return CmdCheck(ck, g);
  } catch (const CliError& e) {
    std::cerr << "evc: " << e.message << "\n";
    return e.exit_code;
  }
  return kExitUsage;
}
