#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace evc {

struct AlignmentPath {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double cost = 0.0;
};

// DTW with local cost |a_i - b_j| and steps (1,0), (0,1), (1,1). When the
// backtrace has equal-cost predecessors it prefers the diagonal, then (i-1, j),
// then (i, j-1).
AlignmentPath DtwAlign(std::span<const double> a, std::span<const double> b);

// Throws kUndefined when either side has zero variance.
double Pearson(std::span<const double> x, std::span<const double> y);

// DTW-align, gather value pairs along the path, Pearson-correlate them. With
// drop_zeros (F0 contours) zero frames are removed from both inputs first.
double AlignedPcc(std::span<const double> a, std::span<const double> b, bool drop_zeros);

template <typename T>
std::size_t EditDistance(std::span<const T> ref, std::span<const T> hyp);

std::vector<std::string> SplitWords(std::string_view text);
// UTF-8 code points, whitespace runs collapsed to one space, trimmed.
std::u32string SplitChars(std::string_view text);

// Levenshtein distance over whitespace tokens / len(ref) * 100.
double WordErrorRate(std::string_view ref, std::string_view hyp);
// Same over characters (see SplitChars).
double CharacterErrorRate(std::string_view ref, std::string_view hyp);

// Cosine similarity of two externally computed emotion embeddings.
double Eecs(std::span<const double> e1, std::span<const double> e2);

struct MetricReport {
  std::optional<double> wer;
  std::optional<double> cer;
  std::optional<double> eecs;
  std::optional<double> f0_pcc;
  std::optional<double> e_pcc;
  std::vector<std::string> warnings;
};

// Per-metric mean over reports where the metric is present.
MetricReport MeanReport(std::span<const MetricReport> reports);

// {"wer":..,"cer":..,"eecs":..,"f0_pcc":..,"e_pcc":..}; absent -> null.
std::string MetricReportToJson(const MetricReport& r);

}  // namespace evc
