#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "evc/signal_io.hpp"

namespace evc {

// T x D, one frame-level feature vector per row.
using FeatureMatrix = RowMatrix;

struct Codebook {
  RowMatrix centroids;  // K x D

  std::size_t k() const { return static_cast<std::size_t>(centroids.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(centroids.cols()); }
};

using UnitSequence = std::vector<std::int32_t>;

struct DedupResult {
  UnitSequence units;                // no two adjacent entries equal
  std::vector<std::int32_t> counts;  // all >= 1

  std::size_t size() const { return units.size(); }
};

struct KMeansOptions {
  std::size_t k = 500;
  std::uint64_t seed = 0;
  std::size_t max_iters = 100;
  // Worker threads for the assignment step. Output does not depend on it.
  std::size_t jobs = 1;
  // Throw kInternal if inertia ever increases between iterations.
  bool check_monotone = false;
};

struct KMeansResult {
  Codebook codebook;
  UnitSequence assignment;
  // inertia_history[i] is the inertia right after the i-th assignment step.
  std::vector<double> inertia_history;
  std::size_t iterations = 0;
  bool converged = false;
};

// k-means++ seeding followed by Lloyd iterations until the assignment stops
// changing or max_iters is reached. Empty clusters keep their centroid.
KMeansResult KMeansFit(const FeatureMatrix& features, const KMeansOptions& opts);

// Nearest centroid by squared Euclidean distance; ties go to the lower index.
UnitSequence KMeansAssign(const FeatureMatrix& features, const Codebook& cb);

double Inertia(const FeatureMatrix& features, const Codebook& cb, const UnitSequence& assignment);

DedupResult Dedup(const UnitSequence& units);
UnitSequence Expand(const DedupResult& d);

// ---- file formats ----

// CSV with one frame per row; a non-numeric first line is treated as a header.
FeatureMatrix LoadFeaturesCsv(const std::string& path);
// Raw little-endian float32, shape from the JSON sidecar `{frames, dim}` at
// `path + ".json"`.
FeatureMatrix LoadFeaturesBin(const std::string& path);
void SaveFeaturesBin(const FeatureMatrix& f, const std::string& path);
// Dispatches on extension: .csv -> CSV, anything else -> binary + sidecar.
FeatureMatrix LoadFeatures(const std::string& path);

// `{"k": K, "dim": D, "centroids": [[...], ...]}`
std::string CodebookToJson(const Codebook& cb);
Codebook CodebookFromJson(const std::string& text);
void SaveCodebook(const Codebook& cb, const std::string& path);
Codebook LoadCodebook(const std::string& path);

// Unit files hold whitespace-separated integers; written as one line.
void SaveUnits(const UnitSequence& u, const std::string& path);
UnitSequence LoadUnits(const std::string& path);

// `{"units": [...], "counts": [...]}`
void SaveDedup(const DedupResult& d, const std::string& path);
DedupResult LoadDedup(const std::string& path);

}  // namespace evc
