#include "evc/units.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "evc/error.hpp"
#include "evc/random.hpp"
#include "io_util.hpp"

namespace evc {

using nlohmann::json;

namespace {

double SquaredDistance(const FeatureMatrix& x, Eigen::Index i, const RowMatrix& c, Eigen::Index j) {
  return (x.row(i) - c.row(j)).squaredNorm();
}

void RequireFinite(const RowMatrix& m, const char* what) {
  Require(m.allFinite(), ErrorCode::kInvalidArgument, std::string(what) + " contains non-finite values");
}

// Nearest centroid for rows [begin, end). Returns the summed squared distance.
double AssignRange(const FeatureMatrix& x, const RowMatrix& c, Eigen::Index begin,
                   Eigen::Index end, UnitSequence& out) {
  double inertia = 0.0;
  for (Eigen::Index i = begin; i < end; ++i) {
    std::int32_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < c.rows(); ++j) {
      const double d = SquaredDistance(x, i, c, j);
      if (d < best_d) {
        best_d = d;
        best = static_cast<std::int32_t>(j);
      }
    }
    out[static_cast<std::size_t>(i)] = best;
    inertia += best_d;
  }
  return inertia;
}

// Per-chunk partial sums are added in chunk order, so the inertia does not
// depend on how many workers ran.
double AssignAll(const FeatureMatrix& x, const RowMatrix& c, std::size_t jobs, UnitSequence& out) {
  const Eigen::Index n = x.rows();
  out.resize(static_cast<std::size_t>(n));
  constexpr Eigen::Index kChunk = 256;
  const Eigen::Index chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
  auto run = [&](std::size_t worker, std::size_t workers) {
    for (Eigen::Index ch = static_cast<Eigen::Index>(worker); ch < chunks;
         ch += static_cast<Eigen::Index>(workers)) {
      const Eigen::Index begin = ch * kChunk;
      partial[static_cast<std::size_t>(ch)] = AssignRange(x, c, begin, std::min(n, begin + kChunk), out);
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, static_cast<std::size_t>(std::max<Eigen::Index>(chunks, 1)));
  if (workers == 1) {
    run(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
    for (auto& t : pool) t.join();
  }
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

RowMatrix PlusPlusSeed(const FeatureMatrix& x, std::size_t k, Rng& rng) {
  const Eigen::Index n = x.rows();
  RowMatrix c(static_cast<Eigen::Index>(k), x.cols());
  const auto first = static_cast<Eigen::Index>(rng.UniformInt(0, n - 1));
  c.row(0) = x.row(first);
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = SquaredDistance(x, i, c, 0);

  for (std::size_t j = 1; j < k; ++j) {
    double total = 0.0;
    for (double v : d2) total += v;
    Eigen::Index pick = n - 1;
    if (total > 0.0) {
      const double target = rng.Uniform01() * total;
      double cum = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        cum += d2[static_cast<std::size_t>(i)];
        if (cum > target && d2[static_cast<std::size_t>(i)] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      // Every point coincides with a centroid already.
      pick = static_cast<Eigen::Index>(rng.UniformInt(0, n - 1));
    }
    const auto row = static_cast<Eigen::Index>(j);
    c.row(row) = x.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& v = d2[static_cast<std::size_t>(i)];
      v = std::min(v, SquaredDistance(x, i, c, row));
    }
  }
  return c;
}

}  // namespace

KMeansResult KMeansFit(const FeatureMatrix& features, const KMeansOptions& opts) {
  Require(opts.k >= 1, ErrorCode::kInvalidArgument, "k-means: k must be >= 1");
  Require(opts.max_iters >= 1, ErrorCode::kInvalidArgument, "k-means: max_iters must be >= 1");
  Require(features.cols() >= 1, ErrorCode::kInvalidArgument, "k-means: features have no columns");
  Require(static_cast<std::size_t>(features.rows()) >= opts.k, ErrorCode::kInsufficientData,
          "k-means: insufficient data, " + std::to_string(features.rows()) + " frames cannot support k = " +
              std::to_string(opts.k));
  RequireFinite(features, "feature matrix");

  Rng rng(opts.seed);
  KMeansResult result;
  RowMatrix centroids = PlusPlusSeed(features, opts.k, rng);
  UnitSequence assignment;
  UnitSequence previous;

  for (std::size_t it = 0; it < opts.max_iters; ++it) {
    const double inertia = AssignAll(features, centroids, opts.jobs, assignment);
    if (opts.check_monotone && !result.inertia_history.empty()) {
      const double prev = result.inertia_history.back();
      if (inertia > prev + 1e-9 * std::max(1.0, prev)) {
        Fail(ErrorCode::kInternal, "k-means inertia increased from " + std::to_string(prev) +
                                       " to " + std::to_string(inertia));
      }
    }
    result.inertia_history.push_back(inertia);
    result.iterations = it + 1;
    if (it > 0 && assignment == previous) {
      result.converged = true;
      break;
    }

    RowMatrix sums = RowMatrix::Zero(centroids.rows(), centroids.cols());
    std::vector<std::size_t> counts(opts.k, 0);
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
      const auto a = assignment[static_cast<std::size_t>(i)];
      sums.row(a) += features.row(i);
      ++counts[static_cast<std::size_t>(a)];
    }
    for (std::size_t j = 0; j < opts.k; ++j) {
      if (counts[j] > 0) {
        const auto row = static_cast<Eigen::Index>(j);
        centroids.row(row) = sums.row(row) / static_cast<double>(counts[j]);
      }
    }
    previous.swap(assignment);
  }

  result.codebook.centroids = std::move(centroids);
  result.assignment = KMeansAssign(features, result.codebook);
  return result;
}

UnitSequence KMeansAssign(const FeatureMatrix& features, const Codebook& cb) {
  Require(cb.k() >= 1, ErrorCode::kInvalidArgument, "codebook is empty");
  Require(features.cols() == cb.centroids.cols(), ErrorCode::kInvalidArgument,
          "feature dimension " + std::to_string(features.cols()) +
              " does not match codebook dimension " + std::to_string(cb.dim()));
  UnitSequence out;
  AssignAll(features, cb.centroids, 1, out);
  return out;
}

double Inertia(const FeatureMatrix& features, const Codebook& cb, const UnitSequence& assignment) {
  Require(assignment.size() == static_cast<std::size_t>(features.rows()),
          ErrorCode::kInvalidArgument, "assignment length does not match the feature rows");
  double total = 0.0;
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    total += SquaredDistance(features, i, cb.centroids, assignment[static_cast<std::size_t>(i)]);
  }
  return total;
}

DedupResult Dedup(const UnitSequence& units) {
  DedupResult d;
  for (auto u : units) {
    if (!d.units.empty() && d.units.back() == u) {
      ++d.counts.back();
    } else {
      d.units.push_back(u);
      d.counts.push_back(1);
    }
  }
  return d;
}

UnitSequence Expand(const DedupResult& d) {
  Require(d.units.size() == d.counts.size(), ErrorCode::kInvalidArgument,
          "dedup result has mismatched units/counts lengths");
  UnitSequence out;
  for (std::size_t i = 0; i < d.units.size(); ++i) {
    Require(d.counts[i] > 0, ErrorCode::kInvalidArgument,
            "dedup count at position " + std::to_string(i) + " is not positive");
    out.insert(out.end(), static_cast<std::size_t>(d.counts[i]), d.units[i]);
  }
  return out;
}

// ---------------------------------------------------------------- file I/O

FeatureMatrix LoadFeaturesCsv(const std::string& path) {
  std::istringstream in(ReadTextFile(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    bool ok = true;
    std::stringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      double v = 0.0;
      if (!ParseDouble(field, v)) {
        ok = false;
        break;
      }
      row.push_back(v);
    }
    if (!ok) {
      if (rows.empty() && line_no == 1) continue;  // header
      Fail(ErrorCode::kFormat, path + ":" + std::to_string(line_no) + ": non-numeric field");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      Fail(ErrorCode::kFormat, path + ":" + std::to_string(line_no) + ": expected " +
                                   std::to_string(rows.front().size()) + " columns");
    }
    rows.push_back(std::move(row));
  }
  Require(!rows.empty(), ErrorCode::kFormat, path + ": no feature rows");
  FeatureMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

FeatureMatrix LoadFeaturesBin(const std::string& path) {
  json side;
  try {
    side = json::parse(ReadTextFile(path + ".json"));
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, path + ".json: " + e.what());
  }
  if (!side.is_object() || !side.contains("frames") || !side.contains("dim") ||
      !side["frames"].is_number_unsigned() || !side["dim"].is_number_unsigned()) {
    Fail(ErrorCode::kFormat, path + ".json: sidecar needs unsigned integer `frames` and `dim`");
  }
  const auto frames = side["frames"].get<std::size_t>();
  const auto dim = side["dim"].get<std::size_t>();
  const std::string bytes = ReadTextFile(path);
  Require(bytes.size() == frames * dim * 4, ErrorCode::kFormat,
          path + ": size " + std::to_string(bytes.size()) + " does not match " +
              std::to_string(frames) + " x " + std::to_string(dim) + " float32");
  FeatureMatrix m(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < frames * dim; ++i) {
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + 4 * i);
    const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                               (static_cast<std::uint32_t>(p[2]) << 16) |
                               (static_cast<std::uint32_t>(p[3]) << 24);
    float f;
    std::memcpy(&f, &bits, 4);
    m.data()[i] = static_cast<double>(f);
  }
  return m;
}

void SaveFeaturesBin(const FeatureMatrix& f, const std::string& path) {
  std::string bytes;
  bytes.reserve(static_cast<std::size_t>(f.size()) * 4);
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const auto v = static_cast<float>(f.data()[i]);
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
  }
  WriteTextFile(path, bytes);
  json side = {{"frames", f.rows()}, {"dim", f.cols()}};
  WriteTextFile(path + ".json", side.dump() + "\n");
}

FeatureMatrix LoadFeatures(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos && path.substr(dot) == ".csv") return LoadFeaturesCsv(path);
  return LoadFeaturesBin(path);
}

std::string CodebookToJson(const Codebook& cb) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < cb.centroids.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < cb.centroids.cols(); ++j) row.push_back(cb.centroids(i, j));
    rows.push_back(std::move(row));
  }
  json j = {{"k", cb.k()}, {"dim", cb.dim()}, {"centroids", std::move(rows)}};
  return j.dump() + "\n";
}

Codebook CodebookFromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("codebook: ") + e.what());
  }
  try {
    const auto k = j.at("k").get<std::size_t>();
    const auto dim = j.at("dim").get<std::size_t>();
    const auto& rows = j.at("centroids");
    Require(k >= 1 && rows.is_array() && rows.size() == k, ErrorCode::kFormat,
            "codebook: `centroids` must hold k rows");
    Codebook cb;
    cb.centroids.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < k; ++i) {
      Require(rows[i].is_array() && rows[i].size() == dim, ErrorCode::kFormat,
              "codebook: centroid row " + std::to_string(i) + " does not have `dim` entries");
      for (std::size_t d = 0; d < dim; ++d) {
        cb.centroids(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = rows[i][d].get<double>();
      }
    }
    RequireFinite(cb.centroids, "codebook");
    return cb;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("codebook: ") + e.what());
  }
}

void SaveCodebook(const Codebook& cb, const std::string& path) {
  WriteTextFile(path, CodebookToJson(cb));
}

Codebook LoadCodebook(const std::string& path) {
  return CodebookFromJson(ReadTextFile(path));
}

void SaveUnits(const UnitSequence& u, const std::string& path) {
  std::string out;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (i) out.push_back(' ');
    out += std::to_string(u[i]);
  }
  out.push_back('\n');
  WriteTextFile(path, out);
}

UnitSequence LoadUnits(const std::string& path) {
  std::istringstream in(ReadTextFile(path));
  UnitSequence u;
  std::string tok;
  while (in >> tok) {
    long long v = 0;
    Require(ParseInt(tok, v) && v >= 0 && v <= std::numeric_limits<std::int32_t>::max(),
            ErrorCode::kFormat, path + ": invalid unit `" + tok + "`");
    u.push_back(static_cast<std::int32_t>(v));
  }
  return u;
}

void SaveDedup(const DedupResult& d, const std::string& path) {
  json j = {{"units", d.units}, {"counts", d.counts}};
  WriteTextFile(path, j.dump() + "\n");
}

DedupResult LoadDedup(const std::string& path) {
  try {
    json j = json::parse(ReadTextFile(path));
    DedupResult d;
    d.units = j.at("units").get<UnitSequence>();
    d.counts = j.at("counts").get<std::vector<std::int32_t>>();
    Require(d.units.size() == d.counts.size(), ErrorCode::kFormat,
            path + ": `units` and `counts` differ in length");
    return d;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, path + ": " + e.what());
  }
}

}  // namespace evc
