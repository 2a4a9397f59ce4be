#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "evc/random.hpp"
#include "evc/units.hpp"
#include "test_util.hpp"

namespace evc {
namespace {

using testing::CodeOf;
using testing::TempDir;

FeatureMatrix Blobs(std::size_t clusters, std::size_t per_cluster, std::size_t dim, Rng& rng,
                    RowMatrix* centres_out = nullptr) {
  RowMatrix centres(static_cast<Eigen::Index>(clusters), static_cast<Eigen::Index>(dim));
  for (Eigen::Index c = 0; c < centres.rows(); ++c) {
    for (Eigen::Index j = 0; j < centres.cols(); ++j) centres(c, j) = 0.0;
    centres(c, c % centres.cols()) = 100.0 * static_cast<double>(c + 1);
  }
  FeatureMatrix f(static_cast<Eigen::Index>(clusters * per_cluster), static_cast<Eigen::Index>(dim));
  for (Eigen::Index r = 0; r < f.rows(); ++r) {
    const auto c = r / static_cast<Eigen::Index>(per_cluster);
    for (Eigen::Index j = 0; j < f.cols(); ++j) f(r, j) = centres(c, j) + 0.5 * rng.Gaussian();
  }
  if (centres_out) *centres_out = centres;
  return f;
}

TEST(Dedup, Examples) {
  const auto d = Dedup({5, 5, 5, 2, 2, 7});
  EXPECT_EQ(d.units, (UnitSequence{5, 2, 7}));
  EXPECT_EQ(d.counts, (std::vector<std::int32_t>{3, 2, 1}));
  const auto e = Dedup({});
  EXPECT_TRUE(e.units.empty());
  EXPECT_TRUE(e.counts.empty());
}

TEST(Expand, Examples) {
  EXPECT_EQ(Expand(DedupResult{{5, 2, 7}, {3, 2, 1}}), (UnitSequence{5, 5, 5, 2, 2, 7}));
  EXPECT_TRUE(Expand(DedupResult{}).empty());
  EXPECT_EQ(Expand(DedupResult{{3}, {4}}), (UnitSequence{3, 3, 3, 3}));
}

TEST(Expand, RejectsBadCounts) {
  EXPECT_EQ(CodeOf([] { Expand(DedupResult{{1, 2}, {1, 0}}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { Expand(DedupResult{{1}, {-3}}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { Expand(DedupResult{{1, 2}, {1}}); }), ErrorCode::kInvalidArgument);
}

TEST(Dedup, RoundTripProperty) {
  Rng rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    UnitSequence u(static_cast<std::size_t>(rng.UniformInt(0, 60)));
    for (auto& x : u) x = static_cast<std::int32_t>(rng.UniformInt(0, 4));
    const auto d = Dedup(u);
    EXPECT_EQ(Expand(d), u);
    for (std::size_t i = 1; i < d.units.size(); ++i) EXPECT_NE(d.units[i], d.units[i - 1]);
    for (auto c : d.counts) EXPECT_GE(c, 1);
  }
}

TEST(KMeansFit, TwoPointsTwoClusters) {
  FeatureMatrix f(2, 3);
  f << 1, 2, 3, -4, 5, 6;
  KMeansOptions o;
  o.k = 2;
  const auto r = KMeansFit(f, o);
  EXPECT_DOUBLE_EQ(Inertia(f, r.codebook, r.assignment), 0.0);
  std::set<std::vector<double>> got, want;
  for (Eigen::Index i = 0; i < 2; ++i) {
    got.insert({r.codebook.centroids(i, 0), r.codebook.centroids(i, 1), r.codebook.centroids(i, 2)});
    want.insert({f(i, 0), f(i, 1), f(i, 2)});
  }
  EXPECT_EQ(got, want);
}

TEST(KMeansFit, SingleClusterIsTheMean) {
  Rng rng(3);
  FeatureMatrix f(37, 4);
  for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = rng.Gaussian();
  KMeansOptions o;
  o.k = 1;
  const auto r = KMeansFit(f, o);
  const Eigen::RowVectorXd mean = f.colwise().mean();
  EXPECT_LE((r.codebook.centroids.row(0) - mean).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(KMeansFit, DeterministicAndJobIndependent) {
  Rng rng(4);
  FeatureMatrix f(400, 6);
  for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = rng.Gaussian();
  KMeansOptions o;
  o.k = 12;
  o.seed = 77;
  const auto a = KMeansFit(f, o);
  const auto b = KMeansFit(f, o);
  o.jobs = 4;
  const auto c = KMeansFit(f, o);
  EXPECT_TRUE(a.codebook.centroids == b.codebook.centroids);
  EXPECT_TRUE(a.codebook.centroids == c.codebook.centroids);
  EXPECT_EQ(a.assignment, c.assignment);
  EXPECT_EQ(a.inertia_history, c.inertia_history);
}

TEST(KMeansFit, InsufficientData) {
  FeatureMatrix f = FeatureMatrix::Zero(3, 2);
  KMeansOptions o;
  o.k = 4;
  EXPECT_EQ(CodeOf([&] { KMeansFit(f, o); }), ErrorCode::kInsufficientData);
}

TEST(KMeansFit, InertiaNeverIncreases) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    FeatureMatrix f(200, 3);
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = rng.Gaussian();
    KMeansOptions o;
    o.k = static_cast<std::size_t>(rng.UniformInt(2, 20));
    o.seed = static_cast<std::uint64_t>(trial);
    o.check_monotone = true;
    const auto r = KMeansFit(f, o);
    ASSERT_FALSE(r.inertia_history.empty());
    for (std::size_t i = 1; i < r.inertia_history.size(); ++i) {
      EXPECT_LE(r.inertia_history[i], r.inertia_history[i - 1]);
    }
  }
}

TEST(KMeansFit, RecoversSeparatedBlobs) {
  Rng rng(6);
  RowMatrix centres;
  const auto f = Blobs(5, 40, 4, rng, &centres);
  KMeansOptions o;
  o.k = 5;
  const auto r = KMeansFit(f, o);
  // Every blob maps to a single unit and no two blobs share one.
  std::set<std::int32_t> used;
  for (std::size_t c = 0; c < 5; ++c) {
    const auto u = r.assignment[c * 40];
    for (std::size_t i = 0; i < 40; ++i) EXPECT_EQ(r.assignment[c * 40 + i], u);
    used.insert(u);
    EXPECT_LE((r.codebook.centroids.row(u) - centres.row(static_cast<Eigen::Index>(c))).norm(), 1.0);
  }
  EXPECT_EQ(used.size(), 5u);
}

TEST(KMeansAssign, ExactMatchTiesAndRange) {
  Codebook cb;
  cb.centroids = RowMatrix(6, 2);
  cb.centroids << 10, 10, 20, 20, 0, 1, 30, 30, 40, 40, 0, -1;
  EXPECT_EQ(KMeansAssign(cb.centroids, cb), (UnitSequence{0, 1, 2, 3, 4, 5}));
  FeatureMatrix mid(1, 2);
  mid << 0, 0;
  EXPECT_EQ(KMeansAssign(mid, cb), UnitSequence{2});

  Rng rng(7);
  FeatureMatrix f(100, 2);
  for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = 50.0 * rng.Gaussian();
  for (auto u : KMeansAssign(f, cb)) {
    EXPECT_GE(u, 0);
    EXPECT_LT(u, 6);
  }
  EXPECT_EQ(CodeOf([&] { KMeansAssign(FeatureMatrix::Zero(2, 3), cb); }), ErrorCode::kInvalidArgument);
}

TEST(UnitFiles, FeatureCsvAndBinary) {
  TempDir dir;
  {
    std::ofstream f(dir / "feat.csv");
    f << "a,b,c\n1,2,3\n4.5,-6,7e2\n";
  }
  const auto csv = LoadFeatures(dir / "feat.csv");
  ASSERT_EQ(csv.rows(), 2);
  ASSERT_EQ(csv.cols(), 3);
  EXPECT_EQ(csv(1, 2), 700.0);

  FeatureMatrix m(3, 2);
  m << 0.5, -1.25, 3, 4, 1e-3, 7;
  SaveFeaturesBin(m, dir / "feat.f32");
  const auto back = LoadFeatures(dir / "feat.f32");
  ASSERT_EQ(back.rows(), 3);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    EXPECT_EQ(back.data()[i], static_cast<double>(static_cast<float>(m.data()[i])));
  }
  {
    std::ofstream f(dir / "bad.csv");
    f << "1,2\n3\n";
  }
  EXPECT_EQ(CodeOf([&] { LoadFeatures(dir / "bad.csv"); }), ErrorCode::kFormat);
  EXPECT_EQ(CodeOf([&] { LoadFeatures(dir / "nope.f32"); }), ErrorCode::kIo);
}

TEST(UnitFiles, CodebookUnitsAndRuns) {
  TempDir dir;
  Codebook cb;
  cb.centroids = RowMatrix(2, 3);
  cb.centroids << 0.1, 0.2, 0.3, -1e10, 5e-300, 7;
  SaveCodebook(cb, dir / "cb.json");
  EXPECT_TRUE(LoadCodebook(dir / "cb.json").centroids == cb.centroids);

  const UnitSequence u = {4, 4, 0, 1, 1, 1};
  SaveUnits(u, dir / "u.txt");
  EXPECT_EQ(LoadUnits(dir / "u.txt"), u);

  SaveDedup(Dedup(u), dir / "runs.json");
  const auto d = LoadDedup(dir / "runs.json");
  EXPECT_EQ(Expand(d), u);

  {
    std::ofstream f(dir / "bad.txt");
    f << "1 2 x";
  }
  EXPECT_EQ(CodeOf([&] { LoadUnits(dir / "bad.txt"); }), ErrorCode::kFormat);
  {
    std::ofstream f(dir / "bad.json");
    f << "{\"k\": 2}";
  }
  EXPECT_EQ(CodeOf([&] { LoadCodebook(dir / "bad.json"); }), ErrorCode::kFormat);
}

}  // namespace
}  // namespace evc
