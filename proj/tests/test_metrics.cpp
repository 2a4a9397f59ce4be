#include <gtest/gtest.h>

#include <cmath>

#include "evc/metrics.hpp"
#include "evc/random.hpp"
#include "evc/selfcheck.hpp"
#include "test_util.hpp"

namespace evc {
namespace {

using testing::CodeOf;

using Path = std::vector<std::pair<std::size_t, std::size_t>>;

TEST(DtwAlign, IdenticalIsDiagonal) {
  const std::vector<double> a = {1, 5, 2, 2, 8};
  const auto p = DtwAlign(a, a);
  EXPECT_EQ(p.cost, 0.0);
  EXPECT_EQ(p.pairs, (Path{{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}}));
}

TEST(DtwAlign, SingleAgainstRun) {
  const auto p = DtwAlign(std::vector<double>{0}, std::vector<double>{1, 1, 1});
  EXPECT_EQ(p.cost, 3.0);
  EXPECT_EQ(p.pairs, (Path{{0, 0}, {0, 1}, {0, 2}}));
}

TEST(DtwAlign, EmptyInput) {
  EXPECT_EQ(CodeOf([] { DtwAlign(std::vector<double>{}, std::vector<double>{1}); }), ErrorCode::kInvalidArgument);
}

TEST(DtwAlign, SymmetricCostAndValidPath) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(static_cast<std::size_t>(rng.UniformInt(1, 30)));
    std::vector<double> b(static_cast<std::size_t>(rng.UniformInt(1, 30)));
    for (auto& x : a) x = rng.Gaussian();
    for (auto& x : b) x = rng.Gaussian();
    const auto ab = DtwAlign(a, b);
    const auto ba = DtwAlign(b, a);
    EXPECT_NEAR(ab.cost, ba.cost, 1e-12);
    ASSERT_EQ(ab.pairs.front(), (std::pair<std::size_t, std::size_t>{0, 0}));
    ASSERT_EQ(ab.pairs.back(), (std::pair<std::size_t, std::size_t>{a.size() - 1, b.size() - 1}));
    double sum = std::abs(a[0] - b[0]);
    for (std::size_t k = 1; k < ab.pairs.size(); ++k) {
      const auto di = ab.pairs[k].first - ab.pairs[k - 1].first;
      const auto dj = ab.pairs[k].second - ab.pairs[k - 1].second;
      EXPECT_TRUE(di <= 1 && dj <= 1 && di + dj >= 1);
      sum += std::abs(a[ab.pairs[k].first] - b[ab.pairs[k].second]);
    }
    EXPECT_NEAR(sum, ab.cost, 1e-9);
  }
}

TEST(DtwAlign, MatchesExhaustiveEnumeration) {
  Rng rng(2);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> a(static_cast<std::size_t>(rng.UniformInt(1, 6)));
    std::vector<double> b(static_cast<std::size_t>(rng.UniformInt(1, 6)));
    for (auto& x : a) x = static_cast<double>(rng.UniformInt(0, 3));
    for (auto& x : b) x = static_cast<double>(rng.UniformInt(0, 3));
    EXPECT_EQ(DtwAlign(a, b).cost, check::BruteForceDtwCost(a, b));
  }
}

TEST(Pearson, Basics) {
  const std::vector<double> a = {1, 4, 2, 8, 5};
  EXPECT_NEAR(Pearson(a, a), 1.0, 1e-12);
  std::vector<double> neg;
  for (double x : a) neg.push_back(10.0 - x);
  EXPECT_NEAR(Pearson(a, neg), -1.0, 1e-12);
  EXPECT_EQ(CodeOf([&] { Pearson(a, std::vector<double>(5, 3.0)); }), ErrorCode::kUndefined);
}

TEST(AlignedPcc, SelfAndAnticorrelated) {
  const std::vector<double> a = {1, 3, 2, 6, 4, 5};
  EXPECT_NEAR(AlignedPcc(a, a, false), 1.0, 1e-12);
  // DTW re-pairs most reflected contours; this one keeps the diagonal.
  const std::vector<double> up = {0, 1}, down = {1, 0};
  EXPECT_EQ(DtwAlign(up, down).pairs, (Path{{0, 0}, {1, 1}}));
  EXPECT_NEAR(AlignedPcc(up, down, false), -1.0, 1e-12);
}

TEST(AlignedPcc, HandComputedSmallPair) {
  // Path (0,0) (1,1) (2,1): x = [0 2 1], y = [0 1 1], r = sqrt(3) / 2.
  const std::vector<double> a = {0, 2, 1};
  const std::vector<double> b = {0, 1};
  EXPECT_EQ(DtwAlign(a, b).pairs, (Path{{0, 0}, {1, 1}, {2, 1}}));
  EXPECT_NEAR(AlignedPcc(a, b, false), std::sqrt(3.0) / 2.0, 1e-12);
}

TEST(AlignedPcc, DropsZerosForF0) {
  const std::vector<double> a = {0, 100, 120, 0, 140, 130, 0};
  const std::vector<double> b = {100, 120, 140, 130};
  EXPECT_NEAR(AlignedPcc(a, b, true), 1.0, 1e-12);
  EXPECT_EQ(CodeOf([&] { AlignedPcc(std::vector<double>{0, 0}, b, true); }), ErrorCode::kUndefined);
  EXPECT_EQ(CodeOf([&] { AlignedPcc(std::vector<double>{5, 5, 5}, b, false); }), ErrorCode::kUndefined);
}

TEST(AlignedPcc, SelfCorrelationProperty) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(static_cast<std::size_t>(rng.UniformInt(2, 200)));
    for (auto& x : a) x = rng.Gaussian();
    EXPECT_NEAR(AlignedPcc(a, a, false), 1.0, 1e-12);
  }
}

TEST(WordErrorRate, CanonicalCases) {
  EXPECT_EQ(WordErrorRate("the cat sat", "the cat sat"), 0.0);
  EXPECT_NEAR(WordErrorRate("a b c", "a c"), 100.0 / 3.0, 1e-12);
  EXPECT_EQ(WordErrorRate("one two three four", ""), 100.0);
  EXPECT_DOUBLE_EQ(WordErrorRate("w1 w2 w3 w4 w5", "w1 w2 x w4 w5"), 20.0);
  EXPECT_DOUBLE_EQ(WordErrorRate("a b", "a b c d"), 100.0);
  EXPECT_EQ(WordErrorRate("  spaced   out\ttext ", "spaced out text"), 0.0);
  EXPECT_EQ(CodeOf([] { WordErrorRate("", "a"); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { WordErrorRate("   ", "a"); }), ErrorCode::kInvalidArgument);
}

TEST(CharacterErrorRate, CodePointsAndWhitespace) {
  EXPECT_EQ(CharacterErrorRate("héllo", "héllo"), 0.0);
  EXPECT_DOUBLE_EQ(CharacterErrorRate("héllo", "hello"), 20.0);
  EXPECT_EQ(CharacterErrorRate("a  b", " a b "), 0.0);
  EXPECT_DOUBLE_EQ(CharacterErrorRate("abcd", ""), 100.0);
  EXPECT_EQ(SplitChars("日本 語").size(), 4u);
}

TEST(EditDistance, Classic) {
  const auto k = SplitChars("kitten"), s = SplitChars("sitting");
  EXPECT_EQ(EditDistance<char32_t>(std::span<const char32_t>(k), std::span<const char32_t>(s)), 3u);
}

TEST(Eecs, Examples) {
  const std::vector<double> e = {0.3, -1.2, 2.0, 0.5};
  std::vector<double> twice;
  for (double x : e) twice.push_back(2.0 * x);
  EXPECT_DOUBLE_EQ(Eecs(e, e), 1.0);
  EXPECT_DOUBLE_EQ(Eecs(e, twice), 1.0);
  EXPECT_EQ(Eecs(std::vector<double>{1, 0}, std::vector<double>{0, 2}), 0.0);
  EXPECT_EQ(CodeOf([&] { Eecs(e, std::vector<double>(4, 0.0)); }), ErrorCode::kDegenerate);
}

TEST(MetricReport, MeanAndJson) {
  MetricReport a, b;
  a.wer = 10.0;
  a.f0_pcc = 0.5;
  b.wer = 20.0;
  const std::vector<MetricReport> rs = {a, b};
  const auto m = MeanReport(rs);
  EXPECT_EQ(*m.wer, 15.0);
  EXPECT_EQ(*m.f0_pcc, 0.5);
  EXPECT_FALSE(m.cer.has_value());
  EXPECT_EQ(MetricReportToJson(a), R"({"wer":10.0,"cer":null,"eecs":null,"f0_pcc":0.5,"e_pcc":null})");
}

}  // namespace
}  // namespace evc
