#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <set>
#include <string>

#include "json.hpp"
#include "test_util.hpp"

namespace {

using evc::testing::Pcm16;
using evc::testing::TempDir;
using evc::testing::WriteRawWav;
using nlohmann::json;

// Runs the CLI with stdout/stderr captured into files under `dir`.
int RunCli(const TempDir& dir, const std::string& args) {
  const std::string cmd = std::string("'") + EVC_CLI_PATH + "' " + args + " >'" + (dir / "stdout") + "' 2>'" +
                          (dir / "stderr") + "'";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string Slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void Tone(const std::string& path, double hz, double seconds = 1.0) {
  std::vector<std::int16_t> pcm(static_cast<std::size_t>(seconds * 16000));
  for (std::size_t i = 0; i < pcm.size(); ++i) {
    pcm[i] = static_cast<std::int16_t>(std::lround(12000.0 * std::sin(2.0 * M_PI * hz * i / 16000.0)));
  }
  WriteRawWav(path, 1, 16, 1, 16000, Pcm16(pcm));
}

TEST(Cli, ExtractTone) {
  TempDir d;
  Tone(d / "a.wav", 220.0);
  ASSERT_EQ(RunCli(d, "extract '" + (d / "a.wav") + "' -o '" + (d / "a.json") + "'"), 0) << Slurp(d / "stderr");
  const auto j = json::parse(Slurp(d / "a.json"));
  std::vector<double> voiced;
  const auto& vuv = j.at("vuv");
  for (std::size_t t = 0; t < vuv.size(); ++t) {
    if (vuv[t] == 1) voiced.push_back(j.at("f0")[t].get<double>());
  }
  EXPECT_GE(voiced.size(), static_cast<std::size_t>(0.95 * vuv.size()));
  const double med = evc::testing::Median(voiced);
  EXPECT_GE(med, 218.0);
  EXPECT_LE(med, 222.0);
}

TEST(Cli, ExtractSilence) {
  TempDir d;
  WriteRawWav(d / "s.wav", 1, 16, 1, 16000, Pcm16(std::vector<std::int16_t>(16000, 0)));
  ASSERT_EQ(RunCli(d, "extract '" + (d / "s.wav") + "' -o '" + (d / "s.json") + "'"), 0);
  for (const auto& v : json::parse(Slurp(d / "s.json")).at("vuv")) EXPECT_EQ(v, 0);
}

TEST(Cli, MissingInputExitsTwoWithoutOutput) {
  TempDir d;
  EXPECT_EQ(RunCli(d, "extract '" + (d / "nope.wav") + "' -o '" + (d / "out.json") + "'"), 2);
  EXPECT_FALSE(std::filesystem::exists(d / "out.json"));
  EXPECT_FALSE(Slurp(d / "stderr").empty());
}

TEST(Cli, BadUsageExitsTwo) {
  TempDir d;
  EXPECT_EQ(RunCli(d, "extract"), 2);
  EXPECT_EQ(RunCli(d, "frobnicate"), 2);
}

TEST(Cli, CorruptBundleIsASchemaError) {
  TempDir d;
  {
    std::ofstream f(d / "bad.json");
    f << "{\"schema\": 1}";
  }
  EXPECT_EQ(RunCli(d, "augment '" + (d / "bad.json") + "' --seed 1 -o '" + (d / "o.json") + "'"), 2);
  EXPECT_FALSE(std::filesystem::exists(d / "o.json"));
}

TEST(Cli, AugmentIsSeeded) {
  TempDir d;
  Tone(d / "a.wav", 180.0);
  ASSERT_EQ(RunCli(d, "extract '" + (d / "a.wav") + "' -o '" + (d / "a.json") + "'"), 0);
  ASSERT_EQ(RunCli(d, "augment '" + (d / "a.json") + "' --seed 3 -o '" + (d / "x.json") + "'"), 0);
  ASSERT_EQ(RunCli(d, "--seed 3 augment '" + (d / "a.json") + "' -o '" + (d / "y.json") + "'"), 0);
  EXPECT_EQ(Slurp(d / "x.json"), Slurp(d / "y.json"));
  EXPECT_EQ(json::parse(Slurp(d / "x.json")).at("meta").at("seed"), 3);

  ASSERT_EQ(RunCli(d, "augment '" + (d / "a.json") + "' -o '" + (d / "z.json") + "'"), 0);
  const auto z = json::parse(Slurp(d / "z.json"));
  ASSERT_TRUE(z.at("meta").contains("seed"));
  const auto seed = z.at("meta").at("seed").get<std::uint64_t>();
  ASSERT_EQ(RunCli(d, "augment '" + (d / "a.json") + "' --seed " + std::to_string(seed) + " -o '" + (d / "w.json") +
                       "'"),
            0);
  EXPECT_EQ(Slurp(d / "z.json"), Slurp(d / "w.json"));
}

TEST(Cli, UnitsRoundTrip) {
  TempDir d;
  {
    std::ofstream f(d / "three.csv");
    f << "0,0\n10,0\n0,10\n";
  }
  ASSERT_EQ(RunCli(d, "units fit '" + (d / "three.csv") + "' --k 3 -o '" + (d / "cb.json") + "'"), 0)
      << Slurp(d / "stderr");
  const auto cb = json::parse(Slurp(d / "cb.json"));
  std::set<std::vector<double>> rows;
  for (const auto& r : cb.at("centroids")) rows.insert(r.get<std::vector<double>>());
  EXPECT_EQ(rows, (std::set<std::vector<double>>{{0, 0}, {10, 0}, {0, 10}}));

  EXPECT_EQ(RunCli(d, "units fit '" + (d / "three.csv") + "' --k 4 -o '" + (d / "cb4.json") + "'"), 2);
  EXPECT_NE(Slurp(d / "stderr").find("insufficient"), std::string::npos) << Slurp(d / "stderr");
  EXPECT_FALSE(std::filesystem::exists(d / "cb4.json"));

  {
    std::ofstream f(d / "frames.csv");
    for (int i = 0; i < 12; ++i) f << (i < 5 ? "0.1,0" : i < 9 ? "9.9,0.2" : "0,10.1") << "\n";
  }
  ASSERT_EQ(RunCli(d, "units encode '" + (d / "frames.csv") + "' --codebook '" + (d / "cb.json") + "' -o '" +
                       (d / "u.txt") + "'"),
            0);
  ASSERT_EQ(RunCli(d, "units dedup '" + (d / "u.txt") + "' -o '" + (d / "runs.json") + "'"), 0);
  ASSERT_EQ(RunCli(d, "units expand '" + (d / "runs.json") + "' -o '" + (d / "u2.txt") + "'"), 0);
  EXPECT_EQ(Slurp(d / "u.txt"), Slurp(d / "u2.txt"));
  EXPECT_EQ(json::parse(Slurp(d / "runs.json")).at("counts"), json::parse("[5,4,3]"));
}

TEST(Cli, EvalIdenticalBundles) {
  TempDir d;
  Tone(d / "a.wav", 150.0);
  ASSERT_EQ(RunCli(d, "extract '" + (d / "a.wav") + "' -o '" + (d / "a.json") + "'"), 0);
  ASSERT_EQ(RunCli(d, "eval --ref '" + (d / "a.json") + "' --hyp '" + (d / "a.json") +
                       "' --ref-text 'the same words' --hyp-text 'the same words'"),
            0);
  const auto j = json::parse(Slurp(d / "stdout"));
  EXPECT_DOUBLE_EQ(j.at("f0_pcc").get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(j.at("e_pcc").get<double>(), 1.0);
  EXPECT_EQ(j.at("wer"), 0.0);
  EXPECT_EQ(j.at("cer"), 0.0);
  EXPECT_TRUE(j.at("eecs").is_null());
}

TEST(Cli, EvalZeroVarianceIsNullWithWarning) {
  TempDir d;
  Tone(d / "a.wav", 150.0);
  WriteRawWav(d / "s.wav", 1, 16, 1, 16000, Pcm16(std::vector<std::int16_t>(16000, 0)));
  ASSERT_EQ(RunCli(d, "extract '" + (d / "a.wav") + "' '" + (d / "s.wav") + "' --out-dir '" + d.path().string() + "'"), 0);
  ASSERT_EQ(RunCli(d, "eval --ref '" + (d / "a.json") + "' --hyp '" + (d / "s.json") + "'"), 0);
  const auto j = json::parse(Slurp(d / "stdout"));
  EXPECT_TRUE(j.at("f0_pcc").is_null());
  EXPECT_NE(Slurp(d / "stderr").find("f0_pcc"), std::string::npos);
}

TEST(Cli, EvalBatchSummary) {
  TempDir d;
  Tone(d / "a.wav", 150.0);
  Tone(d / "b.wav", 250.0);
  ASSERT_EQ(RunCli(d, "extract '" + (d / "a.wav") + "' '" + (d / "b.wav") + "' --out-dir '" + d.path().string() + "'"), 0);
  {
    std::ofstream f(d / "pairs.txt");
    f << "# ref hyp\n" << (d / "a.json") << " " << (d / "a.json") << "\n" << (d / "b.json") << " " << (d / "b.json")
      << "\n";
  }
  ASSERT_EQ(RunCli(d, "eval --pairs '" + (d / "pairs.txt") + "' -o '" + (d / "report.jsonl") + "' --jobs 2"), 0)
      << Slurp(d / "stderr");
  std::ifstream f(d / "report.jsonl");
  std::vector<json> lines;
  for (std::string line; std::getline(f, line);) lines.push_back(json::parse(line));
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[2].at("summary"), true);
  EXPECT_EQ(lines[2].at("count"), 2);
}

TEST(Cli, CheckPasses) {
  TempDir d;
  EXPECT_EQ(RunCli(d, "check"), 0) << Slurp(d / "stdout");
  std::istringstream out(Slurp(d / "stdout"));
  int n = 0;
  for (std::string line; std::getline(out, line);) {
    if (line.empty() || line[0] != '{') continue;
    EXPECT_TRUE(json::parse(line).at("passed").get<bool>()) << line;
    ++n;
  }
  EXPECT_EQ(n, 6);
}

}  // namespace
