#include "evc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "evc/error.hpp"
#include "evc/nn.hpp"
#include "json.hpp"

namespace evc {

AlignmentPath DtwAlign(std::span<const double> a, std::span<const double> b) {
  Require(!a.empty() && !b.empty(), ErrorCode::kInvalidArgument, "DTW needs two non-empty sequences");
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<double> acc(n * m);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return acc[i * m + j]; };

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double local = std::abs(a[i] - b[j]);
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else if (i == 0) {
        best = at(0, j - 1);
      } else if (j == 0) {
        best = at(i - 1, 0);
      } else {
        best = std::min({at(i - 1, j - 1), at(i - 1, j), at(i, j - 1)});
      }
      at(i, j) = local + best;
    }
  }

  AlignmentPath path;
  path.cost = at(n - 1, m - 1);
  std::size_t i = n - 1, j = m - 1;
  path.pairs.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      const double diag = at(i - 1, j - 1);
      const double up = at(i - 1, j);
      const double left = at(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    }
    path.pairs.emplace_back(i, j);
  }
  std::reverse(path.pairs.begin(), path.pairs.end());
  return path;
}

double Pearson(std::span<const double> x, std::span<const double> y) {
  Require(x.size() == y.size() && !x.empty(), ErrorCode::kInvalidArgument,
          "Pearson correlation needs two non-empty samples of equal size");
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); });
  };
  // The centred sums of a constant sample can come out as rounding noise
  // rather than zero, so test for it directly.
  Require(!constant(x) && !constant(y), ErrorCode::kUndefined,
          "correlation is undefined: one side has zero variance");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  Require(sxx > 0.0 && syy > 0.0, ErrorCode::kUndefined,
          "correlation is undefined: one side has zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double AlignedPcc(std::span<const double> a, std::span<const double> b, bool drop_zeros) {
  Require(!a.empty() && !b.empty(), ErrorCode::kInvalidArgument, "PCC needs two non-empty contours");
  std::vector<double> fa, fb;
  for (double v : a) {
    if (!drop_zeros || v != 0.0) fa.push_back(v);
  }
  for (double v : b) {
    if (!drop_zeros || v != 0.0) fb.push_back(v);
  }
  Require(!fa.empty() && !fb.empty(), ErrorCode::kUndefined,
          "correlation is undefined: a contour has no voiced frames");
  const auto path = DtwAlign(fa, fb);
  std::vector<double> xs, ys;
  xs.reserve(path.pairs.size());
  ys.reserve(path.pairs.size());
  for (const auto& [i, j] : path.pairs) {
    xs.push_back(fa[i]);
    ys.push_back(fb[j]);
  }
  return Pearson(xs, ys);
}

template <typename T>
std::size_t EditDistance(std::span<const T> ref, std::span<const T> hyp) {
  std::vector<std::size_t> prev(hyp.size() + 1), cur(hyp.size() + 1);
  for (std::size_t j = 0; j <= hyp.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    prev.swap(cur);
  }
  return prev[hyp.size()];
}

template std::size_t EditDistance<std::string>(std::span<const std::string>, std::span<const std::string>);
template std::size_t EditDistance<char32_t>(std::span<const char32_t>, std::span<const char32_t>);
template std::size_t EditDistance<int>(std::span<const int>, std::span<const int>);

namespace {

bool IsSpace(char32_t c) { return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v'; }

// Malformed sequences decode byte-by-byte.
std::u32string DecodeUtf8(std::string_view s) {
  std::u32string out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    char32_t cp = c;
    if (c >= 0xC0 && c < 0xE0) {
      len = 2;
      cp = c & 0x1F;
    } else if (c >= 0xE0 && c < 0xF0) {
      len = 3;
      cp = c & 0x0F;
    } else if (c >= 0xF0 && c < 0xF8) {
      len = 4;
      cp = c & 0x07;
    }
    bool ok = i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      ok = (cc & 0xC0) == 0x80;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (!ok || (len == 1 && c >= 0x80)) {
      out.push_back(c);
      ++i;
    } else {
      out.push_back(cp);
      i += len;
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> SplitWords(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (char ch : text) {
    if (IsSpace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

std::u32string SplitChars(std::string_view text) {
  std::u32string out;
  bool pending_space = false;
  for (char32_t c : DecodeUtf8(text)) {
    if (IsSpace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

double WordErrorRate(std::string_view ref, std::string_view hyp) {
  const auto r = SplitWords(ref);
  const auto h = SplitWords(hyp);
  Require(!r.empty(), ErrorCode::kInvalidArgument, "WER: reference transcript is empty");
  return 100.0 * static_cast<double>(EditDistance<std::string>(r, h)) / static_cast<double>(r.size());
}

double CharacterErrorRate(std::string_view ref, std::string_view hyp) {
  const auto r = SplitChars(ref);
  const auto h = SplitChars(hyp);
  Require(!r.empty(), ErrorCode::kInvalidArgument, "CER: reference transcript is empty");
  return 100.0 * static_cast<double>(EditDistance<char32_t>(std::span<const char32_t>(r.data(), r.size()),
                                                            std::span<const char32_t>(h.data(), h.size()))) /
         static_cast<double>(r.size());
}

double Eecs(std::span<const double> e1, std::span<const double> e2) {
  return nn::CosineSimilarity(e1, e2);
}

MetricReport MeanReport(std::span<const MetricReport> reports) {
  MetricReport out;
  auto mean = [&](std::optional<double> MetricReport::*field) -> std::optional<double> {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : reports) {
      if (r.*field) {
        sum += *(r.*field);
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  };
  out.wer = mean(&MetricReport::wer);
  out.cer = mean(&MetricReport::cer);
  out.eecs = mean(&MetricReport::eecs);
  out.f0_pcc = mean(&MetricReport::f0_pcc);
  out.e_pcc = mean(&MetricReport::e_pcc);
  return out;
}

std::string MetricReportToJson(const MetricReport& r) {
  nlohmann::ordered_json j;
  auto put = [&](const char* key, const std::optional<double>& v) {
    j[key] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  put("wer", r.wer);
  put("cer", r.cer);
  put("eecs", r.eecs);
  put("f0_pcc", r.f0_pcc);
  put("e_pcc", r.e_pcc);
  return j.dump();
}

}  // namespace evc
