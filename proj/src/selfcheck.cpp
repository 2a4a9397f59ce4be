#include "evc/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "evc/error.hpp"
#include "evc/metrics.hpp"
#include "evc/nn.hpp"
#include "evc/prosody.hpp"
#include "evc/random.hpp"
#include "json.hpp"

namespace evc::check {

namespace {

void Walk(std::span<const double> a, std::span<const double> b, std::size_t i, std::size_t j, double acc,
          double& best) {
  acc += std::abs(a[i] - b[j]);
  if (i + 1 == a.size() && j + 1 == b.size()) {
    best = std::min(best, acc);
    return;
  }
  if (i + 1 < a.size()) Walk(a, b, i + 1, j, acc, best);
  if (j + 1 < b.size()) Walk(a, b, i, j + 1, acc, best);
  if (i + 1 < a.size() && j + 1 < b.size()) Walk(a, b, i + 1, j + 1, acc, best);
}

// Solves the (order+1)^2 normal equations by Gaussian elimination.
std::vector<long double> SolveNormal(std::vector<std::vector<long double>> m, std::vector<long double> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
    }
    std::swap(m[c], m[piv]);
    std::swap(rhs[c], rhs[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const long double f = m[r][c] / m[c][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
      rhs[r] -= f * rhs[c];
    }
  }
  std::vector<long double> x(n);
  for (std::size_t c = n; c-- > 0;) {
    long double s = rhs[c];
    for (std::size_t k = c + 1; k < n; ++k) s -= m[c][k] * x[k];
    x[c] = s / m[c][c];
  }
  return x;
}

std::vector<double> Concat(std::initializer_list<std::span<const double>> parts) {
  std::vector<double> out;
  for (auto p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::span<const double> RowSpan(const nn::Mat& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }

nn::Mat RandomMat(Rng& rng, Eigen::Index r, Eigen::Index c) {
  nn::Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.Gaussian();
  return m;
}

void Record(CheckResult& r, double err) {
  r.max_error = std::max(r.max_error, err);
  ++r.cases;
}

CheckResult ProsodyGradientCheck(Rng& rng, std::size_t instances) {
  CheckResult r{"grad_loss_prosody", false, 0.0, kGradientTolerance, 0};
  for (std::size_t it = 0; it < instances; ++it) {
    const auto t = static_cast<std::size_t>(rng.UniformInt(2, 12));
    const auto u = static_cast<std::size_t>(rng.UniformInt(1, 8));
    std::vector<double> f0_hat(t), f0_tgt(t), e_hat(t), e_tgt(t), d_hat(u), d_tgt(u);
    VuvMask vuv;
    for (std::size_t i = 0; i < t; ++i) {
      f0_hat[i] = 5.0 + 0.3 * rng.Gaussian();
      f0_tgt[i] = 5.0 + 0.3 * rng.Gaussian();
      e_hat[i] = rng.Gaussian();
      e_tgt[i] = rng.Gaussian();
      vuv.flags.push_back(rng.Coin() ? 1 : 0);
    }
    for (std::size_t i = 0; i < u; ++i) {
      d_tgt[i] = rng.UniformReal(1.0, 10.0);
      // Keep clear of the |x| kink so central differences stay valid.
      do {
        d_hat[i] = rng.UniformReal(0.0, 12.0);
      } while (std::abs(d_hat[i] - d_tgt[i]) < 1e-3);
    }
    auto f = [&](std::span<const double> x) {
      return nn::LossProsody(x.subspan(0, t), f0_tgt, vuv, x.subspan(t, t), e_tgt, x.subspan(2 * t, u), d_tgt)
          .value;
    };
    const auto x = Concat({f0_hat, e_hat, d_hat});
    const auto l = nn::LossProsody(f0_hat, f0_tgt, vuv, e_hat, e_tgt, d_hat, d_tgt);
    const auto analytic = Concat({l.grad_f0_hat, l.grad_energy_hat, l.grad_dur_hat});
    Record(r, GradientRelativeError(analytic, NumericGradient(f, x)));
  }
  r.passed = r.max_error < r.tolerance;
  return r;
}

CheckResult TripletGradientCheck(Rng& rng, std::size_t instances) {
  CheckResult r{"grad_loss_triplet", false, 0.0, kGradientTolerance, 0};
  for (std::size_t it = 0; it < instances; ++it) {
    const auto n = rng.UniformInt(1, 4);
    const auto d = rng.UniformInt(2, 8);
    nn::Mat a, p, q;
    bool near_kink = true;
    while (near_kink) {
      a = RandomMat(rng, n, d);
      p = RandomMat(rng, n, d);
      q = RandomMat(rng, n, d);
      near_kink = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double h = a.row(i).dot(q.row(i)) / (a.row(i).norm() * q.row(i).norm()) -
                         a.row(i).dot(p.row(i)) / (a.row(i).norm() * p.row(i).norm()) + nn::kTripletMargin;
        near_kink = near_kink || std::abs(h) < 1e-3;
      }
    }
    const auto sz = static_cast<std::size_t>(n * d);
    auto f = [&](std::span<const double> x) {
      auto mat = [&](std::size_t k) {
        return nn::Mat(Eigen::Map<const nn::Mat>(x.data() + k * sz, n, d));
      };
      return nn::LossTriplet(mat(0), mat(1), mat(2)).value;
    };
    const auto l = nn::LossTriplet(a, p, q);
    const auto analytic = Concat({RowSpan(l.grad_anchor), RowSpan(l.grad_positive), RowSpan(l.grad_negative)});
    Record(r, GradientRelativeError(analytic, NumericGradient(f, Concat({RowSpan(a), RowSpan(p), RowSpan(q)}))));
  }
  r.passed = r.max_error < r.tolerance;
  return r;
}

CheckResult CrossEntropyGradientCheck(Rng& rng, std::size_t instances) {
  CheckResult r{"grad_cross_entropy", false, 0.0, kGradientTolerance, 0};
  for (std::size_t it = 0; it < instances; ++it) {
    const auto n = rng.UniformInt(1, 6);
    const auto c = rng.UniformInt(2, 6);
    const nn::Mat logits = 2.0 * RandomMat(rng, n, c);
    std::vector<std::int32_t> labels(static_cast<std::size_t>(n));
    for (auto& y : labels) y = static_cast<std::int32_t>(rng.UniformInt(0, c - 1));
    auto f = [&](std::span<const double> x) {
      return nn::CrossEntropy(Eigen::Map<const nn::Mat>(x.data(), n, c), labels).value;
    };
    const auto l = nn::CrossEntropy(logits, labels);
    const auto x = Concat({RowSpan(logits)});
    Record(r, GradientRelativeError(RowSpan(l.grad_logits), NumericGradient(f, x)));
  }
  r.passed = r.max_error < r.tolerance;
  return r;
}

CheckResult DtwSweep(Rng& rng) {
  CheckResult r{"dtw_bruteforce", false, 0.0, 0.0, 0};
  std::size_t mismatches = 0;
  for (int it = 0; it < 1000; ++it) {
    std::vector<double> a(static_cast<std::size_t>(rng.UniformInt(1, 6)));
    std::vector<double> b(static_cast<std::size_t>(rng.UniformInt(1, 6)));
    for (auto& v : a) v = static_cast<double>(rng.UniformInt(0, 3));
    for (auto& v : b) v = static_cast<double>(rng.UniformInt(0, 3));
    const auto path = DtwAlign(a, b);
    double along = 0.0;
    for (const auto& [i, j] : path.pairs) along += std::abs(a[i] - b[j]);
    const double err = std::max(std::abs(path.cost - BruteForceDtwCost(a, b)), std::abs(along - path.cost));
    if (err != 0.0) ++mismatches;
    Record(r, err);
  }
  r.passed = mismatches == 0;
  return r;
}

CheckResult SavgolPolynomialSuite(Rng& rng) {
  CheckResult r{"savgol_polynomial", false, 0.0, kSavgolTolerance, 0};
  const std::pair<std::size_t, std::size_t> configs[] = {{9, 2}, {5, 0}, {5, 1}, {7, 3}, {11, 4}, {3, 2}};
  for (const auto& [window, order] : configs) {
    for (std::size_t len : {1, 2, 4, 9, 10, 33, 64}) {
      // Monomials t^k and a random polynomial, all of degree <= order.
      for (std::size_t k = 0; k <= order + 1; ++k) {
        std::vector<double> coef(order + 1, 0.0);
        if (k <= order) {
          coef[k] = 1.0;
        } else {
          for (auto& c : coef) c = rng.UniformReal(-2.0, 2.0);
        }
        std::vector<double> y(len);
        for (std::size_t t = 0; t < len; ++t) {
          const double x = static_cast<double>(t) / 8.0;
          double v = 0.0;
          for (std::size_t c = coef.size(); c-- > 0;) v = v * x + coef[c];
          y[t] = v;
        }
        const auto s = SavgolSmooth(y, SavgolParams{window, order});
        double err = 0.0;
        for (std::size_t t = 0; t < len; ++t) err = std::max(err, std::abs(s[t] - y[t]));
        Record(r, err);
      }
    }
  }
  r.passed = r.max_error <= r.tolerance;
  return r;
}

CheckResult SavgolOracleSuite(Rng& rng) {
  CheckResult r{"savgol_oracle", false, 0.0, kSavgolTolerance, 0};
  for (int it = 0; it < 100; ++it) {
    const auto len = static_cast<std::size_t>(rng.UniformInt(1, 200));
    const auto half = static_cast<std::size_t>(rng.UniformInt(1, 6));
    const std::size_t window = 2 * half + 1;
    const auto order = static_cast<std::size_t>(rng.UniformInt(0, static_cast<std::int64_t>(std::min<std::size_t>(window - 1, 4))));
    const double freq = rng.UniformReal(0.01, 0.2);
    std::vector<double> y(len);
    for (std::size_t t = 0; t < len; ++t) {
      y[t] = 3.0 * std::sin(freq * static_cast<double>(t)) + 0.5 * rng.Gaussian();
    }
    const auto got = SavgolSmooth(y, SavgolParams{window, order});
    const auto want = SavgolOracle(y, window, order);
    double err = 0.0;
    for (std::size_t t = 0; t < len; ++t) err = std::max(err, std::abs(got[t] - want[t]));
    Record(r, err);
  }
  r.passed = r.max_error <= r.tolerance;
  return r;
}

}  // namespace

double BruteForceDtwCost(std::span<const double> a, std::span<const double> b) {
  Require(!a.empty() && !b.empty(), ErrorCode::kInvalidArgument, "DTW needs two non-empty sequences");
  double best = std::numeric_limits<double>::infinity();
  Walk(a, b, 0, 0, 0.0, best);
  return best;
}

std::vector<double> SavgolOracle(std::span<const double> values, std::size_t window, std::size_t order) {
  const std::size_t n = values.size();
  Require(n >= 1 && window % 2 == 1 && order < window, ErrorCode::kInvalidArgument,
          "savgol oracle: bad window/order");
  if (n < window) {
    window = n % 2 == 1 ? n : n - 1;
    order = std::min(order, window - 1);
  }
  const std::size_t half = window / 2;
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t start = std::min(t >= half ? t - half : 0, n - window);
    // Fit sum_k c_k x^k with x = j - t, so the value at frame t is c_0.
    std::vector<std::vector<long double>> m(order + 1, std::vector<long double>(order + 1, 0.0L));
    std::vector<long double> rhs(order + 1, 0.0L);
    for (std::size_t j = start; j < start + window; ++j) {
      const long double x = static_cast<long double>(j) - static_cast<long double>(t);
      std::vector<long double> pw(2 * order + 1, 1.0L);
      for (std::size_t k = 1; k < pw.size(); ++k) pw[k] = pw[k - 1] * x;
      for (std::size_t a = 0; a <= order; ++a) {
        rhs[a] += pw[a] * values[j];
        for (std::size_t b = 0; b <= order; ++b) m[a][b] += pw[a + b];
      }
    }
    out[t] = static_cast<double>(SolveNormal(std::move(m), std::move(rhs))[0]);
  }
  return out;
}

std::vector<double> NumericGradient(const std::function<double(std::span<const double>)>& f,
                                    std::vector<double> x, double step) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + step;
    const double up = f(x);
    x[i] = orig - step;
    const double down = f(x);
    x[i] = orig;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

double GradientRelativeError(std::span<const double> analytic, std::span<const double> numeric) {
  Require(analytic.size() == numeric.size(), ErrorCode::kInvalidArgument, "gradient sizes differ");
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(na) + std::sqrt(nn), 1e-12);
}

std::string CheckResultToJson(const CheckResult& r) {
  nlohmann::ordered_json j;
  j["check"] = r.name;
  j["passed"] = r.passed;
  j["max_error"] = r.max_error;
  j["tolerance"] = r.tolerance;
  j["cases"] = r.cases;
  return j.dump();
}

std::vector<CheckResult> RunGradientChecks(std::uint64_t seed, std::size_t instances) {
  Rng rng(seed);
  std::vector<CheckResult> out;
  out.push_back(ProsodyGradientCheck(rng, instances));
  out.push_back(TripletGradientCheck(rng, instances));
  out.push_back(CrossEntropyGradientCheck(rng, instances));
  return out;
}

std::vector<CheckResult> RunOracleChecks(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<CheckResult> out;
  out.push_back(DtwSweep(rng));
  out.push_back(SavgolPolynomialSuite(rng));
  out.push_back(SavgolOracleSuite(rng));
  return out;
}

}  // namespace evc::check
