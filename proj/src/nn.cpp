#include "evc/nn.hpp"

#include <algorithm>
#include <cmath>

#include "evc/augment.hpp"
#include "evc/error.hpp"

namespace evc::nn {

namespace {

Mat RandomMat(Eigen::Index rows, Eigen::Index cols, Rng& rng, double stddev) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = stddev * rng.Gaussian();
  return m;
}

Vec RandomVec(Eigen::Index n, Rng& rng, double stddev) {
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = stddev * rng.Gaussian();
  return v;
}

void RequireFinite(const Mat& m, const char* what) {
  Require(m.allFinite(), ErrorCode::kInvalidArgument, std::string(what) + " contains non-finite values");
}

void RowSoftmaxInPlace(Mat& s) {
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    auto row = s.row(i);
    const double m = row.maxCoeff();
    row = (row.array() - m).exp().matrix();
    row /= row.sum();
  }
}

double Softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

std::string ShapeOf(const Mat& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Mat EmbedUnits(std::span<const std::int32_t> units, const EmbeddingTable& table) {
  const Eigen::Index k = table.weights.rows();
  Mat out(static_cast<Eigen::Index>(units.size()), table.weights.cols());
  for (std::size_t t = 0; t < units.size(); ++t) {
    const auto u = units[t];
    Require(u >= 0 && u < k, ErrorCode::kLookup,
            "unit " + std::to_string(u) + " at position " + std::to_string(t) +
                " is outside the embedding table of " + std::to_string(k) + " rows");
    out.row(static_cast<Eigen::Index>(t)) = table.weights.row(u);
  }
  return out;
}

void AttentionParams::Validate() const {
  const Eigen::Index d = wq.rows();
  Require(d > 0, ErrorCode::kInvalidArgument, "attention: empty projections");
  for (const Mat* m : {&wq, &wk, &wv, &wo}) {
    Require(m->rows() == d && m->cols() == d, ErrorCode::kInvalidArgument,
            "attention: projections must all be " + std::to_string(d) + "x" + std::to_string(d));
    RequireFinite(*m, "attention projection");
  }
}

AttentionParams AttentionParams::Identity(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  const Mat eye = Mat::Identity(d, d);
  return {eye, eye, eye, eye};
}

AttentionParams AttentionParams::Random(std::size_t dim, Rng& rng, double stddev) {
  const auto d = static_cast<Eigen::Index>(dim);
  AttentionParams p;
  p.wq = RandomMat(d, d, rng, stddev);
  p.wk = RandomMat(d, d, rng, stddev);
  p.wv = RandomMat(d, d, rng, stddev);
  p.wo = RandomMat(d, d, rng, stddev);
  return p;
}

AttentionOutput CrossAttention(const Mat& query_in, const Mat& kv_in, const AttentionParams& p) {
  p.Validate();
  const Eigen::Index d = p.wq.rows();
  Require(query_in.cols() == d && kv_in.cols() == d, ErrorCode::kInvalidArgument,
          "attention: inputs " + ShapeOf(query_in) + " and " + ShapeOf(kv_in) +
              " do not match model dimension " + std::to_string(d));
  Require(kv_in.rows() >= 1, ErrorCode::kInvalidArgument, "attention: key/value sequence is empty");

  const Mat q = query_in * p.wq;
  const Mat k = kv_in * p.wk;
  const Mat v = kv_in * p.wv;
  AttentionOutput out;
  out.weights = (q * k.transpose()) / std::sqrt(static_cast<double>(d));
  RowSoftmaxInPlace(out.weights);
  out.output = (out.weights * v) * p.wo;
  return out;
}

Mat ProjectionBlock(const Mat& x, const ProjectionParams& p) {
  Require(x.cols() == p.weight.rows() && p.bias.size() == p.weight.cols(),
          ErrorCode::kInvalidArgument, "projection block: shape mismatch");
  Mat y = x * p.weight;
  y.rowwise() += p.bias.transpose();
  switch (p.activation) {
    case Activation::kIdentity:
      break;
    case Activation::kTanh:
      y = y.array().tanh().matrix();
      break;
    case Activation::kRelu:
      y = y.cwiseMax(0.0);
      break;
  }
  return y;
}

Mat GrlForward(const Mat& x) { return x; }

Mat GrlBackward(const Mat& upstream, double lambda) { return -lambda * upstream; }

Mat ScalarProjection::Apply(std::span<const double> values) const {
  Require(weight.size() == bias.size() && weight.size() > 0, ErrorCode::kInvalidArgument,
          "scalar projection: weight and bias sizes differ");
  Mat out(static_cast<Eigen::Index>(values.size()), weight.size());
  for (std::size_t t = 0; t < values.size(); ++t) {
    out.row(static_cast<Eigen::Index>(t)) = (values[t] * weight + bias).transpose();
  }
  return out;
}

FeInputParams FeInputParams::Random(std::size_t dim, Rng& rng, double stddev) {
  const auto d = static_cast<Eigen::Index>(dim);
  FeInputParams p;
  p.f0 = {RandomVec(d, rng, stddev), RandomVec(d, rng, stddev)};
  p.energy = {RandomVec(d, rng, stddev), RandomVec(d, rng, stddev)};
  p.vuv_table = RandomMat(2, d, rng, stddev);
  return p;
}

Mat AssembleFeInput(const Contour& f0, const Contour& energy, const Mat& content,
                    const VuvMask& vuv, const FeInputParams& p) {
  Require(!f0.empty() && content.rows() > 0 && vuv.size() > 0, ErrorCode::kInvalidArgument,
          "FE input: contours, content and VUV mask must be non-empty");
  Require(f0.size() == energy.size(), ErrorCode::kInvalidArgument,
          "FE input: reference F0 and energy differ in length");
  Require(static_cast<std::size_t>(content.rows()) == vuv.size(), ErrorCode::kInvalidArgument,
          "FE input: content and VUV mask differ in length");
  const Eigen::Index d = content.cols();
  Require(p.vuv_table.rows() == 2 && p.vuv_table.cols() == d && p.f0.weight.size() == d &&
              p.energy.weight.size() == d,
          ErrorCode::kInvalidArgument, "FE input: projection dimensions do not match the content");

  const std::size_t target = vuv.size();
  const auto f0_r = f0.size() == target ? f0.values : ResampleLinear(f0.values, target);
  const auto en_r = energy.size() == target ? energy.values : ResampleLinear(energy.values, target);

  Mat out = p.f0.Apply(f0_r) + p.energy.Apply(en_r) + content;
  for (std::size_t t = 0; t < target; ++t) {
    out.row(static_cast<Eigen::Index>(t)) += p.vuv_table.row(vuv.flags[t] ? 1 : 0);
  }
  return out;
}

DurationInputParams DurationInputParams::Random(std::size_t dim, Rng& rng, double stddev) {
  const auto d = static_cast<Eigen::Index>(dim);
  return {{RandomVec(d, rng, stddev), RandomVec(d, rng, stddev)}};
}

Mat AssembleDurationInput(const Mat& unique_unit_embeddings, const Contour& smoothed_durations,
                          const Mat& emotion, const DurationInputParams& p) {
  Require(unique_unit_embeddings.rows() > 0 && !smoothed_durations.empty() && emotion.rows() > 0,
          ErrorCode::kInvalidArgument, "duration input: inputs must be non-empty");
  const Eigen::Index d = unique_unit_embeddings.cols();
  Require(emotion.cols() == d && p.duration.weight.size() == d, ErrorCode::kInvalidArgument,
          "duration input: dimensions do not match");
  const auto u = static_cast<std::size_t>(unique_unit_embeddings.rows());
  const auto dur = smoothed_durations.size() == u ? smoothed_durations.values
                                                  : ResampleLinear(smoothed_durations.values, u);
  Mat out = unique_unit_embeddings + p.duration.Apply(dur);
  const Eigen::RowVectorXd pooled = emotion.colwise().mean();
  out.rowwise() += pooled;
  return out;
}

Mat Conv1dForward(const Mat& x, const Conv1d& conv) {
  Require(conv.kernel() >= 1 && conv.kernel() % 2 == 1, ErrorCode::kInvalidArgument,
          "conv1d: kernel width must be odd");
  Require(static_cast<std::size_t>(x.cols()) == conv.in_dim(), ErrorCode::kInvalidArgument,
          "conv1d: input has " + std::to_string(x.cols()) + " channels, expected " +
              std::to_string(conv.in_dim()));
  const Eigen::Index t_len = x.rows();
  const auto half = static_cast<Eigen::Index>(conv.kernel() / 2);
  Mat out(t_len, conv.bias.size());
  out.rowwise() = conv.bias.transpose();
  for (std::size_t k = 0; k < conv.kernel(); ++k) {
    const Eigen::Index off = static_cast<Eigen::Index>(k) - half;
    const Eigen::Index lo = std::max<Eigen::Index>(0, -off);
    const Eigen::Index hi = std::min(t_len, t_len - off);
    if (hi <= lo) continue;
    out.middleRows(lo, hi - lo) += x.middleRows(lo + off, hi - lo) * conv.taps[k];
  }
  return out;
}

Mat LayerNormForward(const Mat& x, const LayerNorm& ln) {
  Require(ln.gamma.size() == x.cols() && ln.beta.size() == x.cols(), ErrorCode::kInvalidArgument,
          "layer norm: parameter size does not match the input width");
  Mat y(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mean = x.row(i).mean();
    const double var = (x.row(i).array() - mean).square().mean();
    const double inv = 1.0 / std::sqrt(var + ln.eps);
    y.row(i) = ((x.row(i).array() - mean) * inv * ln.gamma.transpose().array() +
                ln.beta.transpose().array())
                   .matrix();
  }
  return y;
}

std::size_t PredictorParams::dim() const {
  return static_cast<std::size_t>(head_weight.rows());
}

void PredictorParams::Validate() const {
  Require(!blocks.empty(), ErrorCode::kInvalidArgument, "predictor: no blocks");
  const Eigen::Index d = head_weight.rows();
  const Eigen::Index outs = head == PredictorHead::kFe ? 2 : 1;
  Require(head_weight.cols() == outs && head_bias.size() == outs, ErrorCode::kInvalidArgument,
          "predictor: head must produce " + std::to_string(outs) + " outputs");
  RequireFinite(head_weight, "predictor head");
  for (const auto& b : blocks) {
    b.attention.Validate();
    Require(b.attention.wq.rows() == d, ErrorCode::kInvalidArgument,
            "predictor: attention width differs from the head width");
    Require(b.conv1.in_dim() == static_cast<std::size_t>(d) &&
                b.conv2.out_dim() == static_cast<std::size_t>(d) &&
                b.conv2.in_dim() == b.conv1.out_dim(),
            ErrorCode::kInvalidArgument, "predictor: convolution channels are inconsistent");
    for (const auto* conv : {&b.conv1, &b.conv2}) {
      for (const auto& tap : conv->taps) {
        Require(tap.rows() == static_cast<Eigen::Index>(conv->in_dim()) &&
                    tap.cols() == static_cast<Eigen::Index>(conv->out_dim()),
                ErrorCode::kInvalidArgument, "predictor: convolution tap has the wrong shape");
        RequireFinite(tap, "predictor convolution");
      }
    }
    for (const auto* ln : {&b.norm1, &b.norm2}) {
      Require(ln->gamma.size() == d && ln->beta.size() == d, ErrorCode::kInvalidArgument,
              "predictor: layer norm width differs from the model width");
    }
  }
}

PredictorParams PredictorParams::Random(std::size_t dim, std::size_t hidden, std::size_t kernel,
                                        PredictorHead head, Rng& rng, double stddev) {
  Require(dim > 0 && hidden > 0 && kernel % 2 == 1, ErrorCode::kInvalidArgument,
          "predictor: need positive widths and an odd kernel");
  const auto d = static_cast<Eigen::Index>(dim);
  const auto h = static_cast<Eigen::Index>(hidden);
  PredictorParams p;
  p.head = head;
  for (int b = 0; b < 2; ++b) {
    PredictorBlock blk;
    blk.attention = AttentionParams::Random(dim, rng, stddev);
    blk.norm1 = {Vec::Ones(d), Vec::Zero(d)};
    for (std::size_t k = 0; k < kernel; ++k) blk.conv1.taps.push_back(RandomMat(d, h, rng, stddev));
    blk.conv1.bias = RandomVec(h, rng, stddev);
    blk.conv2.taps.push_back(RandomMat(h, d, rng, stddev));
    blk.conv2.bias = RandomVec(d, rng, stddev);
    blk.norm2 = {Vec::Ones(d), Vec::Zero(d)};
    p.blocks.push_back(std::move(blk));
  }
  const Eigen::Index outs = head == PredictorHead::kFe ? 2 : 1;
  p.head_weight = RandomMat(d, outs, rng, stddev);
  p.head_bias = RandomVec(outs, rng, stddev);
  return p;
}

PredictorOutput PredictorForward(const Mat& x, const PredictorParams& p) {
  p.Validate();
  Require(x.rows() >= 1, ErrorCode::kInvalidArgument, "predictor: empty input sequence");
  Require(x.cols() == p.head_weight.rows(), ErrorCode::kInvalidArgument,
          "predictor: input width " + std::to_string(x.cols()) + " does not match model width " +
              std::to_string(p.head_weight.rows()));
  Mat h = x;
  for (const auto& b : p.blocks) {
    const Mat attn = CrossAttention(h, h, b.attention).output;
    const Mat h1 = LayerNormForward(h + attn, b.norm1);
    const Mat ff = Conv1dForward(Conv1dForward(h1, b.conv1).cwiseMax(0.0), b.conv2);
    h = LayerNormForward(h1 + ff, b.norm2);
  }
  Mat y = h * p.head_weight;
  y.rowwise() += p.head_bias.transpose();

  PredictorOutput out;
  const auto n = static_cast<std::size_t>(y.rows());
  if (p.head == PredictorHead::kFe) {
    out.log_f0.resize(n);
    out.energy.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      out.log_f0[t] = y(static_cast<Eigen::Index>(t), 0);
      out.energy[t] = y(static_cast<Eigen::Index>(t), 1);
    }
  } else {
    out.duration.resize(n);
    for (std::size_t t = 0; t < n; ++t) out.duration[t] = Softplus(y(static_cast<Eigen::Index>(t), 0));
  }
  return out;
}

// -------------------------------------------------------------------- losses

ProsodyLoss LossProsody(std::span<const double> f0_hat, std::span<const double> f0_target,
                        const VuvMask& vuv, std::span<const double> energy_hat,
                        std::span<const double> energy_target, std::span<const double> dur_hat,
                        std::span<const double> dur_target) {
  Require(f0_hat.size() == f0_target.size() && f0_hat.size() == vuv.size(),
          ErrorCode::kInvalidArgument, "prosody loss: F0 prediction, target and VUV mask lengths differ");
  Require(energy_hat.size() == energy_target.size(), ErrorCode::kInvalidArgument,
          "prosody loss: energy prediction and target lengths differ");
  Require(dur_hat.size() == dur_target.size(), ErrorCode::kInvalidArgument,
          "prosody loss: duration prediction and target lengths differ");

  ProsodyLoss l;
  l.grad_f0_hat.assign(f0_hat.size(), 0.0);
  l.grad_energy_hat.assign(energy_hat.size(), 0.0);
  l.grad_dur_hat.assign(dur_hat.size(), 0.0);

  const std::size_t voiced = vuv.num_voiced();
  if (voiced == 0) {
    l.no_voiced_frames = true;
  } else {
    const double inv = 1.0 / static_cast<double>(voiced);
    for (std::size_t t = 0; t < f0_hat.size(); ++t) {
      if (!vuv.flags[t]) continue;
      const double e = f0_hat[t] - f0_target[t];
      l.f0 += e * e * inv;
      l.grad_f0_hat[t] = 2.0 * e * inv;
    }
  }

  if (!energy_hat.empty()) {
    const double inv = 1.0 / static_cast<double>(energy_hat.size());
    for (std::size_t t = 0; t < energy_hat.size(); ++t) {
      const double e = energy_hat[t] - energy_target[t];
      l.energy += e * e * inv;
      l.grad_energy_hat[t] = 2.0 * e * inv;
    }
  }

  if (!dur_hat.empty()) {
    const double inv = 1.0 / static_cast<double>(dur_hat.size());
    for (std::size_t t = 0; t < dur_hat.size(); ++t) {
      const double e = dur_hat[t] - dur_target[t];
      l.dur += std::abs(e) * inv;
      l.grad_dur_hat[t] = (e > 0.0 ? 1.0 : (e < 0.0 ? -1.0 : 0.0)) * inv;
    }
  }

  l.value = l.f0 + l.energy + l.dur;
  return l;
}

std::vector<double> LogF0Targets(const Contour& f0, const VuvMask& vuv) {
  Require(f0.size() == vuv.size(), ErrorCode::kInvalidArgument,
          "F0 contour and VUV mask lengths differ");
  std::vector<double> out(f0.size(), 0.0);
  for (std::size_t t = 0; t < f0.size(); ++t) {
    if (!vuv.flags[t]) continue;
    Require(f0.values[t] > 0.0, ErrorCode::kInvalidArgument,
            "voiced frame " + std::to_string(t) + " has non-positive F0");
    out[t] = std::log(f0.values[t]);
  }
  return out;
}

TripletLoss LossTriplet(const Mat& anchors, const Mat& positives, const Mat& negatives,
                        double alpha) {
  Require(anchors.rows() == positives.rows() && anchors.rows() == negatives.rows() &&
              anchors.cols() == positives.cols() && anchors.cols() == negatives.cols(),
          ErrorCode::kInvalidArgument, "triplet loss: anchor/positive/negative shapes differ");
  TripletLoss l;
  l.grad_anchor = Mat::Zero(anchors.rows(), anchors.cols());
  l.grad_positive = Mat::Zero(anchors.rows(), anchors.cols());
  l.grad_negative = Mat::Zero(anchors.rows(), anchors.cols());

  for (Eigen::Index i = 0; i < anchors.rows(); ++i) {
    const auto a = anchors.row(i);
    const auto p = positives.row(i);
    const auto n = negatives.row(i);
    const double na = a.norm(), np = p.norm(), nn = n.norm();
    Require(na > 0.0 && np > 0.0 && nn > 0.0, ErrorCode::kDegenerate,
            "triplet loss: zero-norm embedding in triplet " + std::to_string(i));
    const double s_ap = a.dot(p) / (na * np);
    const double s_an = a.dot(n) / (na * nn);
    const double hinge = s_an - s_ap + alpha;
    if (hinge <= 0.0) continue;
    l.value += hinge;
    ++l.active;
    // d cos(x, y) / dx = y / (|x||y|) - cos(x, y) x / |x|^2
    l.grad_anchor.row(i) += n / (na * nn) - s_an * a / (na * na);
    l.grad_anchor.row(i) -= p / (na * np) - s_ap * a / (na * na);
    l.grad_positive.row(i) -= a / (na * np) - s_ap * p / (np * np);
    l.grad_negative.row(i) += a / (na * nn) - s_an * n / (nn * nn);
  }
  return l;
}

CrossEntropyLoss CrossEntropy(const Mat& logits, std::span<const std::int32_t> labels) {
  const Eigen::Index n = logits.rows();
  const Eigen::Index c = logits.cols();
  Require(n >= 1 && c >= 1, ErrorCode::kInvalidArgument, "cross entropy: empty logits");
  Require(static_cast<std::size_t>(n) == labels.size(), ErrorCode::kInvalidArgument,
          "cross entropy: " + std::to_string(labels.size()) + " labels for " + std::to_string(n) + " rows");
  CrossEntropyLoss l;
  l.grad_logits = logits;
  RowSoftmaxInPlace(l.grad_logits);
  const double inv = 1.0 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto y = labels[static_cast<std::size_t>(i)];
    Require(y >= 0 && y < c, ErrorCode::kInvalidArgument,
            "cross entropy: label " + std::to_string(y) + " outside [0, " + std::to_string(c) + ")");
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    l.value += (lse - logits(i, y)) * inv;
    l.grad_logits(i, y) -= 1.0;
  }
  l.grad_logits *= inv;
  return l;
}

double CosineSimilarity(std::span<const double> u, std::span<const double> v) {
  Require(u.size() == v.size() && !u.empty(), ErrorCode::kInvalidArgument,
          "cosine similarity: vectors must be non-empty and of equal length");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  Require(nu > 0.0 && nv > 0.0, ErrorCode::kDegenerate, "cosine similarity: zero vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

double MelReconstructionL1(const Mat& predicted, const Mat& target) {
  Require(predicted.rows() == target.rows() && predicted.cols() == target.cols() && predicted.size() > 0,
          ErrorCode::kInvalidArgument, "mel reconstruction: shapes " + ShapeOf(predicted) + " and " +
                                           ShapeOf(target) + " differ or are empty");
  return (predicted - target).cwiseAbs().mean();
}

AssembledLoss AssembleTotalLosses(const std::map<std::string, double>& parts,
                                  const std::map<std::string, double>& weights) {
  for (const auto& [name, w] : weights) {
    Require(parts.count(name) == 1, ErrorCode::kInvalidArgument,
            "loss weight given for unknown part `" + name + "`");
    Require(std::isfinite(w), ErrorCode::kInvalidArgument, "loss weight `" + name + "` is not finite");
  }
  AssembledLoss out;
  for (const auto& [name, value] : parts) {
    Require(std::isfinite(value), ErrorCode::kInvalidArgument, "loss part `" + name + "` is not finite");
    const auto it = weights.find(name);
    const double w = it == weights.end() ? 1.0 : it->second;
    out.weighted[name] = w * value;
    out.total += w * value;
  }
  return out;
}

std::map<std::string, double> DefaultLossWeights() {
  return {{"recon", kReconWeight}};
}

AssembledLoss AssembleGeneratorTotal(const GeneratorLossParts& parts,
                                     const std::map<std::string, double>& weights) {
  const std::map<std::string, double> named = {
      {"adv", parts.adv},
      {"fm", parts.fm},
      {"recon", parts.recon},
      {"spk", parts.triplet + parts.emotion_grl},
      {"cont_grl", parts.content_grl},
      {"prosody", parts.prosody},
  };
  return AssembleTotalLosses(named, weights);
}

}  // namespace evc::nn
