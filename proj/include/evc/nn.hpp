#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "evc/contour.hpp"
#include "evc/random.hpp"
#include "evc/signal_io.hpp"
#include "evc/units.hpp"

// Forward passes, losses and analytic gradients of the conversion model's
// building blocks, as plain functions over row-major matrices (one time step
// or one sample per row).
namespace evc::nn {

using Mat = RowMatrix;
using Vec = Eigen::VectorXd;

inline constexpr std::size_t kDefaultEmbeddingDim = 256;
inline constexpr double kDefaultGrlLambda = 1.0;
inline constexpr double kTripletMargin = 0.3;
inline constexpr double kReconWeight = 45.0;

// ---------------------------------------------------------------- embeddings

struct EmbeddingTable {
  Mat weights;  // K x D
};

// Row t of the result is weights[units[t]]. Throws kLookup on a bad index.
Mat EmbedUnits(std::span<const std::int32_t> units, const EmbeddingTable& table);

// ----------------------------------------------------------------- attention

// Single-head projections, each D x D, applied on the right (x * W).
struct AttentionParams {
  Mat wq, wk, wv, wo;

  std::size_t dim() const { return static_cast<std::size_t>(wq.rows()); }
  void Validate() const;

  static AttentionParams Identity(std::size_t dim);
  static AttentionParams Random(std::size_t dim, Rng& rng, double stddev);
};

struct AttentionOutput {
  Mat output;   // Tq x D
  Mat weights;  // Tq x Tk, each row a probability vector
};

// softmax((q Wq)(kv Wk)^T / sqrt(D)) (kv Wv) Wo.
AttentionOutput CrossAttention(const Mat& query_in, const Mat& kv_in, const AttentionParams& p);

enum class Activation { kIdentity, kTanh, kRelu };

// One linear layer plus nonlinearity, applied to the cross-attention output
// before the gradient reversal layer.
struct ProjectionParams {
  Mat weight;  // D_in x D_out
  Vec bias;    // D_out
  Activation activation = Activation::kTanh;
};

Mat ProjectionBlock(const Mat& x, const ProjectionParams& p);

// ---------------------------------------------------------- gradient reversal

// Identity.
Mat GrlForward(const Mat& x);
// -lambda * upstream.
Mat GrlBackward(const Mat& upstream, double lambda = kDefaultGrlLambda);

// ------------------------------------------------------------ predictor input

// scalar -> D: value * weight + bias.
struct ScalarProjection {
  Vec weight;
  Vec bias;

  Mat Apply(std::span<const double> values) const;
};

struct FeInputParams {
  ScalarProjection f0;
  ScalarProjection energy;
  Mat vuv_table;  // 2 x D, row 0 unvoiced, row 1 voiced

  std::size_t dim() const { return static_cast<std::size_t>(vuv_table.cols()); }
  static FeInputParams Random(std::size_t dim, Rng& rng, double stddev);
};

// f0_e + energy_e + content + vuv_e. The reference contours are linearly
// resampled to the content length when the lengths differ.
Mat AssembleFeInput(const Contour& f0, const Contour& energy, const Mat& content,
                    const VuvMask& vuv, const FeInputParams& p);

struct DurationInputParams {
  ScalarProjection duration;

  static DurationInputParams Random(std::size_t dim, Rng& rng, double stddev);
};

// unique-unit embeddings + projected smoothed durations (resampled to the
// number of unique units) + the time-mean of the emotion representation,
// broadcast to every position.
Mat AssembleDurationInput(const Mat& unique_unit_embeddings, const Contour& smoothed_durations,
                          const Mat& emotion, const DurationInputParams& p);

// ----------------------------------------------------------------- predictor

// Same-padded 1-D convolution over time. taps[k] is D_in x D_out and is
// applied to x[t + k - kernel / 2].
struct Conv1d {
  std::vector<Mat> taps;
  Vec bias;

  std::size_t kernel() const { return taps.size(); }
  std::size_t in_dim() const { return taps.empty() ? 0 : static_cast<std::size_t>(taps[0].rows()); }
  std::size_t out_dim() const { return static_cast<std::size_t>(bias.size()); }
};

Mat Conv1dForward(const Mat& x, const Conv1d& conv);

struct LayerNorm {
  Vec gamma;
  Vec beta;
  double eps = 1e-5;
};

Mat LayerNormForward(const Mat& x, const LayerNorm& ln);

// Transformer block with the feed-forward network replaced by
// conv(kernel) -> ReLU -> conv(1):
//   h = LN1(x + SelfAttention(x));  y = LN2(h + Conv2(ReLU(Conv1(h))))
struct PredictorBlock {
  AttentionParams attention;
  LayerNorm norm1;
  Conv1d conv1;
  Conv1d conv2;
  LayerNorm norm2;
};

enum class PredictorHead {
  kFe,        // two outputs: log-F0 and energy
  kDuration,  // one output through softplus
};

struct PredictorParams {
  std::vector<PredictorBlock> blocks;
  Mat head_weight;  // D x outputs
  Vec head_bias;
  PredictorHead head = PredictorHead::kFe;

  std::size_t dim() const;
  void Validate() const;

  // Two blocks with N(0, stddev^2) weights, unit gamma and zero beta.
  static PredictorParams Random(std::size_t dim, std::size_t hidden, std::size_t kernel,
                                PredictorHead head, Rng& rng, double stddev);
};

struct PredictorOutput {
  std::vector<double> log_f0;    // kFe only
  std::vector<double> energy;    // kFe only
  std::vector<double> duration;  // kDuration only, > 0
};

PredictorOutput PredictorForward(const Mat& x, const PredictorParams& p);

std::string PredictorParamsToJson(const PredictorParams& p);
PredictorParams PredictorParamsFromJson(const std::string& text);

// --------------------------------------------------------------------- losses

struct ProsodyLoss {
  double value = 0.0;  // f0 + energy + dur
  double f0 = 0.0;
  double energy = 0.0;
  double dur = 0.0;
  bool no_voiced_frames = false;  // f0 term forced to 0
  std::vector<double> grad_f0_hat;
  std::vector<double> grad_energy_hat;
  std::vector<double> grad_dur_hat;
};

// F0 and energy: mean squared error (F0 over voiced frames only). Duration:
// mean absolute error, with d|x|/dx taken as 0 at x = 0. f0_hat and f0_target
// must be in the same domain (see LogF0Targets).
ProsodyLoss LossProsody(std::span<const double> f0_hat, std::span<const double> f0_target,
                        const VuvMask& vuv, std::span<const double> energy_hat,
                        std::span<const double> energy_target, std::span<const double> dur_hat,
                        std::span<const double> dur_target);

// ln(f0) on voiced frames, 0 elsewhere.
std::vector<double> LogF0Targets(const Contour& f0, const VuvMask& vuv);

struct TripletLoss {
  double value = 0.0;
  std::size_t active = 0;  // triplets with a positive hinge
  Mat grad_anchor;
  Mat grad_positive;
  Mat grad_negative;
};

// sum_i [cos(a_i, n_i) - cos(a_i, p_i) + alpha]_+
TripletLoss LossTriplet(const Mat& anchors, const Mat& positives, const Mat& negatives,
                        double alpha = kTripletMargin);

struct CrossEntropyLoss {
  double value = 0.0;
  Mat grad_logits;  // (softmax - onehot) / N
};

// Mean softmax cross-entropy over the rows of `logits`.
CrossEntropyLoss CrossEntropy(const Mat& logits, std::span<const std::int32_t> labels);

// u.v / (|u| |v|), clamped to [-1, 1]. Throws kDegenerate on a zero vector.
double CosineSimilarity(std::span<const double> u, std::span<const double> v);

// Mean absolute error between two mel spectrograms of equal shape.
double MelReconstructionL1(const Mat& predicted, const Mat& target);

struct AssembledLoss {
  double total = 0.0;
  std::map<std::string, double> weighted;
};

// Weighted sum of named scalar parts. Parts without a weight use 1; a weight
// naming an absent part is an error.
AssembledLoss AssembleTotalLosses(const std::map<std::string, double>& parts,
                                  const std::map<std::string, double>& weights);

// Generator objective: adversarial and feature-matching terms come from the
// vocoder discriminator and are taken as given; recon is the mel L1.
struct GeneratorLossParts {
  double adv = 0.0;
  double fm = 0.0;
  double recon = 0.0;
  double triplet = 0.0;
  double emotion_grl = 0.0;
  double content_grl = 0.0;
  double prosody = 0.0;
};

// {"recon": 45}; every other term weighs 1.
std::map<std::string, double> DefaultLossWeights();

// Parts map: adv, fm, recon, spk (= triplet + emotion_grl), cont_grl, prosody.
AssembledLoss AssembleGeneratorTotal(const GeneratorLossParts& parts,
                                     const std::map<std::string, double>& weights = DefaultLossWeights());

}  // namespace evc::nn
