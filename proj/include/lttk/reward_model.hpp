#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lttk/trajectory.hpp"

namespace lttk {

// Training data with only one class present; BCE training is degenerate.
class DegenerateTrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelConfig {
  int input_dim = 0;        // d of the trajectories
  int model_dim = 64;       // h
  int attention_blocks = 1; // B
  int heads = 2;            // H, must divide model_dim
  int ffn_multiplier = 4;
  int head_hidden = 0;      // 0 means model_dim
  std::uint64_t seed = 0;
  bool positional_encoding = true;  // test hook; leave on for real use

  int head_hidden_dim() const { return head_hidden > 0 ? head_hidden : model_dim; }
};

struct BlockParams {
  Vector ln1_gain, ln1_bias;
  Matrix wq, wk, wv, wo;  // model_dim x model_dim
  Vector bq, bk, bv, bo;
  Vector ln2_gain, ln2_bias;
  Matrix ffn_w1;  // model_dim x ffn_dim
  Vector ffn_b1;
  Matrix ffn_w2;  // ffn_dim x model_dim
  Vector ffn_b2;
};

struct Parameters {
  Matrix input_w;  // input_dim x model_dim
  Vector input_b;
  std::vector<BlockParams> blocks;
  Matrix head_w1;  // model_dim x head_hidden
  Vector head_b1;
  Vector head_w2;  // head_hidden
  double head_b2 = 0.0;
};

// Sequence classifier over trajectories: token-mean pooling per step,
// linear projection, sinusoidal positional encoding, pre-norm encoder
// blocks (multi-head self-attention + position-wise feed-forward, both
// with residuals), mean pooling over steps, two-layer ReLU head, sigmoid.
struct RewardModel {
  ModelConfig config;
  Parameters params;
};

// Parameter arrays with zeroed values in the shapes the config dictates.
Parameters make_parameters(const ModelConfig& config);

// Visits every parameter array in the canonical (serialization) order.
// Fn is called as fn(name, double* data, count); matrices are traversed in
// Eigen's column-major storage order.
template <typename Fn>
void visit_parameters(Parameters& params, Fn&& fn) {
  auto mat = [&fn](const std::string& name, Matrix& m) {
    fn(name, m.data(), static_cast<std::size_t>(m.size()));
  };
  auto vec = [&fn](const std::string& name, Vector& v) {
    fn(name, v.data(), static_cast<std::size_t>(v.size()));
  };
  mat("input.weight", params.input_w);
  vec("input.bias", params.input_b);
  for (std::size_t b = 0; b < params.blocks.size(); ++b) {
    BlockParams& block = params.blocks[b];
    const std::string prefix = "block" + std::to_string(b) + ".";
    vec(prefix + "ln1.gain", block.ln1_gain);
    vec(prefix + "ln1.bias", block.ln1_bias);
    mat(prefix + "attn.wq", block.wq);
    vec(prefix + "attn.bq", block.bq);
    mat(prefix + "attn.wk", block.wk);
    vec(prefix + "attn.bk", block.bk);
    mat(prefix + "attn.wv", block.wv);
    vec(prefix + "attn.bv", block.bv);
    mat(prefix + "attn.wo", block.wo);
    vec(prefix + "attn.bo", block.bo);
    vec(prefix + "ln2.gain", block.ln2_gain);
    vec(prefix + "ln2.bias", block.ln2_bias);
    mat(prefix + "ffn.w1", block.ffn_w1);
    vec(prefix + "ffn.b1", block.ffn_b1);
    mat(prefix + "ffn.w2", block.ffn_w2);
    vec(prefix + "ffn.b2", block.ffn_b2);
  }
  mat("head.w1", params.head_w1);
  vec("head.b1", params.head_b1);
  vec("head.w2", params.head_w2);
  fn("head.b2", &params.head_b2, 1);
}

// Deterministic initialization from config.seed: weights uniform in
// +-1/sqrt(fan_in), biases zero, normalization gains one.
RewardModel init_model(const ModelConfig& config);

// Correctness probability in (0, 1) for one trajectory.
double forward(const RewardModel& model, const Trajectory& trajectory);

struct TrainConfig {
  int epochs = 10;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int batch_size = 32;
  std::uint64_t shuffle_seed = 0;
};

struct LossGrads {
  double loss = 0.0;
  Parameters grads;
};

// Mean binary cross-entropy over the batch and its exact analytic
// gradients. Probabilities are clamped to [1e-12, 1 - 1e-12] inside the
// loss. Every sample must be labeled.
LossGrads loss_and_grads(const RewardModel& model,
                         const std::vector<LabeledSample>& batch);
LossGrads loss_and_grads(const RewardModel& model,
                         const std::vector<const LabeledSample*>& batch);

struct TrainResult {
  RewardModel model;
  std::vector<double> epoch_losses;
};

// Adam with bias correction over shuffled mini-batches; unlabeled samples
// are ignored. Requires at least one sample of each class.
TrainResult train(RewardModel model, const TrajectorySet& data,
                  const TrainConfig& cfg);

struct EvalReport {
  double accuracy = 0.0;
  double roc_auc = 0.0;
  std::size_t count = 0;  // labeled samples evaluated
};

EvalReport evaluate(const RewardModel& model, const TrajectorySet& data);

// Mann-Whitney rank statistic: P(random positive outscores a random
// negative), ties at half credit. Requires both classes.
double roc_auc(const std::vector<double>& scores,
               const std::vector<int>& labels);

// ".lrm" model file: magic "LRM1"; u32 header length; textual key/value
// config; then the parameter arrays in canonical order, each as
// (name length u16, name bytes, element count u64, f64 LE values).
std::size_t save_model(const RewardModel& model, std::ostream& sink);
RewardModel load_model(std::istream& source);
std::size_t save_model_file(const RewardModel& model, const std::string& path);
RewardModel load_model_file(const std::string& path);

}  // namespace lttk
