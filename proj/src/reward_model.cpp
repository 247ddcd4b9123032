#include "lttk/reward_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "lttk/rng.hpp"

namespace lttk {

namespace {

constexpr double kLayerNormEps = 1e-5;
constexpr double kProbClamp = 1e-12;

void check_config(const ModelConfig& c) {
  if (c.input_dim < 1 || c.model_dim < 1 || c.attention_blocks < 1 ||
      c.heads < 1 || c.ffn_multiplier < 1 || c.head_hidden_dim() < 1) {
    throw std::invalid_argument("ModelConfig: all dimensions must be >= 1");
  }
  if (c.model_dim % c.heads != 0) {
    throw std::invalid_argument("ModelConfig: heads must divide model_dim");
  }
}

Matrix positional_encoding(Eigen::Index steps, Eigen::Index dim) {
  Matrix pe(steps, dim);
  const double log_base = std::log(10000.0);
  for (Eigen::Index i = 0; i < dim; i += 2) {
    const double rate =
        std::exp(-log_base * static_cast<double>(i) / static_cast<double>(dim));
    for (Eigen::Index t = 0; t < steps; ++t) {
      const double angle = static_cast<double>(t) * rate;
      pe(t, i) = std::sin(angle);
      if (i + 1 < dim) pe(t, i + 1) = std::cos(angle);
    }
  }
  return pe;
}

struct LayerNormCache {
  Matrix xhat;     // normalized rows
  Vector inv_std;  // per row
};

Matrix layer_norm(const Matrix& x, const Vector& gain, const Vector& bias,
                  LayerNormCache& cache) {
  const Eigen::Index rows = x.rows();
  const Eigen::Index cols = x.cols();
  cache.xhat.resize(rows, cols);
  cache.inv_std.resize(rows);
  Matrix out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double mean = x.row(r).mean();
    const double var =
        (x.row(r).array() - mean).square().mean();
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    cache.inv_std(r) = inv;
    cache.xhat.row(r) = ((x.row(r).array() - mean) * inv).matrix();
    out.row(r) = (cache.xhat.row(r).array() * gain.transpose().array() +
                  bias.transpose().array())
                     .matrix();
  }
  return out;
}

Matrix layer_norm_backward(const Matrix& dy, const Vector& gain,
                           const LayerNormCache& cache, Vector& dgain,
                           Vector& dbias) {
  const Eigen::Index rows = dy.rows();
  const Eigen::Index cols = dy.cols();
  Matrix dx(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    dgain.array() +=
        dy.row(r).transpose().array() * cache.xhat.row(r).transpose().array();
    dbias += dy.row(r).transpose();
    const Eigen::ArrayXd dxhat =
        dy.row(r).transpose().array() * gain.array();
    const double mean_dxhat = dxhat.mean();
    const double mean_proj =
        (dxhat * cache.xhat.row(r).transpose().array()).mean();
    dx.row(r) = ((dxhat - mean_dxhat -
                  cache.xhat.row(r).transpose().array() * mean_proj) *
                 cache.inv_std(r))
                    .matrix()
                    .transpose();
  }
  return dx;
}

struct BlockCache {
  Matrix x_in;
  LayerNormCache ln1;
  Matrix n1, q, k, v;
  std::vector<Matrix> attn;  // per head, steps x steps
  Matrix concat;             // heads' outputs side by side
  Matrix x_mid;              // after the attention residual
  LayerNormCache ln2;
  Matrix n2;
  Matrix ffn_pre;
  Matrix ffn_act;
};

struct ForwardCache {
  Matrix pooled;  // steps x input_dim
  Matrix x0;      // block-0 input
  std::vector<BlockCache> blocks;
  Matrix x_final;
  Vector seq_mean;
  Vector head_pre;
  Vector head_act;
  double logit = 0.0;
  double prob_raw = 0.0;
  double prob = 0.0;
};

double forward_cached(const RewardModel& model, const Trajectory& trajectory,
                      ForwardCache& cache) {
  const ModelConfig& cfg = model.config;
  const Parameters& p = model.params;
  if (trajectory.thoughts.empty()) {
    throw std::invalid_argument("forward: trajectory has no thoughts");
  }
  const Eigen::Index steps = static_cast<Eigen::Index>(trajectory.steps());
  const Eigen::Index dim = trajectory.thoughts.front().dim();
  if (dim != cfg.input_dim) {
    throw std::invalid_argument(
        "forward: trajectory dimensionality " + std::to_string(dim) +
        " does not match config.input_dim " + std::to_string(cfg.input_dim));
  }
  const Eigen::Index hidden = cfg.model_dim;
  const Eigen::Index head_dim = hidden / cfg.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  cache.pooled.resize(steps, dim);
  for (Eigen::Index t = 0; t < steps; ++t) {
    cache.pooled.row(t) = mean_pool_tokens(trajectory.thoughts[t]).transpose();
  }

  cache.x0 = cache.pooled * p.input_w;
  cache.x0.rowwise() += p.input_b.transpose();
  if (cfg.positional_encoding) {
    cache.x0 += positional_encoding(steps, hidden);
  }

  cache.blocks.resize(p.blocks.size());
  Matrix x = cache.x0;
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    const BlockParams& bp = p.blocks[b];
    BlockCache& bc = cache.blocks[b];
    bc.x_in = x;

    bc.n1 = layer_norm(x, bp.ln1_gain, bp.ln1_bias, bc.ln1);
    bc.q = bc.n1 * bp.wq;
    bc.q.rowwise() += bp.bq.transpose();
    bc.k = bc.n1 * bp.wk;
    bc.k.rowwise() += bp.bk.transpose();
    bc.v = bc.n1 * bp.wv;
    bc.v.rowwise() += bp.bv.transpose();

    bc.attn.assign(static_cast<std::size_t>(cfg.heads), Matrix());
    bc.concat.resize(steps, hidden);
    for (int h = 0; h < cfg.heads; ++h) {
      const Eigen::Index offset = static_cast<Eigen::Index>(h) * head_dim;
      Matrix scores = bc.q.middleCols(offset, head_dim) *
                      bc.k.middleCols(offset, head_dim).transpose() * scale;
      for (Eigen::Index r = 0; r < steps; ++r) {
        const double row_max = scores.row(r).maxCoeff();
        Eigen::ArrayXd e =
            (scores.row(r).transpose().array() - row_max).exp();
        scores.row(r) = (e / e.sum()).matrix().transpose();
      }
      bc.attn[static_cast<std::size_t>(h)] = scores;  // holds softmax now
      bc.concat.middleCols(offset, head_dim) =
          scores * bc.v.middleCols(offset, head_dim);
    }

    Matrix attn_out = bc.concat * bp.wo;
    attn_out.rowwise() += bp.bo.transpose();
    bc.x_mid = x + attn_out;

    bc.n2 = layer_norm(bc.x_mid, bp.ln2_gain, bp.ln2_bias, bc.ln2);
    bc.ffn_pre = bc.n2 * bp.ffn_w1;
    bc.ffn_pre.rowwise() += bp.ffn_b1.transpose();
    bc.ffn_act = bc.ffn_pre.cwiseMax(0.0);
    Matrix ffn_out = bc.ffn_act * bp.ffn_w2;
    ffn_out.rowwise() += bp.ffn_b2.transpose();
    x = bc.x_mid + ffn_out;
  }
  cache.x_final = x;

  cache.seq_mean = x.colwise().mean().transpose();
  cache.head_pre = p.head_w1.transpose() * cache.seq_mean + p.head_b1;
  cache.head_act = cache.head_pre.cwiseMax(0.0);
  cache.logit = p.head_w2.dot(cache.head_act) + p.head_b2;
  cache.prob_raw = 1.0 / (1.0 + std::exp(-cache.logit));
  cache.prob = std::clamp(cache.prob_raw, kProbClamp, 1.0 - kProbClamp);
  return cache.prob;
}

// Accumulates gradients for one sample given dL/dlogit.
void backward(const RewardModel& model, const ForwardCache& cache,
              double dlogit, Parameters& grads) {
  const ModelConfig& cfg = model.config;
  const Parameters& p = model.params;
  const Eigen::Index steps = cache.pooled.rows();
  const Eigen::Index hidden = cfg.model_dim;
  const Eigen::Index head_dim = hidden / cfg.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  grads.head_w2 += cache.head_act * dlogit;
  grads.head_b2 += dlogit;
  const Vector dhead_pre = ((p.head_w2 * dlogit).array() *
                            (cache.head_pre.array() > 0.0).cast<double>())
                               .matrix();
  grads.head_w1 += cache.seq_mean * dhead_pre.transpose();
  grads.head_b1 += dhead_pre;
  const Vector dseq_mean = p.head_w1 * dhead_pre;

  Matrix dx = (dseq_mean / static_cast<double>(steps))
                  .transpose()
                  .replicate(steps, 1);

  for (std::size_t b = p.blocks.size(); b-- > 0;) {
    const BlockParams& bp = p.blocks[b];
    BlockParams& bg = grads.blocks[b];
    const BlockCache& bc = cache.blocks[b];

    // Feed-forward sub-layer.
    const Matrix& dffn_out = dx;
    bg.ffn_w2 += bc.ffn_act.transpose() * dffn_out;
    bg.ffn_b2 += dffn_out.colwise().sum().transpose();
    Matrix dffn_act = dffn_out * bp.ffn_w2.transpose();
    Matrix dffn_pre =
        (dffn_act.array() * (bc.ffn_pre.array() > 0.0).cast<double>())
            .matrix();
    bg.ffn_w1 += bc.n2.transpose() * dffn_pre;
    bg.ffn_b1 += dffn_pre.colwise().sum().transpose();
    const Matrix dn2 = dffn_pre * bp.ffn_w1.transpose();
    Matrix dx_mid =
        dx + layer_norm_backward(dn2, bp.ln2_gain, bc.ln2, bg.ln2_gain,
                                 bg.ln2_bias);

    // Attention sub-layer.
    const Matrix& dattn_out = dx_mid;
    bg.wo += bc.concat.transpose() * dattn_out;
    bg.bo += dattn_out.colwise().sum().transpose();
    const Matrix dconcat = dattn_out * bp.wo.transpose();

    Matrix dq(steps, hidden), dk(steps, hidden), dv(steps, hidden);
    for (int h = 0; h < cfg.heads; ++h) {
      const Eigen::Index offset = static_cast<Eigen::Index>(h) * head_dim;
      const Matrix& attn = bc.attn[static_cast<std::size_t>(h)];
      const auto v_head = bc.v.middleCols(offset, head_dim);
      const auto dout_head = dconcat.middleCols(offset, head_dim);

      const Matrix dattn = dout_head * v_head.transpose();
      dv.middleCols(offset, head_dim) = attn.transpose() * dout_head;

      Matrix dscores(steps, steps);
      for (Eigen::Index r = 0; r < steps; ++r) {
        const double dot = dattn.row(r).dot(attn.row(r));
        dscores.row(r) =
            (attn.row(r).array() * (dattn.row(r).array() - dot)).matrix();
      }
      dq.middleCols(offset, head_dim) =
          dscores * bc.k.middleCols(offset, head_dim) * scale;
      dk.middleCols(offset, head_dim) =
          dscores.transpose() * bc.q.middleCols(offset, head_dim) * scale;
    }

    bg.wq += bc.n1.transpose() * dq;
    bg.bq += dq.colwise().sum().transpose();
    bg.wk += bc.n1.transpose() * dk;
    bg.bk += dk.colwise().sum().transpose();
    bg.wv += bc.n1.transpose() * dv;
    bg.bv += dv.colwise().sum().transpose();
    const Matrix dn1 =
        dq * bp.wq.transpose() + dk * bp.wk.transpose() + dv * bp.wv.transpose();
    dx = dx_mid + layer_norm_backward(dn1, bp.ln1_gain, bc.ln1, bg.ln1_gain,
                                      bg.ln1_bias);
  }

  grads.input_w += cache.pooled.transpose() * dx;
  grads.input_b += dx.colwise().sum().transpose();
}

}  // namespace

Parameters make_parameters(const ModelConfig& config) {
  check_config(config);
  const Eigen::Index d = config.input_dim;
  const Eigen::Index h = config.model_dim;
  const Eigen::Index f = static_cast<Eigen::Index>(config.model_dim) *
                         config.ffn_multiplier;
  const Eigen::Index g = config.head_hidden_dim();
  Parameters p;
  p.input_w = Matrix::Zero(d, h);
  p.input_b = Vector::Zero(h);
  p.blocks.resize(static_cast<std::size_t>(config.attention_blocks));
  for (BlockParams& block : p.blocks) {
    block.ln1_gain = Vector::Zero(h);
    block.ln1_bias = Vector::Zero(h);
    block.wq = Matrix::Zero(h, h);
    block.wk = Matrix::Zero(h, h);
    block.wv = Matrix::Zero(h, h);
    block.wo = Matrix::Zero(h, h);
    block.bq = Vector::Zero(h);
    block.bk = Vector::Zero(h);
    block.bv = Vector::Zero(h);
    block.bo = Vector::Zero(h);
    block.ln2_gain = Vector::Zero(h);
    block.ln2_bias = Vector::Zero(h);
    block.ffn_w1 = Matrix::Zero(h, f);
    block.ffn_b1 = Vector::Zero(f);
    block.ffn_w2 = Matrix::Zero(f, h);
    block.ffn_b2 = Vector::Zero(h);
  }
  p.head_w1 = Matrix::Zero(h, g);
  p.head_b1 = Vector::Zero(g);
  p.head_w2 = Vector::Zero(g);
  p.head_b2 = 0.0;
  return p;
}

RewardModel init_model(const ModelConfig& config) {
  RewardModel model;
  model.config = config;
  model.params = make_parameters(config);
  Parameters& p = model.params;
  Rng rng(config.seed);
  auto fill = [&rng](Matrix& m, Eigen::Index fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m.data()[i] = rng.uniform(-bound, bound);
    }
  };
  auto fill_vec = [&rng](Vector& v, Eigen::Index fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      v(i) = rng.uniform(-bound, bound);
    }
  };

  fill(p.input_w, p.input_w.rows());
  for (BlockParams& block : p.blocks) {
    block.ln1_gain.setOnes();
    block.ln2_gain.setOnes();
    fill(block.wq, block.wq.rows());
    fill(block.wk, block.wk.rows());
    fill(block.wv, block.wv.rows());
    fill(block.wo, block.wo.rows());
    fill(block.ffn_w1, block.ffn_w1.rows());
    fill(block.ffn_w2, block.ffn_w2.rows());
  }
  fill(p.head_w1, p.head_w1.rows());
  fill_vec(p.head_w2, p.head_w2.size());
  return model;
}

double forward(const RewardModel& model, const Trajectory& trajectory) {
  ForwardCache cache;
  return forward_cached(model, trajectory, cache);
}

LossGrads loss_and_grads(const RewardModel& model,
                         const std::vector<const LabeledSample*>& batch) {
  if (batch.empty()) {
    throw std::invalid_argument("loss_and_grads: empty batch");
  }
  LossGrads result;
  result.grads = make_parameters(model.config);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  ForwardCache cache;
  for (const LabeledSample* sample : batch) {
    if (sample->label == Label::Unlabeled) {
      throw std::invalid_argument("loss_and_grads: unlabeled sample in batch");
    }
    const double y = sample->label == Label::Correct ? 1.0 : 0.0;
    const double prob = forward_cached(model, sample->trajectory, cache);
    result.loss -=
        inv_n * (y * std::log(prob) + (1.0 - y) * std::log(1.0 - prob));
    // Outside the clamp range the clamped loss is flat in the logit.
    const bool in_range =
        cache.prob_raw > kProbClamp && cache.prob_raw < 1.0 - kProbClamp;
    const double dlogit = in_range ? (cache.prob_raw - y) * inv_n : 0.0;
    backward(model, cache, dlogit, result.grads);
  }
  return result;
}

LossGrads loss_and_grads(const RewardModel& model,
                         const std::vector<LabeledSample>& batch) {
  std::vector<const LabeledSample*> pointers;
  pointers.reserve(batch.size());
  for (const LabeledSample& sample : batch) pointers.push_back(&sample);
  return loss_and_grads(model, pointers);
}

TrainResult train(RewardModel model, const TrajectorySet& data,
                  const TrainConfig& cfg) {
  if (cfg.epochs < 0 || cfg.batch_size < 1 || !(cfg.learning_rate > 0.0)) {
    throw std::invalid_argument("TrainConfig: invalid epochs/batch/lr");
  }
  std::vector<const LabeledSample*> labeled;
  std::size_t positives = 0;
  for (const LabeledSample& sample : data.samples) {
    if (sample.label == Label::Unlabeled) continue;
    labeled.push_back(&sample);
    if (sample.label == Label::Correct) ++positives;
  }
  if (positives == 0 || positives == labeled.size()) {
    throw DegenerateTrainingError(
        "train: need at least one labeled sample per class");
  }

  // Flat views over parameters in canonical order; Adam moments alongside.
  std::vector<std::pair<double*, std::size_t>> param_views;
  std::size_t total = 0;
  visit_parameters(model.params,
                   [&](const std::string&, double* ptr, std::size_t n) {
                     param_views.emplace_back(ptr, n);
                     total += n;
                   });
  std::vector<double> m1(total, 0.0), m2(total, 0.0);

  TrainResult result;
  Rng rng(cfg.shuffle_seed);
  std::vector<std::size_t> order(labeled.size());
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t step = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.uniform_int(i)]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<const LabeledSample*> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) batch.push_back(labeled[order[i]]);

      LossGrads lg = loss_and_grads(model, batch);
      epoch_loss += lg.loss * static_cast<double>(batch.size());

      std::vector<std::pair<double*, std::size_t>> grad_views;
      visit_parameters(lg.grads,
                       [&](const std::string&, double* ptr, std::size_t n) {
                         grad_views.emplace_back(ptr, n);
                       });
      ++step;
      const double correction1 =
          1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
      const double correction2 =
          1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
      std::size_t offset = 0;
      for (std::size_t a = 0; a < param_views.size(); ++a) {
        double* theta = param_views[a].first;
        const double* grad = grad_views[a].first;
        for (std::size_t i = 0; i < param_views[a].second; ++i) {
          double& m = m1[offset + i];
          double& v = m2[offset + i];
          m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * grad[i];
          v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * grad[i] * grad[i];
          const double mhat = m / correction1;
          const double vhat = v / correction2;
          theta[i] -=
              cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_epsilon);
        }
        offset += param_views[a].second;
      }
    }
    result.epoch_losses.push_back(epoch_loss /
                                  static_cast<double>(labeled.size()));
  }
  result.model = std::move(model);
  return result;
}

EvalReport evaluate(const RewardModel& model, const TrajectorySet& data) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (const LabeledSample& sample : data.samples) {
    if (sample.label == Label::Unlabeled) continue;
    scores.push_back(forward(model, sample.trajectory));
    labels.push_back(sample.label == Label::Correct ? 1 : 0);
  }
  if (scores.empty()) {
    throw std::invalid_argument("evaluate: no labeled samples");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int predicted = scores[i] > 0.5 ? 1 : 0;
    if (predicted == labels[i]) ++correct;
  }
  EvalReport report;
  report.count = scores.size();
  report.accuracy = static_cast<double>(correct) /
                    static_cast<double>(scores.size());
  report.roc_auc = roc_auc(scores, labels);
  return report;
}

double roc_auc(const std::vector<double>& scores,
               const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("roc_auc: scores/labels length mismatch");
  }
  std::size_t positives = 0;
  for (int label : labels) {
    if (label != 0 && label != 1) {
      throw std::invalid_argument("roc_auc: labels must be 0 or 1");
    }
    positives += static_cast<std::size_t>(label);
  }
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw std::invalid_argument("roc_auc: both classes must be present");
  }

  std::vector<std::size_t> index(scores.size());
  std::iota(index.begin(), index.end(), 0);
  std::sort(index.begin(), index.end(), [&scores](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Walk groups of tied scores; positives beat the negatives strictly
  // below them and take half credit against ties.
  double numerator = 0.0;
  double negatives_below = 0.0;
  std::size_t i = 0;
  while (i < index.size()) {
    std::size_t j = i;
    double group_pos = 0.0, group_neg = 0.0;
    while (j < index.size() && scores[index[j]] == scores[index[i]]) {
      if (labels[index[j]] == 1) {
        group_pos += 1.0;
      } else {
        group_neg += 1.0;
      }
      ++j;
    }
    numerator += group_pos * negatives_below + 0.5 * group_pos * group_neg;
    negatives_below += group_neg;
    i = j;
  }
  return numerator / (static_cast<double>(positives) *
                      static_cast<double>(negatives));
}

namespace {

constexpr char kModelMagic[4] = {'L', 'R', 'M', '1'};

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

std::string config_header(const ModelConfig& c) {
  std::ostringstream out;
  out << "input_dim=" << c.input_dim << "\n"
      << "model_dim=" << c.model_dim << "\n"
      << "attention_blocks=" << c.attention_blocks << "\n"
      << "heads=" << c.heads << "\n"
      << "ffn_multiplier=" << c.ffn_multiplier << "\n"
      << "head_hidden=" << c.head_hidden << "\n"
      << "seed=" << c.seed << "\n"
      << "positional_encoding=" << (c.positional_encoding ? 1 : 0) << "\n";
  return out.str();
}

ModelConfig parse_config_header(const std::string& text) {
  std::map<std::string, std::string> fields;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("model file: malformed header line: " + line);
    }
    fields[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&fields](const std::string& key) -> long long {
    auto it = fields.find(key);
    if (it == fields.end()) {
      throw std::runtime_error("model file: missing header field " + key);
    }
    return std::stoll(it->second);
  };
  ModelConfig c;
  c.input_dim = static_cast<int>(get("input_dim"));
  c.model_dim = static_cast<int>(get("model_dim"));
  c.attention_blocks = static_cast<int>(get("attention_blocks"));
  c.heads = static_cast<int>(get("heads"));
  c.ffn_multiplier = static_cast<int>(get("ffn_multiplier"));
  c.head_hidden = static_cast<int>(get("head_hidden"));
  c.seed = static_cast<std::uint64_t>(get("seed"));
  c.positional_encoding = get("positional_encoding") != 0;
  return c;
}

}  // namespace

std::size_t save_model(const RewardModel& model, std::ostream& sink) {
  std::string out;
  out.append(kModelMagic, 4);
  const std::string header = config_header(model.config);
  put_u32(out, static_cast<std::uint32_t>(header.size()));
  out += header;

  Parameters& params = const_cast<Parameters&>(model.params);
  visit_parameters(params, [&out](const std::string& name, double* data,
                                  std::size_t count) {
    put_u16(out, static_cast<std::uint16_t>(name.size()));
    out += name;
    put_u64(out, count);
    for (std::size_t i = 0; i < count; ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, data + i, 8);
      put_u64(out, bits);
    }
  });

  sink.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!sink) {
    throw std::runtime_error("save_model: sink write failed");
  }
  return out.size();
}

RewardModel load_model(std::istream& source) {
  std::string buffer(std::istreambuf_iterator<char>(source), {});
  std::size_t pos = 0;
  auto need = [&buffer, &pos](std::size_t n) {
    if (buffer.size() - pos < n) {
      throw std::runtime_error("model file: truncated");
    }
  };
  auto take_u16 = [&]() {
    need(2);
    std::uint16_t v = static_cast<std::uint8_t>(buffer[pos]) |
                      (static_cast<std::uint16_t>(
                           static_cast<std::uint8_t>(buffer[pos + 1]))
                       << 8);
    pos += 2;
    return v;
  };
  auto take_u32 = [&]() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buffer[pos + i]))
           << (8 * i);
    }
    pos += 4;
    return v;
  };
  auto take_u64 = [&]() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(buffer[pos + i]))
           << (8 * i);
    }
    pos += 8;
    return v;
  };

  need(4);
  if (std::memcmp(buffer.data(), kModelMagic, 4) != 0) {
    throw std::runtime_error("model file: bad magic, expected \"LRM1\"");
  }
  pos += 4;
  const std::uint32_t header_len = take_u32();
  need(header_len);
  const std::string header = buffer.substr(pos, header_len);
  pos += header_len;

  RewardModel model;
  model.config = parse_config_header(header);
  model.params = make_parameters(model.config);

  visit_parameters(model.params, [&](const std::string& name, double* data,
                                     std::size_t count) {
    const std::uint16_t name_len = take_u16();
    need(name_len);
    const std::string stored = buffer.substr(pos, name_len);
    pos += name_len;
    if (stored != name) {
      throw std::runtime_error("model file: expected parameter " + name +
                               ", found " + stored);
    }
    const std::uint64_t stored_count = take_u64();
    if (stored_count != count) {
      throw std::runtime_error("model file: parameter " + name +
                               " has wrong element count");
    }
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint64_t bits = take_u64();
      std::memcpy(data + i, &bits, 8);
    }
  });
  if (pos != buffer.size()) {
    throw std::runtime_error("model file: trailing bytes");
  }
  return model;
}

std::size_t save_model_file(const RewardModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  return save_model(model, out);
}

RewardModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open for reading: " + path);
  }
  return load_model(in);
}

}  // namespace lttk
