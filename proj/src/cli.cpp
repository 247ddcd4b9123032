#include "lttk/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "lttk/container.hpp"
#include "lttk/geometry.hpp"
#include "lttk/lto.hpp"
#include "lttk/reward_model.hpp"
#include "lttk/rng.hpp"
#include "lttk/spectral.hpp"
#include "lttk/synthetic.hpp"
#include "lttk/trajectory.hpp"

namespace lttk::cli {

namespace {

std::string fmt(double value) {
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%.9g", value);
  return buffer;
}

using FlagList = std::vector<std::pair<std::string, std::string>>;

void provenance(std::ostream& out, const std::string& subcommand,
                const FlagList& flags,
                std::optional<std::uint64_t> seed = std::nullopt) {
  out << "lttk " << kVersion << "\n";
  out << "subcommand: " << subcommand << "\n";
  out << "flags:";
  for (const auto& [name, value] : flags) {
    out << " --" << name << "=" << value;
  }
  out << "\n";
  if (seed) {
    out << "seed=" << *seed << "\n";
  }
}

TrajectorySet read_valid_set(const std::string& path) {
  TrajectorySet set = read_container_file(path);
  const ValidationReport report = validate_set(set);
  if (!report.empty()) {
    throw std::runtime_error(path + ": invalid trajectory set (" +
                             std::to_string(report.size()) +
                             " violations, first: " + report.front().reason +
                             ")");
  }
  return set;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  return out;
}

int label_byte(Label label) { return static_cast<int>(label); }

std::uint32_t require_answer(const LabeledSample& sample, std::size_t index) {
  if (!sample.trajectory.answer_id) {
    throw std::runtime_error("sample " + std::to_string(index) +
                             " has no answer_id");
  }
  return *sample.trajectory.answer_id;
}

// ----------------------------------------------------------------------
// synth

struct SynthOptions {
  SyntheticConfig config;
  std::string out_path;
};

int run_synth(const SynthOptions& opt, std::ostream& out) {
  const TrajectorySet set = generate(opt.config);
  const std::size_t bytes = write_container_file(set, opt.out_path);
  const SyntheticConfig& c = opt.config;
  provenance(out, "synth",
             {{"problems", std::to_string(c.problems)},
              {"samples", std::to_string(c.samples_per_problem)},
              {"steps", std::to_string(c.steps)},
              {"tokens", std::to_string(c.tokens)},
              {"dim", std::to_string(c.dim)},
              {"correct-rate", fmt(c.correct_rate)},
              {"noise-std", fmt(c.noise_std)},
              {"separation", fmt(c.separation)},
              {"dispersion-ratio", fmt(c.dispersion_ratio)},
              {"answer-vocab", std::to_string(c.answer_vocab)},
              {"contraction", fmt(c.contraction)},
              {"out", opt.out_path}},
             c.seed);
  std::size_t correct = 0;
  for (const LabeledSample& sample : set.samples) {
    if (sample.label == Label::Correct) ++correct;
  }
  out << "records=" << set.size() << "\n";
  out << "correct_fraction="
      << fmt(static_cast<double>(correct) / static_cast<double>(set.size()))
      << "\n";
  out << "bytes=" << bytes << "\n";
  return 0;
}

// ----------------------------------------------------------------------
// validate

int run_validate(const std::string& in_path, std::ostream& out) {
  const TrajectorySet set = read_container_file(in_path);
  const ValidationReport report = validate_set(set);
  provenance(out, "validate", {{"in", in_path}});
  out << "records=" << set.size() << "\n";
  out << "violations=" << report.size() << "\n";
  for (const Violation& violation : report) {
    if (violation.sample_index == Violation::npos) {
      out << "set: " << violation.reason << "\n";
    } else {
      out << "sample " << violation.sample_index << ": " << violation.reason
          << "\n";
    }
  }
  return report.empty() ? 0 : 2;
}

// ----------------------------------------------------------------------
// metrics

struct MetricsOptions {
  std::string in_path;
  std::string out_path;
  double alpha = 1.0;
  double trim_fraction = 0.1;
};

int run_metrics(const MetricsOptions& opt, std::ostream& out) {
  const TrajectorySet set = read_valid_set(opt.in_path);
  std::ofstream csv = open_output(opt.out_path);
  csv << "problem_id,sample_id,label,step,entropy,effective_rank,anisotropy,"
         "intrinsic_dim\n";
  std::size_t rows = 0;
  for (const LabeledSample& sample : set.samples) {
    MetricProfile profile = metric_profile(sample.trajectory, opt.alpha);
    fill_intrinsic_dimension(profile, sample.trajectory, opt.trim_fraction);
    for (std::size_t t = 0; t < profile.steps(); ++t) {
      csv << sample.trajectory.problem_id << ','
          << sample.trajectory.sample_id << ',' << label_byte(sample.label)
          << ',' << (t + 1) << ',' << fmt(profile.entropy[t]) << ','
          << fmt(profile.effective_rank[t]) << ','
          << fmt(profile.anisotropy[t]) << ','
          << fmt(profile.intrinsic_dimension[t]) << '\n';
      ++rows;
    }
  }
  csv.flush();
  if (!csv) {
    throw std::runtime_error("write failed: " + opt.out_path);
  }
  provenance(out, "metrics",
             {{"in", opt.in_path},
              {"out", opt.out_path},
              {"alpha", fmt(opt.alpha)},
              {"trim-fraction", fmt(opt.trim_fraction)}});
  out << "rows=" << rows << "\n";
  return 0;
}

// ----------------------------------------------------------------------
// pca

struct PcaOptions {
  std::string in_path;
  std::string out_path;
};

int run_pca(const PcaOptions& opt, std::ostream& out) {
  const TrajectorySet set = read_valid_set(opt.in_path);
  const std::vector<ProblemGroup> groups = group_by_problem(set);

  std::ofstream csv = open_output(opt.out_path);
  csv << "problem_id,sample_id,label,step,pc1,pc2,pc3\n";
  provenance(out, "pca", {{"in", opt.in_path}, {"out", opt.out_path}});

  std::size_t rows = 0;
  for (const ProblemGroup& group : groups) {
    TrajectorySet subset;
    subset.samples.reserve(group.sample_indices.size());
    for (std::size_t index : group.sample_indices) {
      subset.samples.push_back(set.samples[index]);
    }
    const PcaProjection projection = pca_project(subset, 3);
    out << "problem " << group.problem_id << ": explained_variance="
        << fmt(projection.explained_variance(0)) << ","
        << fmt(projection.explained_variance(1)) << ","
        << fmt(projection.explained_variance(2)) << "\n";
    for (std::size_t s = 0; s < subset.samples.size(); ++s) {
      const LabeledSample& sample = subset.samples[s];
      const Matrix& coords = projection.trajectories[s].coordinates;
      for (Eigen::Index t = 0; t < coords.rows(); ++t) {
        csv << sample.trajectory.problem_id << ','
            << sample.trajectory.sample_id << ',' << label_byte(sample.label)
            << ',' << (t + 1) << ',' << fmt(coords(t, 0)) << ','
            << fmt(coords(t, 1)) << ',' << fmt(coords(t, 2)) << '\n';
        ++rows;
      }
    }
  }
  csv.flush();
  if (!csv) {
    throw std::runtime_error("write failed: " + opt.out_path);
  }
  out << "rows=" << rows << "\n";
  return 0;
}

// ----------------------------------------------------------------------
// train-lrm

struct TrainOptions {
  std::string in_path;
  std::string out_path;
  int model_dim = 64;
  int blocks = 1;
  int heads = 2;
  int ffn_multiplier = 4;
  int head_hidden = 0;
  int epochs = 10;
  double learning_rate = 1e-3;
  int batch_size = 32;
  std::uint32_t prefix_steps = 0;
  std::uint64_t seed = 0;
};

int run_train(const TrainOptions& opt, std::ostream& out) {
  TrajectorySet set = read_valid_set(opt.in_path);
  if (opt.prefix_steps > 0) {
    set = truncate_steps(set, opt.prefix_steps);
  }
  ModelConfig config;
  config.input_dim =
      static_cast<int>(set.samples.front().trajectory.thoughts.front().dim());
  config.model_dim = opt.model_dim;
  config.attention_blocks = opt.blocks;
  config.heads = opt.heads;
  config.ffn_multiplier = opt.ffn_multiplier;
  config.head_hidden = opt.head_hidden;
  config.seed = opt.seed;

  TrainConfig train_config;
  train_config.epochs = opt.epochs;
  train_config.learning_rate = opt.learning_rate;
  train_config.batch_size = opt.batch_size;
  train_config.shuffle_seed = Rng::mix(opt.seed, 1);

  const TrainResult result = train(init_model(config), set, train_config);
  const std::size_t bytes = save_model_file(result.model, opt.out_path);

  provenance(out, "train-lrm",
             {{"in", opt.in_path},
              {"out", opt.out_path},
              {"model-dim", std::to_string(opt.model_dim)},
              {"blocks", std::to_string(opt.blocks)},
              {"heads", std::to_string(opt.heads)},
              {"ffn-mult", std::to_string(opt.ffn_multiplier)},
              {"head-hidden", std::to_string(opt.head_hidden)},
              {"epochs", std::to_string(opt.epochs)},
              {"lr", fmt(opt.learning_rate)},
              {"batch-size", std::to_string(opt.batch_size)},
              {"prefix-steps", std::to_string(opt.prefix_steps)}},
             opt.seed);
  for (std::size_t epoch = 0; epoch < result.epoch_losses.size(); ++epoch) {
    out << "epoch " << (epoch + 1) << ": loss="
        << fmt(result.epoch_losses[epoch]) << "\n";
  }
  out << "model_bytes=" << bytes << "\n";
  return 0;
}

// ----------------------------------------------------------------------
// eval-lrm

int run_eval(const std::string& in_path, const std::string& model_path,
             std::ostream& out) {
  const TrajectorySet set = read_valid_set(in_path);
  const RewardModel model = load_model_file(model_path);
  const EvalReport report = evaluate(model, set);
  provenance(out, "eval-lrm", {{"in", in_path}, {"model", model_path}});
  out << "count=" << report.count << "\n";
  out << "accuracy=" << fmt(report.accuracy) << "\n";
  out << "roc_auc=" << fmt(report.roc_auc) << "\n";
  return 0;
}

// ----------------------------------------------------------------------
// lto

struct LtoOptions {
  std::string in_path;
  std::string model_path;
  int budget = 20;
  int required = 1;
  double beta = 1e-3;
  std::uint64_t max_iterations = 1000000;
  std::uint64_t seed = 0;
};

int run_lto(const LtoOptions& opt, std::ostream& out) {
  const TrajectorySet set = read_valid_set(opt.in_path);
  const RewardModel model = load_model_file(opt.model_path);
  const std::vector<ProblemGroup> groups = group_by_problem(set);

  provenance(out, "lto",
             {{"in", opt.in_path},
              {"model", opt.model_path},
              {"n", std::to_string(opt.budget)},
              {"m", std::to_string(opt.required)},
              {"beta", fmt(opt.beta)},
              {"max-iterations", std::to_string(opt.max_iterations)}},
             opt.seed);

  std::size_t chosen_correct = 0, chosen_labeled = 0;
  std::size_t pool_correct = 0, pool_labeled = 0;

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const ProblemGroup& group = groups[g];
    const std::size_t take = std::min(group.sample_indices.size(),
                                      static_cast<std::size_t>(opt.budget));
    std::vector<Candidate> candidates;
    candidates.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t index = group.sample_indices[i];
      const LabeledSample& sample = set.samples[index];
      Candidate candidate;
      candidate.trajectory_index = index;
      candidate.answer_id = require_answer(sample, index);
      candidate.reward = forward(model, sample.trajectory);
      candidates.push_back(candidate);
      if (sample.label != Label::Unlabeled) {
        ++pool_labeled;
        if (sample.label == Label::Correct) ++pool_correct;
      }
    }
    const CandidateSet candidate_set = make_candidate_set(std::move(candidates));

    SamplerConfig sampler;
    sampler.budget = opt.budget;
    sampler.required = opt.required;
    sampler.beta = opt.beta;
    sampler.max_iterations = opt.max_iterations;
    sampler.seed = Rng::mix(opt.seed, g);
    const LtoDraws draws = lto_sample(candidate_set, sampler);

    for (const AcceptanceRecord& record : draws.trace.accepted) {
      const Candidate& chosen = candidate_set.candidates[record.candidate_index];
      const LabeledSample& sample = set.samples[chosen.trajectory_index];
      out << "problem " << group.problem_id << ": candidate="
          << sample.trajectory.sample_id << " answer=" << chosen.answer_id
          << " reward=" << fmt(chosen.reward) << " phi="
          << fmt(record.acceptance_probability) << " rejected="
          << record.rejected_draws << "\n";
      if (sample.label != Label::Unlabeled) {
        ++chosen_labeled;
        if (sample.label == Label::Correct) ++chosen_correct;
      }
    }
  }

  out << "problems=" << groups.size() << "\n";
  if (chosen_labeled > 0) {
    out << "lto_correct_rate="
        << fmt(static_cast<double>(chosen_correct) /
               static_cast<double>(chosen_labeled))
        << "\n";
  }
  if (pool_labeled > 0) {
    out << "base_correct_rate="
        << fmt(static_cast<double>(pool_correct) /
               static_cast<double>(pool_labeled))
        << "\n";
  }
  return 0;
}

// ----------------------------------------------------------------------
// vote

struct VoteOptions {
  std::string in_path;
  std::string model_path;  // empty: plain majority only
  bool exponential = false;
  double beta = 1.0;
};

int run_vote(const VoteOptions& opt, std::ostream& out) {
  const TrajectorySet set = read_valid_set(opt.in_path);
  const std::vector<ProblemGroup> groups = group_by_problem(set);
  const bool weighted = !opt.model_path.empty();
  std::optional<RewardModel> model;
  if (weighted) model = load_model_file(opt.model_path);

  FlagList flags{{"in", opt.in_path}};
  if (weighted) {
    flags.emplace_back("model", opt.model_path);
    flags.emplace_back("weighting", opt.exponential ? "exp" : "sum");
    if (opt.exponential) flags.emplace_back("beta", fmt(opt.beta));
  }
  provenance(out, "vote", flags);

  // Correctness of a chosen answer is the label of any sample carrying it.
  auto answer_label = [&set](const ProblemGroup& group,
                             std::uint32_t answer) -> Label {
    for (std::size_t index : group.sample_indices) {
      const LabeledSample& sample = set.samples[index];
      if (sample.label != Label::Unlabeled && sample.trajectory.answer_id &&
          *sample.trajectory.answer_id == answer) {
        return sample.label;
      }
    }
    return Label::Unlabeled;
  };

  std::size_t majority_correct = 0, majority_known = 0;
  std::size_t weighted_correct = 0, weighted_known = 0;

  for (const ProblemGroup& group : groups) {
    std::vector<std::uint32_t> answers;
    std::vector<double> rewards;
    answers.reserve(group.sample_indices.size());
    for (std::size_t index : group.sample_indices) {
      const LabeledSample& sample = set.samples[index];
      answers.push_back(require_answer(sample, index));
      if (weighted) rewards.push_back(forward(*model, sample.trajectory));
    }
    const std::uint32_t majority = majority_vote(answers);
    out << "problem " << group.problem_id << ": majority=" << majority;
    const Label majority_verdict = answer_label(group, majority);
    if (majority_verdict != Label::Unlabeled) {
      ++majority_known;
      if (majority_verdict == Label::Correct) ++majority_correct;
    }
    if (weighted) {
      const std::uint32_t weighted_answer = weighted_majority_vote(
          answers, rewards,
          opt.exponential ? VoteWeighting::ExpReward : VoteWeighting::RewardSum,
          opt.beta);
      out << " weighted=" << weighted_answer;
      const Label weighted_verdict = answer_label(group, weighted_answer);
      if (weighted_verdict != Label::Unlabeled) {
        ++weighted_known;
        if (weighted_verdict == Label::Correct) ++weighted_correct;
      }
    }
    out << "\n";
  }

  out << "problems=" << groups.size() << "\n";
  if (majority_known > 0) {
    out << "majority_correct_rate="
        << fmt(static_cast<double>(majority_correct) /
               static_cast<double>(majority_known))
        << "\n";
  }
  if (weighted && weighted_known > 0) {
    out << "weighted_correct_rate="
        << fmt(static_cast<double>(weighted_correct) /
               static_cast<double>(weighted_known))
        << "\n";
  }
  return 0;
}

// ----------------------------------------------------------------------
// verify theorem2

struct Theorem2Options {
  int n = 5;
  double beta = 0.25;
  std::uint64_t draws = 200000;
  std::uint64_t seed = 0;
};

int run_theorem2(const Theorem2Options& opt, std::ostream& out) {
  provenance(out, "verify theorem2",
             {{"n", std::to_string(opt.n)},
              {"beta", fmt(opt.beta)},
              {"draws", std::to_string(opt.draws)}},
             opt.seed);
  Rng rng(opt.seed);
  std::vector<Candidate> candidates(static_cast<std::size_t>(opt.n));
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    candidates[i] = {i, rng.uniform(), static_cast<std::uint32_t>(i)};
  }
  const CandidateSet set = make_candidate_set(std::move(candidates));
  const SamplerFitReport report =
      verify_sampler_distribution(set, opt.beta, opt.draws, Rng::mix(opt.seed, 1));

  for (std::size_t i = 0; i < set.size(); ++i) {
    out << "candidate " << i << ": reward=" << fmt(set.candidates[i].reward)
        << " policy=" << fmt(report.policy.probabilities[i])
        << " empirical=" << fmt(report.empirical[i]) << "\n";
  }
  out << "tv_distance=" << fmt(report.tv_distance) << "\n";
  out << "chi_square=" << fmt(report.chi_square) << "\n";
  out << "p_value=" << fmt(report.p_value) << "\n";
  const bool pass = report.tv_distance < 0.01 && report.p_value > 0.001;
  out << (pass ? "PASS" : "FAIL")
      << ": accepted draws follow the closed-form policy (tv < 0.01, "
         "chi-square at significance 0.001)\n";
  return pass ? 0 : 3;
}

// ----------------------------------------------------------------------
// verify theorem3

struct Theorem3Options {
  std::uint64_t instances = 1000;
  int max_n = 10;
  double beta_min = 0.05;
  double beta_max = 1.0;
  double epsilon_max = 0.2;
  std::uint64_t seed = 0;
};

int run_theorem3(const Theorem3Options& opt, std::ostream& out) {
  provenance(out, "verify theorem3",
             {{"instances", std::to_string(opt.instances)},
              {"max-n", std::to_string(opt.max_n)},
              {"beta-min", fmt(opt.beta_min)},
              {"beta-max", fmt(opt.beta_max)},
              {"epsilon-max", fmt(opt.epsilon_max)}},
             opt.seed);
  if (opt.max_n < 2) {
    throw std::invalid_argument("verify theorem3: --max-n must be >= 2");
  }
  Rng rng(opt.seed);
  std::uint64_t violations = 0;
  double max_gap = 0.0, min_margin = std::numeric_limits<double>::infinity();
  for (std::uint64_t instance = 0; instance < opt.instances; ++instance) {
    const std::size_t n =
        2 + static_cast<std::size_t>(rng.uniform_int(
                static_cast<std::uint64_t>(opt.max_n - 1)));
    std::vector<double> rewards_true(n), rewards_approx(n);
    for (std::size_t i = 0; i < n; ++i) {
      rewards_true[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
      rewards_approx[i] = std::clamp(
          rewards_true[i] + rng.uniform(-opt.epsilon_max, opt.epsilon_max),
          0.0, 1.0);
    }
    const double beta = rng.uniform(opt.beta_min, opt.beta_max);
    std::vector<double> ref_weights;
    if (instance % 2 == 1) {  // alternate uniform and random reference
      ref_weights.resize(n);
      double total = 0.0;
      for (double& w : ref_weights) {
        w = 0.1 + rng.uniform();
        total += w;
      }
      for (double& w : ref_weights) w /= total;
    }
    const BoundReport report = verify_performance_bound(
        rewards_true, rewards_approx, ref_weights, beta);
    max_gap = std::max(max_gap, report.gap);
    min_margin = std::min(min_margin, report.bound - report.gap);
    if (!report.holds) ++violations;
  }
  out << "instances=" << opt.instances << "\n";
  out << "violations=" << violations << "\n";
  out << "max_gap=" << fmt(max_gap) << "\n";
  out << "min_margin=" << fmt(min_margin) << "\n";
  const bool pass = violations == 0;
  out << (pass ? "PASS" : "FAIL")
      << ": performance gap within sqrt(4*epsilon/beta) on every instance\n";
  return pass ? 0 : 3;
}

// ----------------------------------------------------------------------
// verify gradcheck

struct GradcheckOptions {
  int model_dim = 8;
  int blocks = 1;
  int heads = 2;
  int steps = 4;
  int tokens = 3;
  int dim = 5;
  double fd_step = 1e-4;
  double tolerance = 1e-4;
  std::uint64_t seed = 0;
};

Trajectory random_trajectory(Rng& rng, int steps, int tokens, int dim,
                             std::uint64_t problem_id) {
  Trajectory trajectory;
  trajectory.problem_id = problem_id;
  trajectory.thoughts.resize(static_cast<std::size_t>(steps));
  for (auto& thought : trajectory.thoughts) {
    Matrix values(tokens, dim);
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      values.data()[i] = rng.normal();
    }
    thought.values = values;
  }
  return trajectory;
}

int run_gradcheck(const GradcheckOptions& opt, std::ostream& out) {
  provenance(out, "verify gradcheck",
             {{"model-dim", std::to_string(opt.model_dim)},
              {"blocks", std::to_string(opt.blocks)},
              {"heads", std::to_string(opt.heads)},
              {"steps", std::to_string(opt.steps)},
              {"tokens", std::to_string(opt.tokens)},
              {"dim", std::to_string(opt.dim)},
              {"fd-step", fmt(opt.fd_step)},
              {"tolerance", fmt(opt.tolerance)}},
             opt.seed);

  ModelConfig config;
  config.input_dim = opt.dim;
  config.model_dim = opt.model_dim;
  config.attention_blocks = opt.blocks;
  config.heads = opt.heads;
  config.seed = opt.seed;
  RewardModel model = init_model(config);

  Rng rng(Rng::mix(opt.seed, 101));
  std::vector<LabeledSample> batch(2);
  batch[0].trajectory = random_trajectory(rng, opt.steps, opt.tokens, opt.dim, 0);
  batch[0].label = Label::Correct;
  batch[1].trajectory = random_trajectory(rng, opt.steps, opt.tokens, opt.dim, 1);
  batch[1].label = Label::Incorrect;

  LossGrads analytic = loss_and_grads(model, batch);

  std::vector<std::tuple<std::string, double*, std::size_t>> param_views;
  visit_parameters(model.params,
                   [&](const std::string& name, double* ptr, std::size_t n) {
                     param_views.emplace_back(name, ptr, n);
                   });
  std::vector<std::tuple<std::string, double*, std::size_t>> grad_views;
  visit_parameters(analytic.grads,
                   [&](const std::string& name, double* ptr, std::size_t n) {
                     grad_views.emplace_back(name, ptr, n);
                   });

  double worst = 0.0;
  std::string worst_name;
  for (std::size_t a = 0; a < param_views.size(); ++a) {
    auto& [name, params, count] = param_views[a];
    double* grads = std::get<1>(grad_views[a]);
    double array_worst = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const double saved = params[i];
      params[i] = saved + opt.fd_step;
      const double loss_plus = loss_and_grads(model, batch).loss;
      params[i] = saved - opt.fd_step;
      const double loss_minus = loss_and_grads(model, batch).loss;
      params[i] = saved;
      const double fd = (loss_plus - loss_minus) / (2.0 * opt.fd_step);
      const double scale =
          std::max({std::abs(grads[i]), std::abs(fd), 1e-3});
      array_worst = std::max(array_worst, std::abs(grads[i] - fd) / scale);
    }
    out << name << ": max_rel_err=" << fmt(array_worst) << "\n";
    if (array_worst > worst) {
      worst = array_worst;
      worst_name = name;
    }
  }
  out << "max_rel_err=" << fmt(worst) << " (" << worst_name << ")\n";
  const bool pass = worst < opt.tolerance;
  out << (pass ? "PASS" : "FAIL")
      << ": analytic gradients match central finite differences\n";
  return pass ? 0 : 3;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"latent thinking trajectory toolkit"};
  app.require_subcommand(1);

  SynthOptions synth_opt;
  auto* synth = app.add_subcommand(
      "synth", "generate a synthetic labeled trajectory corpus");
  synth->add_option("--problems", synth_opt.config.problems, "problem count")
      ->required();
  synth->add_option("--samples", synth_opt.config.samples_per_problem,
                    "samples per problem");
  synth->add_option("--steps", synth_opt.config.steps, "thinking steps T");
  synth->add_option("--tokens", synth_opt.config.tokens, "tokens per step L");
  synth->add_option("--dim", synth_opt.config.dim, "hidden dimensionality d");
  synth->add_option("--correct-rate", synth_opt.config.correct_rate,
                    "target correct fraction");
  synth->add_option("--noise-std", synth_opt.config.noise_std,
                    "initial-state noise std");
  synth->add_option("--separation", synth_opt.config.separation,
                    "correct/incorrect attractor distance");
  synth->add_option("--dispersion-ratio", synth_opt.config.dispersion_ratio,
                    "incorrect-to-correct step-noise ratio");
  synth->add_option("--answer-vocab", synth_opt.config.answer_vocab,
                    "answer vocabulary size");
  synth->add_option("--contraction", synth_opt.config.contraction,
                    "per-step contraction toward the attractor");
  synth->add_option("--seed", synth_opt.config.seed, "random seed")->required();
  synth->add_option("--out", synth_opt.out_path, "output .lttk path")
      ->required();

  std::string validate_in;
  auto* validate = app.add_subcommand(
      "validate", "check a container against the set invariants");
  validate->add_option("--in", validate_in, "input .lttk path")->required();

  MetricsOptions metrics_opt;
  auto* metrics = app.add_subcommand(
      "metrics", "per-step entropy, effective rank, anisotropy, TwoNN");
  metrics->add_option("--in", metrics_opt.in_path, "input .lttk path")
      ->required();
  metrics->add_option("--out", metrics_opt.out_path, "output .csv path")
      ->required();
  metrics->add_option("--alpha", metrics_opt.alpha,
                      "Renyi order (1 = von Neumann limit)");
  metrics->add_option("--trim-fraction", metrics_opt.trim_fraction,
                      "TwoNN trimming fraction f");

  PcaOptions pca_opt;
  auto* pca = app.add_subcommand(
      "pca", "project pooled steps onto 3 principal components per problem");
  pca->add_option("--in", pca_opt.in_path, "input .lttk path")->required();
  pca->add_option("--out", pca_opt.out_path, "output .csv path")->required();

  TrainOptions train_opt;
  auto* train_cmd = app.add_subcommand(
      "train-lrm", "train the latent reward model");
  train_cmd->add_option("--in", train_opt.in_path, "labeled .lttk path")
      ->required();
  train_cmd->add_option("--out", train_opt.out_path, "output .lrm path")
      ->required();
  train_cmd->add_option("--model-dim", train_opt.model_dim, "model width h");
  train_cmd->add_option("--blocks", train_opt.blocks, "encoder blocks");
  train_cmd->add_option("--heads", train_opt.heads, "attention heads");
  train_cmd->add_option("--ffn-mult", train_opt.ffn_multiplier,
                        "feed-forward width multiplier");
  train_cmd->add_option("--head-hidden", train_opt.head_hidden,
                        "classifier head width (0 = model-dim)");
  train_cmd->add_option("--epochs", train_opt.epochs, "training epochs");
  train_cmd->add_option("--lr", train_opt.learning_rate, "Adam learning rate");
  train_cmd->add_option("--batch-size", train_opt.batch_size, "batch size");
  train_cmd->add_option("--prefix-steps", train_opt.prefix_steps,
                        "truncate trajectories to this many leading steps");
  train_cmd->add_option("--seed", train_opt.seed, "random seed")->required();

  std::string eval_in, eval_model;
  auto* eval_cmd = app.add_subcommand(
      "eval-lrm", "evaluate a reward model on labeled trajectories");
  eval_cmd->add_option("--in", eval_in, "labeled .lttk path")->required();
  eval_cmd->add_option("--model", eval_model, "model .lrm path")->required();

  LtoOptions lto_opt;
  auto* lto = app.add_subcommand(
      "lto", "reward-guided rejection sampling over candidates per problem");
  lto->add_option("--in", lto_opt.in_path, "candidate .lttk path")->required();
  lto->add_option("--model", lto_opt.model_path, "model .lrm path")->required();
  lto->add_option("--n", lto_opt.budget, "sampling budget per problem");
  lto->add_option("--m", lto_opt.required, "accepted samples per problem");
  lto->add_option("--beta", lto_opt.beta, "KL-regularization weight");
  lto->add_option("--max-iterations", lto_opt.max_iterations,
                  "proposal budget per problem");
  lto->add_option("--seed", lto_opt.seed, "random seed")->required();

  VoteOptions vote_opt;
  auto* vote = app.add_subcommand(
      "vote", "majority and reward-weighted majority voting per problem");
  vote->add_option("--in", vote_opt.in_path, "candidate .lttk path")
      ->required();
  vote->add_option("--model", vote_opt.model_path,
                   "model .lrm path (enables the weighted vote)");
  vote->add_flag("--exp", vote_opt.exponential,
                 "weight votes by exp(reward/beta) instead of raw rewards");
  vote->add_option("--beta", vote_opt.beta, "beta for --exp weighting");

  auto* verify = app.add_subcommand("verify", "executable checks");
  verify->require_subcommand(1);

  Theorem2Options t2_opt;
  auto* theorem2 = verify->add_subcommand(
      "theorem2", "accepted draws follow the closed-form policy");
  theorem2->add_option("--n", t2_opt.n, "candidate count");
  theorem2->add_option("--beta", t2_opt.beta, "KL-regularization weight");
  theorem2->add_option("--draws", t2_opt.draws, "accepted draws");
  theorem2->add_option("--seed", t2_opt.seed, "random seed")->required();

  Theorem3Options t3_opt;
  auto* theorem3 = verify->add_subcommand(
      "theorem3", "imperfect-reward gap stays within sqrt(4*eps/beta)");
  theorem3->add_option("--instances", t3_opt.instances, "random instances");
  theorem3->add_option("--max-n", t3_opt.max_n, "max candidate count");
  theorem3->add_option("--beta-min", t3_opt.beta_min, "beta lower bound");
  theorem3->add_option("--beta-max", t3_opt.beta_max, "beta upper bound");
  theorem3->add_option("--epsilon-max", t3_opt.epsilon_max,
                       "max reward perturbation");
  theorem3->add_option("--seed", t3_opt.seed, "random seed")->required();

  GradcheckOptions gc_opt;
  auto* gradcheck = verify->add_subcommand(
      "gradcheck", "analytic gradients against central finite differences");
  gradcheck->add_option("--model-dim", gc_opt.model_dim, "model width h");
  gradcheck->add_option("--blocks", gc_opt.blocks, "encoder blocks");
  gradcheck->add_option("--heads", gc_opt.heads, "attention heads");
  gradcheck->add_option("--steps", gc_opt.steps, "trajectory steps T");
  gradcheck->add_option("--tokens", gc_opt.tokens, "tokens per step L");
  gradcheck->add_option("--dim", gc_opt.dim, "hidden dimensionality d");
  gradcheck->add_option("--fd-step", gc_opt.fd_step, "finite-difference step");
  gradcheck->add_option("--tolerance", gc_opt.tolerance,
                        "max relative error allowed");
  gradcheck->add_option("--seed", gc_opt.seed, "random seed")->required();

  try {
    std::vector<const char*> argv;
    argv.push_back("lttk");
    for (const std::string& arg : args) argv.push_back(arg.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& help) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& help) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& error) {
    err << "usage error: " << error.what() << "\n";
    return 1;
  }

  try {
    if (*synth) return run_synth(synth_opt, out);
    if (*validate) return run_validate(validate_in, out);
    if (*metrics) return run_metrics(metrics_opt, out);
    if (*pca) return run_pca(pca_opt, out);
    if (*train_cmd) return run_train(train_opt, out);
    if (*eval_cmd) return run_eval(eval_in, eval_model, out);
    if (*lto) return run_lto(lto_opt, out);
    if (*vote) return run_vote(vote_opt, out);
    if (*theorem2) return run_theorem2(t2_opt, out);
    if (*theorem3) return run_theorem3(t3_opt, out);
    if (*gradcheck) return run_gradcheck(gc_opt, out);
  } catch (const std::invalid_argument& error) {
    err << "usage error: " << error.what() << "\n";
    return 1;
  } catch (const std::exception& error) {
    err << "error: " << error.what() << "\n";
    return 2;
  }
  err << "usage error: no subcommand\n";
  return 1;
}

}  // namespace lttk::cli
