#include "lttk/lto.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>

#include "lttk/rng.hpp"

namespace lttk {

CandidateSet make_candidate_set(std::vector<Candidate> candidates,
                                std::vector<double> ref_weights) {
  if (candidates.empty()) {
    throw std::invalid_argument("make_candidate_set: no candidates");
  }
  for (const Candidate& c : candidates) {
    if (!std::isfinite(c.reward)) {
      throw std::invalid_argument("make_candidate_set: non-finite reward");
    }
  }
  const std::size_t n = candidates.size();
  if (ref_weights.empty()) {
    ref_weights.assign(n, 1.0 / static_cast<double>(n));
    double partial = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) partial += ref_weights[i];
    ref_weights.back() = 1.0 - partial;
  }
  if (ref_weights.size() != n) {
    throw std::invalid_argument(
        "make_candidate_set: ref_weights length mismatch");
  }
  double sum = 0.0;
  for (double w : ref_weights) {
    if (!(w > 0.0)) {
      throw std::invalid_argument(
          "make_candidate_set: ref_weights must be positive");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument(
        "make_candidate_set: ref_weights must sum to 1");
  }
  CandidateSet set;
  set.r_max = candidates.front().reward;
  for (const Candidate& c : candidates) set.r_max = std::max(set.r_max, c.reward);
  set.candidates = std::move(candidates);
  set.ref_weights = std::move(ref_weights);
  return set;
}

PolicyDistribution closed_form_policy(const CandidateSet& set, double beta) {
  if (!(beta > 0.0)) {
    throw std::invalid_argument("closed_form_policy: beta must be > 0");
  }
  if (set.candidates.empty()) {
    throw std::invalid_argument("closed_form_policy: empty candidate set");
  }
  PolicyDistribution policy;
  policy.probabilities.resize(set.size());
  double denominator = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double shifted =
        std::exp((set.candidates[i].reward - set.r_max) / beta);
    policy.probabilities[i] = set.ref_weights[i] * shifted;
    denominator += policy.probabilities[i];
  }
  for (double& p : policy.probabilities) p /= denominator;
  return policy;
}

LtoDraws lto_sample(const CandidateSet& set, const SamplerConfig& cfg) {
  if (!(cfg.beta > 0.0)) {
    throw std::invalid_argument("lto_sample: beta must be > 0");
  }
  if (cfg.required < 1) {
    throw std::invalid_argument("lto_sample: required must be >= 1");
  }
  if (set.candidates.empty()) {
    throw std::invalid_argument("lto_sample: empty candidate set");
  }

  const std::size_t n = set.size();
  Rng rng(cfg.seed);
  LtoDraws result;
  result.indices.reserve(static_cast<std::size_t>(cfg.required));
  std::uint64_t iterations = 0;

  while (result.indices.size() < static_cast<std::size_t>(cfg.required)) {
    std::uint64_t rejected = 0;
    for (;;) {
      if (++iterations > cfg.max_iterations) {
        throw SamplerStallError(
            "lto_sample: exceeded max_iterations (" +
            std::to_string(cfg.max_iterations) + ") with " +
            std::to_string(result.indices.size()) + " accepted");
      }
      const std::size_t index = static_cast<std::size_t>(rng.uniform_int(n));
      const double u = rng.uniform();
      const double phi =
          std::exp((set.candidates[index].reward - set.r_max) / cfg.beta);
      if (u < phi) {
        result.indices.push_back(index);
        result.trace.accepted.push_back({index, phi, rejected});
        break;
      }
      ++rejected;
    }
  }
  return result;
}

std::uint32_t majority_vote(const std::vector<std::uint32_t>& answers) {
  if (answers.empty()) {
    throw std::invalid_argument("majority_vote: empty answer list");
  }
  std::map<std::uint32_t, std::size_t> counts;
  for (std::uint32_t answer : answers) ++counts[answer];
  std::uint32_t best = counts.begin()->first;
  std::size_t best_count = counts.begin()->second;
  for (const auto& [answer, count] : counts) {
    if (count > best_count) {  // map order makes ties keep the smallest id
      best = answer;
      best_count = count;
    }
  }
  return best;
}

std::uint32_t weighted_majority_vote(const std::vector<std::uint32_t>& answers,
                                     const std::vector<double>& rewards,
                                     VoteWeighting weighting, double beta) {
  if (answers.empty()) {
    throw std::invalid_argument("weighted_majority_vote: empty answer list");
  }
  if (answers.size() != rewards.size()) {
    throw std::invalid_argument(
        "weighted_majority_vote: answers/rewards length mismatch");
  }
  if (weighting == VoteWeighting::ExpReward && !(beta > 0.0)) {
    throw std::invalid_argument("weighted_majority_vote: beta must be > 0");
  }
  std::map<std::uint32_t, double> sums;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const double weight = weighting == VoteWeighting::RewardSum
                              ? rewards[i]
                              : std::exp(rewards[i] / beta);
    sums[answers[i]] += weight;
  }
  std::uint32_t best = sums.begin()->first;
  double best_sum = sums.begin()->second;
  for (const auto& [answer, sum] : sums) {
    if (sum > best_sum) {
      best = answer;
      best_sum = sum;
    }
  }
  return best;
}

BoundReport verify_performance_bound(const std::vector<double>& rewards_true,
                                     const std::vector<double>& rewards_approx,
                                     const std::vector<double>& ref_weights,
                                     double beta) {
  if (rewards_true.size() != rewards_approx.size() || rewards_true.empty()) {
    throw std::invalid_argument(
        "verify_performance_bound: reward lists must be nonempty and of "
        "equal length");
  }
  for (double r : rewards_true) {
    if (r != 0.0 && r != 1.0) {
      throw std::invalid_argument(
          "verify_performance_bound: perfect rewards must be 0 or 1");
    }
  }
  for (double r : rewards_approx) {
    if (!(r >= 0.0 && r <= 1.0)) {
      throw std::invalid_argument(
          "verify_performance_bound: approximate rewards must lie in [0, 1]");
    }
  }

  auto as_candidates = [](const std::vector<double>& rewards) {
    std::vector<Candidate> out(rewards.size());
    for (std::size_t i = 0; i < rewards.size(); ++i) {
      out[i] = {i, rewards[i], static_cast<std::uint32_t>(i)};
    }
    return out;
  };
  const CandidateSet approx_set =
      make_candidate_set(as_candidates(rewards_approx), ref_weights);
  const CandidateSet perfect_set =
      make_candidate_set(as_candidates(rewards_true), ref_weights);

  const PolicyDistribution pi_approx = closed_form_policy(approx_set, beta);
  const PolicyDistribution pi_perfect = closed_form_policy(perfect_set, beta);

  BoundReport report;
  for (std::size_t i = 0; i < rewards_true.size(); ++i) {
    report.epsilon = std::max(
        report.epsilon, std::abs(rewards_approx[i] - rewards_true[i]));
    report.expected_correctness_approx +=
        pi_approx.probabilities[i] * rewards_true[i];
    report.expected_correctness_perfect +=
        pi_perfect.probabilities[i] * rewards_true[i];
  }
  report.gap = std::abs(report.expected_correctness_approx -
                        report.expected_correctness_perfect);
  report.bound = std::sqrt(4.0 * report.epsilon / beta);
  report.holds = report.gap <= report.bound + 1e-12;
  return report;
}

SamplerFitReport verify_sampler_distribution(const CandidateSet& set,
                                             double beta, std::uint64_t draws,
                                             std::uint64_t seed) {
  if (draws == 0) {
    throw std::invalid_argument("verify_sampler_distribution: zero draws");
  }
  SamplerConfig cfg;
  cfg.budget = static_cast<int>(set.size());
  cfg.required = static_cast<int>(draws);
  cfg.beta = beta;
  cfg.seed = seed;
  // Worst case needs about N proposals per acceptance; leave margin.
  cfg.max_iterations = draws * set.size() * 8 + 1024;

  const LtoDraws result = lto_sample(set, cfg);

  SamplerFitReport report;
  report.draws = draws;
  report.policy = closed_form_policy(set, beta);
  report.empirical.assign(set.size(), 0.0);
  for (std::size_t index : result.indices) report.empirical[index] += 1.0;
  for (double& count : report.empirical) {
    count /= static_cast<double>(draws);
  }

  double chi_square = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    report.tv_distance +=
        0.5 * std::abs(report.empirical[i] - report.policy.probabilities[i]);
    const double expected =
        report.policy.probabilities[i] * static_cast<double>(draws);
    if (expected > 0.0) {
      const double observed = report.empirical[i] * static_cast<double>(draws);
      chi_square += (observed - expected) * (observed - expected) / expected;
    }
  }
  report.chi_square = chi_square;
  if (set.size() < 2) {
    report.p_value = 1.0;
  } else {
    const boost::math::chi_squared dist(static_cast<double>(set.size() - 1));
    report.p_value =
        boost::math::cdf(boost::math::complement(dist, chi_square));
  }
  return report;
}

}  // namespace lttk
