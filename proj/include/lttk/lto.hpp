#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace lttk {

// The rejection loop hit max_iterations before collecting enough samples.
class SamplerStallError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SamplerConfig {
  int budget = 20;    // N, candidates sampled per problem
  int required = 1;   // M, accepted samples to collect
  double beta = 1e-3; // KL-regularization weight
  std::uint64_t max_iterations = 1000000;
  std::uint64_t seed = 0;
};

struct Candidate {
  std::size_t trajectory_index = 0;
  double reward = 0.0;
  std::uint32_t answer_id = 0;
};

// N candidates with their rewards; ref_weights is the reference policy
// restricted to the sampled set (uniform by default).
struct CandidateSet {
  std::vector<Candidate> candidates;
  std::vector<double> ref_weights;
  double r_max = 0.0;

  std::size_t size() const { return candidates.size(); }
};

// Validates rewards/weights and fills r_max; empty ref_weights means
// uniform 1/N.
CandidateSet make_candidate_set(std::vector<Candidate> candidates,
                                std::vector<double> ref_weights = {});

struct PolicyDistribution {
  std::vector<double> probabilities;
};

// KL-regularized optimal policy over the candidate set:
// p_i proportional to ref_i * exp(r_i / beta), evaluated with the max
// reward subtracted so beta = 1e-3 cannot overflow.
PolicyDistribution closed_form_policy(const CandidateSet& set, double beta);

struct AcceptanceRecord {
  std::size_t candidate_index = 0;
  double acceptance_probability = 0.0;  // phi of the accepted candidate
  std::uint64_t rejected_draws = 0;     // proposals rejected before this one
};

struct AcceptanceTrace {
  std::vector<AcceptanceRecord> accepted;
};

struct LtoDraws {
  std::vector<std::size_t> indices;
  AcceptanceTrace trace;
};

// Rejection sampler: propose a candidate uniformly, accept with
// phi_i = exp((r_i - r_max) / beta), repeat until cfg.required samples are
// collected. Accepted indices are i.i.d. draws from
// closed_form_policy(set, beta) with uniform ref_weights. The proposal is
// always uniform; set.ref_weights is not consulted here.
LtoDraws lto_sample(const CandidateSet& set, const SamplerConfig& cfg);

// Most frequent answer; ties broken by smallest answer_id.
std::uint32_t majority_vote(const std::vector<std::uint32_t>& answers);

enum class VoteWeighting {
  RewardSum,  // default: sum raw rewards per answer
  ExpReward,  // sum exp(reward / beta) per answer
};

// Answer maximizing the summed weight of its supporters; ties broken by
// smallest answer_id.
std::uint32_t weighted_majority_vote(
    const std::vector<std::uint32_t>& answers,
    const std::vector<double>& rewards,
    VoteWeighting weighting = VoteWeighting::RewardSum, double beta = 1.0);

// Imperfect-reward performance gap versus the sqrt(4*eps/beta) bound.
// rewards_true are the perfect {0,1} rewards; epsilon is the max absolute
// reward error. holds == (gap <= bound + 1e-12). The bound can exceed 1
// (vacuous) at small beta; it is reported as computed.
struct BoundReport {
  double epsilon = 0.0;
  double expected_correctness_approx = 0.0;
  double expected_correctness_perfect = 0.0;
  double gap = 0.0;
  double bound = 0.0;
  bool holds = false;
};

BoundReport verify_performance_bound(const std::vector<double>& rewards_true,
                                     const std::vector<double>& rewards_approx,
                                     const std::vector<double>& ref_weights,
                                     double beta);

// Empirical check that accepted draws follow the closed-form policy:
// tv_distance is the total-variation gap to the closed form and p_value a
// chi-square goodness-of-fit tail probability over the draw counts.
struct SamplerFitReport {
  std::vector<double> empirical;
  PolicyDistribution policy;
  double tv_distance = 0.0;
  double chi_square = 0.0;
  double p_value = 0.0;
  std::uint64_t draws = 0;
};

SamplerFitReport verify_sampler_distribution(const CandidateSet& set,
                                             double beta, std::uint64_t draws,
                                             std::uint64_t seed);

}  // namespace lttk
