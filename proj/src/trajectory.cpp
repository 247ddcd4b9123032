#include "lttk/trajectory.hpp"

#include <stdexcept>
#include <unordered_map>

namespace lttk {

Vector mean_pool_tokens(const LatentThought& thought) {
  if (thought.values.size() == 0) {
    throw std::invalid_argument("mean_pool_tokens: empty latent thought");
  }
  return thought.values.colwise().mean();
}

namespace {

void validate_sample(std::size_t index, const LabeledSample& sample,
                     ValidationReport& report) {
  const Trajectory& trajectory = sample.trajectory;
  if (trajectory.thoughts.empty()) {
    report.push_back({index, "trajectory has no thoughts (T = 0)"});
    return;
  }
  const Eigen::Index tokens = trajectory.thoughts.front().tokens();
  const Eigen::Index dim = trajectory.thoughts.front().dim();
  for (std::size_t t = 0; t < trajectory.thoughts.size(); ++t) {
    const LatentThought& thought = trajectory.thoughts[t];
    if (thought.tokens() < 1 || thought.dim() < 1) {
      report.push_back({index, "step " + std::to_string(t) +
                                   ": empty latent thought (L or d is 0)"});
      continue;
    }
    if (thought.tokens() != tokens || thought.dim() != dim) {
      report.push_back({index, "step " + std::to_string(t) +
                                   ": shape differs from step 0 within the "
                                   "trajectory"});
    }
    if (!thought.values.allFinite()) {
      report.push_back(
          {index, "step " + std::to_string(t) + ": non-finite entry"});
    }
  }
}

}  // namespace

ValidationReport validate_set(const TrajectorySet& set) {
  ValidationReport report;
  if (set.empty()) {
    report.push_back({Violation::npos, "set is empty"});
    return report;
  }
  for (std::size_t i = 0; i < set.samples.size(); ++i) {
    validate_sample(i, set.samples[i], report);
  }
  // Homogeneous (L, d) across samples, judged against the first sample
  // that has a well-formed shape.
  const LatentThought* reference = nullptr;
  std::size_t reference_index = 0;
  for (std::size_t i = 0; i < set.samples.size(); ++i) {
    const auto& thoughts = set.samples[i].trajectory.thoughts;
    if (thoughts.empty() || thoughts.front().values.size() == 0) continue;
    if (reference == nullptr) {
      reference = &thoughts.front();
      reference_index = i;
      continue;
    }
    if (thoughts.front().tokens() != reference->tokens() ||
        thoughts.front().dim() != reference->dim()) {
      report.push_back({i, "heterogeneous dimensionality: (L, d) differs "
                           "from sample " +
                               std::to_string(reference_index)});
    }
  }
  return report;
}

std::vector<ProblemGroup> group_by_problem(const TrajectorySet& set) {
  std::vector<ProblemGroup> groups;
  std::unordered_map<std::uint64_t, std::size_t> where;
  for (std::size_t i = 0; i < set.samples.size(); ++i) {
    const std::uint64_t problem = set.samples[i].trajectory.problem_id;
    auto [it, inserted] = where.try_emplace(problem, groups.size());
    if (inserted) groups.push_back({problem, {}});
    groups[it->second].sample_indices.push_back(i);
  }
  return groups;
}

TrajectorySet truncate_steps(const TrajectorySet& set, std::size_t steps) {
  if (steps == 0) {
    throw std::invalid_argument("truncate_steps: steps must be >= 1");
  }
  TrajectorySet out;
  out.samples.reserve(set.samples.size());
  for (const LabeledSample& sample : set.samples) {
    LabeledSample copy = sample;
    if (copy.trajectory.thoughts.size() > steps) {
      copy.trajectory.thoughts.resize(steps);
    }
    out.samples.push_back(std::move(copy));
  }
  return out;
}

}  // namespace lttk
