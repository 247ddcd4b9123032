#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lttk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// One latent thought: L token rows by d hidden features.
struct LatentThought {
  Matrix values;

  Eigen::Index tokens() const { return values.rows(); }
  Eigen::Index dim() const { return values.cols(); }
};

enum class Label : std::uint8_t {
  Incorrect = 0,
  Correct = 1,
  Unlabeled = 255,
};

// An ordered sequence of latent thoughts for one attempt at one problem.
// All thoughts share the same (L, d); the step count T may differ between
// trajectories.
struct Trajectory {
  std::uint64_t problem_id = 0;
  std::uint32_t sample_id = 0;
  std::optional<std::uint32_t> answer_id;
  std::vector<LatentThought> thoughts;

  std::size_t steps() const { return thoughts.size(); }
};

struct LabeledSample {
  Trajectory trajectory;
  Label label = Label::Unlabeled;
};

struct TrajectorySet {
  std::vector<LabeledSample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

// A single invariant violation. sample_index is npos for set-level issues.
struct Violation {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t sample_index = npos;
  std::string reason;
};

using ValidationReport = std::vector<Violation>;

// Column means over the L token rows; returns a d-vector.
Vector mean_pool_tokens(const LatentThought& thought);

// Lists every invariant violation in the set. Empty report means valid.
ValidationReport validate_set(const TrajectorySet& set);

// Copy of the set with every trajectory cut to its first `steps` thoughts
// (trajectories shorter than that are kept whole).
TrajectorySet truncate_steps(const TrajectorySet& set, std::size_t steps);

// Sample indices grouped by problem_id, problems ordered by first
// appearance, samples in input order.
struct ProblemGroup {
  std::uint64_t problem_id = 0;
  std::vector<std::size_t> sample_indices;
};

std::vector<ProblemGroup> group_by_problem(const TrajectorySet& set);

}  // namespace lttk
