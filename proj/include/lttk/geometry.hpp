#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lttk/spectral.hpp"
#include "lttk/trajectory.hpp"

namespace lttk {

// Two identical points make the nearest-neighbor ratio undefined.
class DegenerateDistanceError : public std::runtime_error {
 public:
  DegenerateDistanceError(std::size_t first, std::size_t second)
      : std::runtime_error("identical points at indices " +
                           std::to_string(first) + " and " +
                           std::to_string(second) +
                           ": zero nearest-neighbor distance"),
        first_(first),
        second_(second) {}

  std::size_t first_index() const { return first_; }
  std::size_t second_index() const { return second_; }

 private:
  std::size_t first_;
  std::size_t second_;
};

class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OverTrimmedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RankDeficiencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// TwoNN intrinsic-dimension estimate. For each point the ratio
// mu_i = r2_i / r1_i of its second-nearest to nearest neighbor distance is
// formed; sorted ascending against the empirical CDF F_j = j/n, the points
// (log mu_(j), -log(1 - F_j)) lie on a line through the origin whose slope
// estimates the dimension. With trimming fraction f > 0 only the
// floor((1-f)*n) smallest ratios enter the fit.
struct TwoNNReport {
  double estimate = 0.0;
  std::vector<double> ratios;  // mu_i, input order
  std::size_t retained_count = 0;
  double trimming_fraction = 0.0;
  std::vector<std::pair<double, double>> regression_points;  // retained (x, y)
};

TwoNNReport two_nn_estimate(const std::vector<Vector>& points,
                            double trim_fraction);

// Treats the L token rows of a latent thought as the point cloud.
TwoNNReport two_nn_estimate(const Matrix& points, double trim_fraction);

// Per-step TwoNN estimate over each thought's token rows; fills the
// intrinsic_dimension column of a metric profile.
void fill_intrinsic_dimension(MetricProfile& profile,
                              const Trajectory& trajectory,
                              double trim_fraction);

// PCA projection of token-mean-pooled step vectors onto the leading
// principal components, fit jointly over every step of every sample in the
// set. explained_variance holds each component's fraction of the total
// variance.
struct ProjectedTrajectory {
  Matrix coordinates;         // steps x components
  Vector explained_variance;  // per component, descending
};

struct PcaProjection {
  std::vector<ProjectedTrajectory> trajectories;  // aligned with set order
  Matrix components;                              // d x components, orthonormal
  Vector mean;                                    // d
  Vector explained_variance;
};

PcaProjection pca_project(const TrajectorySet& set, int components = 3);

}  // namespace lttk
