#include "lttk/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace lttk {

namespace {

struct NeighborDistances {
  double first = std::numeric_limits<double>::infinity();
  double second = std::numeric_limits<double>::infinity();
  std::size_t first_index = 0;
};

}  // namespace

TwoNNReport two_nn_estimate(const std::vector<Vector>& points,
                            double trim_fraction) {
  const std::size_t n = points.size();
  if (!(trim_fraction >= 0.0 && trim_fraction < 1.0)) {
    throw std::invalid_argument("two_nn_estimate: trim fraction must be in [0, 1)");
  }
  if (n < 3) {
    throw InsufficientDataError(
        "two_nn_estimate: need at least 3 points, got " + std::to_string(n));
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (points[i].size() != points[0].size()) {
      throw std::invalid_argument(
          "two_nn_estimate: points have mixed dimensions");
    }
  }

  std::vector<NeighborDistances> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dist = (points[i] - points[j]).norm();
      auto update = [dist](NeighborDistances& nb, std::size_t other) {
        if (dist < nb.first) {
          nb.second = nb.first;
          nb.first = dist;
          nb.first_index = other;
        } else if (dist < nb.second) {
          nb.second = dist;
        }
      };
      update(neighbors[i], j);
      update(neighbors[j], i);
    }
  }

  TwoNNReport report;
  report.trimming_fraction = trim_fraction;
  report.ratios.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (neighbors[i].first == 0.0) {
      throw DegenerateDistanceError(i, neighbors[i].first_index);
    }
    report.ratios[i] = neighbors[i].second / neighbors[i].first;
  }

  std::vector<double> sorted = report.ratios;
  std::sort(sorted.begin(), sorted.end());

  const std::size_t keep =
      trim_fraction > 0.0
          ? static_cast<std::size_t>((1.0 - trim_fraction) * static_cast<double>(n))
          : n;
  if (keep < 2) {
    throw OverTrimmedError("two_nn_estimate: only " + std::to_string(keep) +
                           " points retained after trimming");
  }

  double sum_xy = 0.0;
  double sum_xx = 0.0;
  for (std::size_t j = 1; j <= keep; ++j) {
    const double cdf = static_cast<double>(j) / static_cast<double>(n);
    const double y = -std::log1p(-cdf);
    if (!std::isfinite(y)) continue;  // F = 1 at j = n when nothing is trimmed
    const double x = std::log(sorted[j - 1]);
    report.regression_points.emplace_back(x, y);
    sum_xy += x * y;
    sum_xx += x * x;
  }
  report.retained_count = report.regression_points.size();
  if (report.retained_count < 2) {
    throw OverTrimmedError(
        "two_nn_estimate: fewer than 2 usable regression points");
  }
  if (sum_xx == 0.0) {
    throw InsufficientDataError(
        "two_nn_estimate: every retained ratio is 1, slope is undefined");
  }
  report.estimate = sum_xy / sum_xx;
  return report;
}

TwoNNReport two_nn_estimate(const Matrix& points, double trim_fraction) {
  std::vector<Vector> rows(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    rows[static_cast<std::size_t>(i)] = points.row(i).transpose();
  }
  return two_nn_estimate(rows, trim_fraction);
}

void fill_intrinsic_dimension(MetricProfile& profile,
                              const Trajectory& trajectory,
                              double trim_fraction) {
  if (profile.steps() != trajectory.steps()) {
    throw std::invalid_argument(
        "fill_intrinsic_dimension: profile/trajectory step mismatch");
  }
  for (std::size_t t = 0; t < trajectory.steps(); ++t) {
    profile.intrinsic_dimension[t] =
        two_nn_estimate(trajectory.thoughts[t].values, trim_fraction).estimate;
  }
}

PcaProjection pca_project(const TrajectorySet& set, int components) {
  if (components < 1) {
    throw std::invalid_argument("pca_project: components must be >= 1");
  }
  std::size_t total_steps = 0;
  for (const LabeledSample& sample : set.samples) {
    total_steps += sample.trajectory.steps();
  }
  if (total_steps < static_cast<std::size_t>(components)) {
    throw InsufficientDataError(
        "pca_project: fewer pooled step vectors than components");
  }

  const Eigen::Index dim = set.samples.front().trajectory.thoughts.front().dim();
  Matrix pooled(static_cast<Eigen::Index>(total_steps), dim);
  Eigen::Index row = 0;
  for (const LabeledSample& sample : set.samples) {
    for (const LatentThought& thought : sample.trajectory.thoughts) {
      pooled.row(row++) = mean_pool_tokens(thought).transpose();
    }
  }

  const Vector mean = pooled.colwise().mean();
  const Matrix centered = pooled.rowwise() - mean.transpose();

  Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  const double cutoff = 1e-10 * sigma(0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cutoff) ++rank;
  }
  if (rank < components) {
    throw RankDeficiencyError("pca_project: centered data has rank " +
                              std::to_string(rank) + ", need " +
                              std::to_string(components));
  }

  PcaProjection result;
  result.mean = mean;
  result.components = svd.matrixV().leftCols(components);
  const double total_variance = sigma.array().square().sum();
  result.explained_variance =
      sigma.head(components).array().square() / total_variance;

  result.trajectories.reserve(set.samples.size());
  row = 0;
  for (const LabeledSample& sample : set.samples) {
    const Eigen::Index steps =
        static_cast<Eigen::Index>(sample.trajectory.steps());
    ProjectedTrajectory projected;
    projected.coordinates =
        centered.middleRows(row, steps) * result.components;
    projected.explained_variance = result.explained_variance;
    result.trajectories.push_back(std::move(projected));
    row += steps;
  }
  return result;
}

}  // namespace lttk
