#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lttk/rng.hpp"
#include "lttk/trajectory.hpp"

using namespace lttk;

namespace {

LatentThought thought_from_rows(std::initializer_list<std::vector<double>> rows) {
  const auto row_count = static_cast<Eigen::Index>(rows.size());
  const auto dim = static_cast<Eigen::Index>(rows.begin()->size());
  Matrix values(row_count, dim);
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    for (Eigen::Index k = 0; k < dim; ++k) values(r, k) = row[static_cast<std::size_t>(k)];
    ++r;
  }
  return {values};
}

TrajectorySet small_valid_set() {
  TrajectorySet set;
  for (int i = 0; i < 3; ++i) {
    LabeledSample sample;
    sample.label = i % 2 == 0 ? Label::Correct : Label::Incorrect;
    sample.trajectory.problem_id = static_cast<std::uint64_t>(i / 2);
    sample.trajectory.sample_id = static_cast<std::uint32_t>(i);
    sample.trajectory.answer_id = static_cast<std::uint32_t>(i);
    for (int t = 0; t < 2 + i; ++t) {
      Matrix values(2, 3);
      values.setConstant(i + 0.5 * t);
      sample.trajectory.thoughts.push_back({values});
    }
    set.samples.push_back(sample);
  }
  return set;
}

}  // namespace

TEST_CASE("mean pooling of identical rows returns the row") {
  const Vector v = (Vector(3) << 1.5, -2.0, 7.0).finished();
  Matrix values(4, 3);
  for (int r = 0; r < 4; ++r) values.row(r) = v.transpose();
  const Vector pooled = mean_pool_tokens({values});
  CHECK(pooled.isApprox(v));
}

TEST_CASE("mean pooling of a single row is the identity") {
  const LatentThought thought = thought_from_rows({{3.0, -1.0}});
  const Vector pooled = mean_pool_tokens(thought);
  CHECK(pooled(0) == 3.0);
  CHECK(pooled(1) == -1.0);
}

TEST_CASE("mean pooling averages two rows") {
  const LatentThought thought = thought_from_rows({{0.0, 2.0}, {2.0, 0.0}});
  const Vector pooled = mean_pool_tokens(thought);
  CHECK(pooled(0) == 1.0);
  CHECK(pooled(1) == 1.0);
}

TEST_CASE("mean pooling is linear") {
  Rng rng(17);
  for (int iteration = 0; iteration < 20; ++iteration) {
    Matrix a(5, 4), b(5, 4);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      a.data()[i] = rng.normal();
      b.data()[i] = rng.normal();
    }
    const double ca = rng.uniform(-3.0, 3.0);
    const double cb = rng.uniform(-3.0, 3.0);
    const Vector combined = mean_pool_tokens({ca * a + cb * b});
    const Vector separate =
        ca * mean_pool_tokens({a}) + cb * mean_pool_tokens({b});
    CHECK((combined - separate).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("validate_set accepts a well-formed set") {
  CHECK(validate_set(small_valid_set()).empty());
}

TEST_CASE("validate_set reports non-finite entries with the sample index") {
  TrajectorySet set = small_valid_set();
  set.samples[1].trajectory.thoughts[0].values(0, 1) =
      std::numeric_limits<double>::quiet_NaN();
  const ValidationReport report = validate_set(set);
  REQUIRE(report.size() == 1);
  CHECK(report[0].sample_index == 1);
  CHECK(report[0].reason.find("non-finite") != std::string::npos);
}

TEST_CASE("validate_set reports heterogeneous dimensionality") {
  TrajectorySet set = small_valid_set();
  for (auto& thought : set.samples[2].trajectory.thoughts) {
    thought.values = Matrix::Zero(2, 5);
  }
  const ValidationReport report = validate_set(set);
  REQUIRE(report.size() == 1);
  CHECK(report[0].sample_index == 2);
  CHECK(report[0].reason.find("heterogeneous") != std::string::npos);
}

TEST_CASE("validate_set reports empty sets and empty trajectories") {
  CHECK(validate_set({}).size() == 1);

  TrajectorySet set = small_valid_set();
  set.samples[0].trajectory.thoughts.clear();
  const ValidationReport report = validate_set(set);
  REQUIRE(report.size() == 1);
  CHECK(report[0].reason.find("T = 0") != std::string::npos);
}

TEST_CASE("validate_set is pure") {
  TrajectorySet set = small_valid_set();
  set.samples[0].trajectory.thoughts[1].values(1, 2) =
      std::numeric_limits<double>::infinity();
  const ValidationReport first = validate_set(set);
  const ValidationReport second = validate_set(set);
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].sample_index == second[i].sample_index);
    CHECK(first[i].reason == second[i].reason);
  }
}

TEST_CASE("truncate_steps cuts to a prefix and keeps short trajectories") {
  const TrajectorySet set = small_valid_set();
  const TrajectorySet cut = truncate_steps(set, 3);
  CHECK(cut.samples[0].trajectory.steps() == 2);  // was 2
  CHECK(cut.samples[1].trajectory.steps() == 3);  // was 3
  CHECK(cut.samples[2].trajectory.steps() == 3);  // was 4
  CHECK(cut.samples[2].trajectory.thoughts[1].values ==
        set.samples[2].trajectory.thoughts[1].values);
}

TEST_CASE("group_by_problem keeps first-appearance order") {
  TrajectorySet set = small_valid_set();
  set.samples[0].trajectory.problem_id = 9;
  set.samples[1].trajectory.problem_id = 4;
  set.samples[2].trajectory.problem_id = 9;
  const auto groups = group_by_problem(set);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].problem_id == 9);
  CHECK(groups[0].sample_indices == std::vector<std::size_t>{0, 2});
  CHECK(groups[1].problem_id == 4);
  CHECK(groups[1].sample_indices == std::vector<std::size_t>{1});
}
