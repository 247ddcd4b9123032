#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "lttk/container.hpp"
#include "lttk/rng.hpp"

using namespace lttk;

namespace {

// Random set whose values are exactly representable as f32, so containers
// round-trip bit-for-bit.
TrajectorySet random_f32_set(std::uint64_t seed, std::size_t records,
                             std::uint32_t steps = 3, std::uint32_t tokens = 2,
                             std::uint32_t dim = 4) {
  Rng rng(seed);
  TrajectorySet set;
  for (std::size_t r = 0; r < records; ++r) {
    LabeledSample sample;
    sample.trajectory.problem_id = rng.raw();
    sample.trajectory.sample_id = static_cast<std::uint32_t>(rng.raw());
    switch (rng.uniform_int(3)) {
      case 0:
        sample.label = Label::Correct;
        break;
      case 1:
        sample.label = Label::Incorrect;
        break;
      default:
        sample.label = Label::Unlabeled;
        break;
    }
    if (rng.uniform() < 0.8) {
      sample.trajectory.answer_id =
          static_cast<std::uint32_t>(rng.uniform_int(1000));
    }
    const std::uint32_t t_count =
        steps + static_cast<std::uint32_t>(rng.uniform_int(3));
    for (std::uint32_t t = 0; t < t_count; ++t) {
      Matrix values(tokens, dim);
      for (Eigen::Index i = 0; i < values.size(); ++i) {
        values.data()[i] =
            static_cast<double>(static_cast<float>(rng.normal(0.0, 10.0)));
      }
      sample.trajectory.thoughts.push_back({values});
    }
    set.samples.push_back(sample);
  }
  return set;
}

std::string write_to_string(const TrajectorySet& set) {
  std::ostringstream sink;
  write_container(set, sink);
  return sink.str();
}

TrajectorySet read_from_string(const std::string& bytes) {
  std::istringstream source(bytes);
  return read_container(source);
}

void check_equal(const TrajectorySet& a, const TrajectorySet& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const LabeledSample& x = a.samples[i];
    const LabeledSample& y = b.samples[i];
    CHECK(x.label == y.label);
    CHECK(x.trajectory.problem_id == y.trajectory.problem_id);
    CHECK(x.trajectory.sample_id == y.trajectory.sample_id);
    CHECK(x.trajectory.answer_id == y.trajectory.answer_id);
    REQUIRE(x.trajectory.steps() == y.trajectory.steps());
    for (std::size_t t = 0; t < x.trajectory.steps(); ++t) {
      CHECK(x.trajectory.thoughts[t].values ==
            y.trajectory.thoughts[t].values);
    }
  }
}

ContainerError::Kind read_error_kind(const std::string& bytes) {
  try {
    read_from_string(bytes);
  } catch (const ContainerError& error) {
    return error.kind();
  }
  FAIL("expected a ContainerError");
  return ContainerError::Kind::BadMagic;
}

}  // namespace

TEST_CASE("roundtrip preserves every field and value bit-for-bit") {
  const TrajectorySet set = random_f32_set(42, 20);
  const std::string bytes = write_to_string(set);
  const TrajectorySet back = read_from_string(bytes);
  check_equal(set, back);

  // A second trip through the format is byte-identical.
  CHECK(write_to_string(back) == bytes);
}

TEST_CASE("byte count matches the declared layout") {
  const TrajectorySet set = random_f32_set(7, 3, 2, 2, 3);
  std::ostringstream sink;
  const std::size_t bytes = write_container(set, sink);
  CHECK(bytes == sink.str().size());
  std::size_t expected = 12;
  for (const LabeledSample& sample : set.samples) {
    expected += 29 + 4 * sample.trajectory.steps() * 2 * 3;
  }
  CHECK(bytes == expected);
}

TEST_CASE("bad magic is rejected") {
  std::string bytes = write_to_string(random_f32_set(1, 2));
  bytes[0] = 'X';
  bytes[1] = 'X';
  bytes[2] = 'X';
  bytes[3] = 'X';
  CHECK(read_error_kind(bytes) == ContainerError::Kind::BadMagic);
  CHECK(read_error_kind("XXXX") == ContainerError::Kind::BadMagic);
}

TEST_CASE("unsupported version is rejected") {
  std::string bytes = write_to_string(random_f32_set(2, 2));
  bytes[4] = 2;  // version low byte
  CHECK(read_error_kind(bytes) == ContainerError::Kind::UnsupportedVersion);
}

TEST_CASE("streams cut mid-record are reported as truncation") {
  const std::string bytes = write_to_string(random_f32_set(3, 2));
  // Cut inside the final record's float payload.
  CHECK(read_error_kind(bytes.substr(0, bytes.size() - 5)) ==
        ContainerError::Kind::Truncated);

  // Cut inside record metadata: drop the final record's payload plus a
  // few metadata bytes.
  const TrajectorySet set = read_from_string(bytes);
  const std::size_t last_payload =
      4 * set.samples.back().trajectory.steps() * 2 * 4;
  CHECK(read_error_kind(bytes.substr(0, bytes.size() - last_payload - 3)) ==
        ContainerError::Kind::Truncated);

  // Cut inside the header.
  CHECK(read_error_kind(bytes.substr(0, 9)) ==
        ContainerError::Kind::Truncated);
  CHECK(read_error_kind(bytes.substr(0, 2)) ==
        ContainerError::Kind::Truncated);
}

TEST_CASE("declared dims inconsistent with the byte count are rejected") {
  TrajectorySet set = random_f32_set(4, 1, 2, 2, 2);
  const std::string bytes = write_to_string(set);

  SUBCASE("trailing bytes after the declared records") {
    CHECK(read_error_kind(bytes + "ab") ==
          ContainerError::Kind::InconsistentDims);
  }

  SUBCASE("zero dimension") {
    std::string tampered = bytes;
    // The record's T field sits right after the 12-byte header plus
    // problem_id (8), sample_id (4), answer_id (4), label (1).
    const std::size_t t_offset = 12 + 8 + 4 + 4 + 1;
    tampered[t_offset] = 0;
    tampered[t_offset + 1] = 0;
    tampered[t_offset + 2] = 0;
    tampered[t_offset + 3] = 0;
    CHECK(read_error_kind(tampered) ==
          ContainerError::Kind::InconsistentDims);
  }
}

TEST_CASE("invalid label bytes are rejected") {
  const std::string bytes = write_to_string(random_f32_set(5, 1));
  std::string tampered = bytes;
  tampered[12 + 8 + 4 + 4] = 7;  // label byte of the first record
  CHECK(read_error_kind(tampered) == ContainerError::Kind::InvalidRecord);
}

TEST_CASE("writing rejects invalid sets and reserved answer ids") {
  TrajectorySet bad = random_f32_set(6, 2);
  bad.samples[0].trajectory.thoughts[0].values(0, 0) =
      std::numeric_limits<double>::quiet_NaN();
  std::ostringstream sink;
  CHECK_THROWS_AS(write_container(bad, sink), std::invalid_argument);

  TrajectorySet reserved = random_f32_set(6, 1);
  reserved.samples[0].trajectory.answer_id = 0xFFFFFFFFu;
  CHECK_THROWS_AS(write_container(reserved, sink), std::invalid_argument);
}

TEST_CASE("record order is preserved") {
  TrajectorySet set = random_f32_set(8, 6);
  for (std::size_t i = 0; i < set.size(); ++i) {
    set.samples[i].trajectory.sample_id = static_cast<std::uint32_t>(i);
  }
  const TrajectorySet back = read_from_string(write_to_string(set));
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back.samples[i].trajectory.sample_id == i);
  }
}

TEST_CASE("missing file raises a readable error") {
  CHECK_THROWS_AS(read_container_file("/nonexistent/path.lttk"),
                  std::runtime_error);
}
