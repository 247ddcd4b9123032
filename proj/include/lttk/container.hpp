#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "lttk/trajectory.hpp"

namespace lttk {

// ".lttk" trajectory container, little-endian throughout:
//
//   magic        4 bytes ASCII "LTTK"
//   version      u16 = 1
//   reserved     u16 = 0
//   record_count u32
//
// Per record:
//   problem_id u64; sample_id u32; answer_id u32 (0xFFFFFFFF = none);
//   label u8 (0, 1, 255 = unlabeled); T u32; L u32; d u32;
//   then T*L*d f32 values ordered step-major, then token-major, then
//   feature: h[t][l][k].
//
// Values are stored as 32-bit floats; in-memory math is 64-bit.

inline constexpr char kContainerMagic[4] = {'L', 'T', 'T', 'K'};
inline constexpr std::uint16_t kContainerVersion = 1;
inline constexpr std::uint32_t kNoAnswer = 0xFFFFFFFFu;

class ContainerError : public std::runtime_error {
 public:
  enum class Kind {
    BadMagic,
    UnsupportedVersion,
    Truncated,
    InconsistentDims,
    InvalidRecord,
  };

  ContainerError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Writes the set to the sink; returns the number of bytes written.
// Requires a set that passes validate_set.
std::size_t write_container(const TrajectorySet& set, std::ostream& sink);

// Parses a container stream. Fails with a ContainerError whose kind
// distinguishes bad magic, unsupported version, truncation, and declared
// dims that do not match the remaining byte count.
TrajectorySet read_container(std::istream& source);

// Convenience file wrappers. Reading a missing file throws
// std::runtime_error; format failures throw ContainerError as above.
std::size_t write_container_file(const TrajectorySet& set,
                                 const std::string& path);
TrajectorySet read_container_file(const std::string& path);

}  // namespace lttk
