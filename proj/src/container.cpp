#include "lttk/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <ostream>
#include <vector>

namespace lttk {

namespace {

constexpr std::size_t kHeaderBytes = 12;
constexpr std::size_t kRecordMetaBytes = 29;

void put_bytes(std::string& out, const void* data, std::size_t n) {
  out.append(static_cast<const char*>(data), n);
}

void put_u16(std::string& out, std::uint16_t v) {
  const unsigned char bytes[2] = {static_cast<unsigned char>(v),
                                  static_cast<unsigned char>(v >> 8)};
  put_bytes(out, bytes, 2);
}

void put_u32(std::string& out, std::uint32_t v) {
  unsigned char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(out, bytes, 4);
}

void put_u64(std::string& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(out, bytes, 8);
}

void put_f32(std::string& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

// Bounds-checked little-endian reader over an in-memory buffer.
class Cursor {
 public:
  explicit Cursor(const std::string& buffer) : data_(buffer) {}

  std::size_t remaining() const { return data_.size() - pos_; }

  std::uint8_t u8() { return take<std::uint8_t>(1); }
  std::uint16_t u16() { return take<std::uint16_t>(2); }
  std::uint32_t u32() { return take<std::uint32_t>(4); }
  std::uint64_t u64() { return take<std::uint64_t>(8); }

  float f32() { return std::bit_cast<float>(u32()); }

  void raw(void* out, std::size_t n) {
    require(n);
    std::memcpy(out, data_.data() + pos_, n);
    pos_ += n;
  }

 private:
  template <typename T>
  T take(std::size_t n) {
    require(n);
    std::uint64_t value = 0;
    for (std::size_t i = 0; i < n; ++i) {
      value |= static_cast<std::uint64_t>(
                   static_cast<unsigned char>(data_[pos_ + i]))
               << (8 * i);
    }
    pos_ += n;
    return static_cast<T>(value);
  }

  void require(std::size_t n) {
    if (remaining() < n) {
      throw ContainerError(ContainerError::Kind::Truncated,
                           "container truncated at byte " +
                               std::to_string(pos_));
    }
  }

  const std::string& data_;
  std::size_t pos_ = 0;
};

Label label_from_byte(std::uint8_t byte) {
  switch (byte) {
    case 0:
      return Label::Incorrect;
    case 1:
      return Label::Correct;
    case 255:
      return Label::Unlabeled;
    default:
      throw ContainerError(ContainerError::Kind::InvalidRecord,
                           "label byte must be 0, 1 or 255; got " +
                               std::to_string(byte));
  }
}

}  // namespace

std::size_t write_container(const TrajectorySet& set, std::ostream& sink) {
  const ValidationReport report = validate_set(set);
  if (!report.empty()) {
    throw std::invalid_argument("write_container: invalid set: " +
                                report.front().reason);
  }
  if (set.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("write_container: too many records");
  }

  std::string out;
  put_bytes(out, kContainerMagic, 4);
  put_u16(out, kContainerVersion);
  put_u16(out, 0);  // reserved
  put_u32(out, static_cast<std::uint32_t>(set.size()));

  for (const LabeledSample& sample : set.samples) {
    const Trajectory& trajectory = sample.trajectory;
    if (trajectory.answer_id && *trajectory.answer_id == kNoAnswer) {
      throw std::invalid_argument(
          "write_container: answer_id 0xFFFFFFFF is reserved for 'none'");
    }
    put_u64(out, trajectory.problem_id);
    put_u32(out, trajectory.sample_id);
    put_u32(out, trajectory.answer_id ? *trajectory.answer_id : kNoAnswer);
    out.push_back(static_cast<char>(sample.label));
    const auto& thoughts = trajectory.thoughts;
    const std::uint32_t steps = static_cast<std::uint32_t>(thoughts.size());
    const std::uint32_t tokens =
        static_cast<std::uint32_t>(thoughts.front().tokens());
    const std::uint32_t dim = static_cast<std::uint32_t>(thoughts.front().dim());
    put_u32(out, steps);
    put_u32(out, tokens);
    put_u32(out, dim);
    for (const LatentThought& thought : thoughts) {
      for (std::uint32_t l = 0; l < tokens; ++l) {
        for (std::uint32_t k = 0; k < dim; ++k) {
          put_f32(out, static_cast<float>(thought.values(l, k)));
        }
      }
    }
  }

  sink.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!sink) {
    throw std::runtime_error("write_container: sink write failed");
  }
  return out.size();
}

TrajectorySet read_container(std::istream& source) {
  std::string buffer(std::istreambuf_iterator<char>(source), {});

  if (buffer.size() < 4) {
    throw ContainerError(ContainerError::Kind::Truncated,
                         "container shorter than the 4-byte magic");
  }
  if (std::memcmp(buffer.data(), kContainerMagic, 4) != 0) {
    throw ContainerError(ContainerError::Kind::BadMagic,
                         "bad magic: expected \"LTTK\"");
  }
  if (buffer.size() < kHeaderBytes) {
    throw ContainerError(ContainerError::Kind::Truncated,
                         "container truncated inside the header");
  }

  Cursor cursor(buffer);
  char magic[4];
  cursor.raw(magic, 4);
  const std::uint16_t version = cursor.u16();
  if (version != kContainerVersion) {
    throw ContainerError(ContainerError::Kind::UnsupportedVersion,
                         "unsupported container version " +
                             std::to_string(version));
  }
  cursor.u16();  // reserved
  const std::uint32_t record_count = cursor.u32();

  TrajectorySet set;
  set.samples.reserve(record_count);
  for (std::uint32_t r = 0; r < record_count; ++r) {
    if (cursor.remaining() < kRecordMetaBytes) {
      throw ContainerError(ContainerError::Kind::Truncated,
                           "container cut inside record " + std::to_string(r));
    }
    LabeledSample sample;
    Trajectory& trajectory = sample.trajectory;
    trajectory.problem_id = cursor.u64();
    trajectory.sample_id = cursor.u32();
    const std::uint32_t answer = cursor.u32();
    if (answer != kNoAnswer) trajectory.answer_id = answer;
    sample.label = label_from_byte(cursor.u8());
    const std::uint64_t steps = cursor.u32();
    const std::uint64_t tokens = cursor.u32();
    const std::uint64_t dim = cursor.u32();
    if (steps == 0 || tokens == 0 || dim == 0) {
      throw ContainerError(ContainerError::Kind::InconsistentDims,
                           "record " + std::to_string(r) +
                               " declares a zero dimension");
    }
    const std::uint64_t payload = 4 * steps * tokens * dim;
    if (payload / 4 / steps / tokens != dim) {
      throw ContainerError(
          ContainerError::Kind::InconsistentDims,
          "record " + std::to_string(r) +
              " declares dims whose payload size overflows");
    }
    if (payload > cursor.remaining()) {
      throw ContainerError(ContainerError::Kind::Truncated,
                           "container cut inside record " + std::to_string(r) +
                               " payload");
    }
    trajectory.thoughts.resize(steps);
    for (std::uint64_t t = 0; t < steps; ++t) {
      Matrix values(tokens, dim);
      for (std::uint64_t l = 0; l < tokens; ++l) {
        for (std::uint64_t k = 0; k < dim; ++k) {
          values(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) =
              static_cast<double>(cursor.f32());
        }
      }
      trajectory.thoughts[t].values = std::move(values);
    }
    set.samples.push_back(std::move(sample));
  }

  if (cursor.remaining() != 0) {
    throw ContainerError(ContainerError::Kind::InconsistentDims,
                         std::to_string(cursor.remaining()) +
                             " trailing bytes after the declared records");
  }
  return set;
}

std::size_t write_container_file(const TrajectorySet& set,
                                 const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  return write_container(set, out);
}

TrajectorySet read_container_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open for reading: " + path);
  }
  return read_container(in);
}

}  // namespace lttk
