#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "casc/common.hpp"

namespace casc {

// A named dense tensor as stored in checkpoints. Values are kept in a
// matrix (vectors are n x 1); the shape records the logical extents.
struct NamedTensor {
  std::string name;
  std::vector<std::uint64_t> shape;
  Mat values;  // row-major order when flattened
};

namespace detail {

template <typename T>
void write_le(std::ostream& os, T v) {
  unsigned char buf[sizeof(T)];
  std::uint64_t bits;
  static_assert(sizeof(T) <= 8);
  std::memcpy(&bits, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i)
    buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  is.read(reinterpret_cast<char*>(buf), sizeof(T));
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  T v;
  std::memcpy(&v, &bits, sizeof(T));
  return v;
}

}  // namespace detail

inline constexpr std::uint32_t kCheckpointMagic = 0x4354534eu;  // "NSTC" LE
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Container format: magic, version, tensor count, then per tensor
// name / rank / dims / raw little-endian doubles in row-major order.
inline void save_checkpoint(const std::string& path,
                            const std::vector<NamedTensor>& tensors) {
  std::ofstream os(path, std::ios::binary);
  require(os.good(), "save_checkpoint: cannot open " + path);
  detail::write_le<std::uint32_t>(os, kCheckpointMagic);
  detail::write_le<std::uint32_t>(os, kCheckpointVersion);
  detail::write_le<std::uint64_t>(os, tensors.size());
  for (const auto& t : tensors) {
    detail::write_le<std::uint32_t>(os,
                                    static_cast<std::uint32_t>(t.name.size()));
    os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    detail::write_le<std::uint32_t>(os,
                                    static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) detail::write_le<std::uint64_t>(os, d);
    for (Index i = 0; i < t.values.rows(); ++i)
      for (Index j = 0; j < t.values.cols(); ++j)
        detail::write_le<double>(os, t.values(i, j));
  }
  require(os.good(), "save_checkpoint: write failed for " + path);
}

inline std::vector<NamedTensor> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "load_checkpoint: cannot open " + path);
  require(detail::read_le<std::uint32_t>(is) == kCheckpointMagic,
          "load_checkpoint: bad magic in " + path);
  require(detail::read_le<std::uint32_t>(is) == kCheckpointVersion,
          "load_checkpoint: unsupported version in " + path);
  const auto count = detail::read_le<std::uint64_t>(is);
  std::vector<NamedTensor> tensors;
  tensors.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    NamedTensor t;
    const auto name_len = detail::read_le<std::uint32_t>(is);
    t.name.resize(name_len);
    is.read(t.name.data(), name_len);
    const auto rank = detail::read_le<std::uint32_t>(is);
    std::uint64_t total = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      t.shape.push_back(detail::read_le<std::uint64_t>(is));
      total *= t.shape.back();
    }
    const Index rows = rank >= 1 ? static_cast<Index>(t.shape[0]) : 1;
    const Index cols =
        rows > 0 ? static_cast<Index>(total) / rows : static_cast<Index>(total);
    t.values.resize(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) t.values(i, j) = detail::read_le<double>(is);
    require(is.good(), "load_checkpoint: truncated file " + path);
    tensors.push_back(std::move(t));
  }
  return tensors;
}

}  // namespace casc
