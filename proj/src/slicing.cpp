#include "casc/slicing.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>

#include "casc/numerics/tensor.hpp"  // little-endian helpers

namespace casc {

SplitIndices split_chronological(Index n_slices) {
  require(n_slices >= 10, "split_chronological: need at least 10 slices");
  SplitIndices s;
  s.train_end = static_cast<Index>(std::floor(0.7 * static_cast<double>(n_slices)));
  s.val_end = static_cast<Index>(std::floor(0.9 * static_cast<double>(n_slices)));
  s.n_slices = n_slices;
  return s;
}

// 1-based input index i maps to 0-based pair index i-1.
PairRange train_pairs(const SplitIndices& s) {
  require(s.valid(), "train_pairs: split not set");
  return {0, s.train_end - 1};
}
PairRange val_pairs(const SplitIndices& s) {
  require(s.valid(), "val_pairs: split not set");
  return {s.train_end - 1, s.val_end - 1};
}
PairRange test_pairs(const SplitIndices& s) {
  require(s.valid(), "test_pairs: split not set");
  return {s.val_end - 1, s.n_slices - 1};
}
PairRange all_pairs(const SplitIndices& s) { return {0, s.n_slices - 1}; }

SliceDataset slice(const std::vector<PostRecord>& posts,
                   const std::vector<std::string>& users,
                   std::int64_t delta_t) {
  require(!posts.empty(), "slice: no posts");
  require(delta_t > 0, "slice: delta_t must be positive");

  std::unordered_map<std::string, Index> index;
  for (std::size_t i = 0; i < users.size(); ++i)
    index.emplace(users[i], static_cast<Index>(i));

  const std::int64_t t0 = posts.front().timestamp;
  const std::int64_t t_max = posts.back().timestamp;
  require(t_max >= t0, "slice: posts not sorted by timestamp");
  const Index n = static_cast<Index>((t_max - t0) / delta_t);

  SliceDataset ds;
  ds.users = users;
  ds.delta_t = delta_t;
  ds.inputs = BinMat::Zero(n, static_cast<Index>(users.size()));
  ds.targets = BinMat::Zero(n, static_cast<Index>(users.size()));
  ds.split = {0, 0, n};

  for (const auto& p : posts) {
    auto it = index.find(p.author);
    if (it == index.end()) continue;
    const Index k = static_cast<Index>((p.timestamp - t0) / delta_t);
    if (k >= n) continue;  // trailing partial window
    ds.inputs(k, it->second) = 1;
    if (is_reaction(p.kind)) ds.targets(k, it->second) = 1;
  }
  return ds;
}

Vec encode_noise(const BinVec& v, const NoiseEncoding& enc, Rng& stream) {
  require(enc.variance >= 0.0, "encode_noise: negative variance");
  const double sd = enc.stddev();
  Vec out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double mean = v[i] ? enc.mean_one : enc.mean_zero;
    out[i] = sd > 0.0 ? stream.normal(mean, sd) : mean;
  }
  return out;
}

Vec encode_noise(const BinVec& v, const NoiseEncoding& enc) {
  Rng stream(enc.seed);
  return encode_noise(v, enc, stream);
}

Mat encode_noise_rows(const BinMat& m, const NoiseEncoding& enc, Rng& stream) {
  require(enc.variance >= 0.0, "encode_noise: negative variance");
  const double sd = enc.stddev();
  Mat out(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      const double mean = m(i, j) ? enc.mean_one : enc.mean_zero;
      out(i, j) = sd > 0.0 ? stream.normal(mean, sd) : mean;
    }
  return out;
}

Mat to_signed(const BinMat& m) {
  Mat out(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) out(i, j) = m(i, j) ? 1.0 : -1.0;
  return out;
}

Vec to_signed(const BinVec& v) {
  Vec out(v.size());
  for (Index i = 0; i < v.size(); ++i) out[i] = v[i] ? 1.0 : -1.0;
  return out;
}

double class_density(const BinMat& targets, Index begin, Index end) {
  require(begin < end && begin >= 0 && end <= targets.rows(),
          "class_density: empty or out-of-bounds range");
  std::size_t ones = 0;
  for (Index i = begin; i < end; ++i)
    for (Index j = 0; j < targets.cols(); ++j) ones += targets(i, j);
  return static_cast<double>(ones) /
         (static_cast<double>(end - begin) * static_cast<double>(targets.cols()));
}

namespace {

constexpr std::uint32_t kSliceMagic = 0x434c5343u;  // "CSLC"
constexpr std::uint32_t kSliceVersion = 1;

void write_bitrows(std::ostream& os, const BinMat& m) {
  const Index bytes_per_row = (m.cols() + 7) / 8;
  std::vector<unsigned char> row(static_cast<std::size_t>(bytes_per_row));
  for (Index i = 0; i < m.rows(); ++i) {
    std::fill(row.begin(), row.end(), 0);
    for (Index j = 0; j < m.cols(); ++j)
      if (m(i, j)) row[static_cast<std::size_t>(j / 8)] |= 1u << (j % 8);
    os.write(reinterpret_cast<const char*>(row.data()),
             static_cast<std::streamsize>(row.size()));
  }
}

void read_bitrows(std::istream& is, BinMat& m) {
  const Index bytes_per_row = (m.cols() + 7) / 8;
  std::vector<unsigned char> row(static_cast<std::size_t>(bytes_per_row));
  for (Index i = 0; i < m.rows(); ++i) {
    is.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size()));
    for (Index j = 0; j < m.cols(); ++j)
      m(i, j) = (row[static_cast<std::size_t>(j / 8)] >> (j % 8)) & 1u;
  }
}

}  // namespace

void save_slice_dataset(const std::string& path, const SliceDataset& ds) {
  std::ofstream os(path, std::ios::binary);
  require(os.good(), "save_slice_dataset: cannot open " + path);
  detail::write_le<std::uint32_t>(os, kSliceMagic);
  detail::write_le<std::uint32_t>(os, kSliceVersion);
  detail::write_le<std::uint64_t>(os, static_cast<std::uint64_t>(ds.n_users()));
  detail::write_le<std::uint64_t>(os, static_cast<std::uint64_t>(ds.n_slices()));
  detail::write_le<std::int64_t>(os, ds.delta_t);
  detail::write_le<std::uint64_t>(os, static_cast<std::uint64_t>(ds.split.train_end));
  detail::write_le<std::uint64_t>(os, static_cast<std::uint64_t>(ds.split.val_end));
  for (const auto& u : ds.users) {
    detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(u.size()));
    os.write(u.data(), static_cast<std::streamsize>(u.size()));
  }
  write_bitrows(os, ds.inputs);
  write_bitrows(os, ds.targets);
  require(os.good(), "save_slice_dataset: write failed for " + path);
}

SliceDataset load_slice_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "load_slice_dataset: cannot open " + path);
  require(detail::read_le<std::uint32_t>(is) == kSliceMagic,
          "load_slice_dataset: bad magic in " + path);
  require(detail::read_le<std::uint32_t>(is) == kSliceVersion,
          "load_slice_dataset: unsupported version in " + path);
  SliceDataset ds;
  const auto d = detail::read_le<std::uint64_t>(is);
  const auto n = detail::read_le<std::uint64_t>(is);
  ds.delta_t = detail::read_le<std::int64_t>(is);
  ds.split.train_end = static_cast<Index>(detail::read_le<std::uint64_t>(is));
  ds.split.val_end = static_cast<Index>(detail::read_le<std::uint64_t>(is));
  ds.split.n_slices = static_cast<Index>(n);
  ds.users.resize(d);
  for (auto& u : ds.users) {
    const auto len = detail::read_le<std::uint32_t>(is);
    u.resize(len);
    is.read(u.data(), len);
  }
  ds.inputs = BinMat::Zero(static_cast<Index>(n), static_cast<Index>(d));
  ds.targets = BinMat::Zero(static_cast<Index>(n), static_cast<Index>(d));
  read_bitrows(is, ds.inputs);
  read_bitrows(is, ds.targets);
  require(is.good(), "load_slice_dataset: truncated file " + path);
  return ds;
}

void export_slice_csv(const std::string& path, const SliceDataset& ds) {
  std::ofstream os(path);
  require(os.good(), "export_slice_csv: cannot open " + path);
  os << "slice,kind";
  for (const auto& u : ds.users) os << ',' << u;
  os << '\n';
  for (Index i = 0; i < ds.n_slices(); ++i) {
    os << i << ",input";
    for (Index j = 0; j < ds.n_users(); ++j) os << ',' << int(ds.inputs(i, j));
    os << '\n' << i << ",target";
    for (Index j = 0; j < ds.n_users(); ++j) os << ',' << int(ds.targets(i, j));
    os << '\n';
  }
  require(os.good(), "export_slice_csv: write failed for " + path);
}

}  // namespace casc
