#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "casc/common.hpp"
#include "casc/posts.hpp"
#include "casc/rng.hpp"

namespace casc {

// Chronological 70-20-10 split over slice indices. With inputs numbered
// 1..N, supervision pairs (tau_i, rho_{i+1}) fall in train when i < K_t,
// validation when K_t <= i < K_v, test when K_v <= i < N.
struct SplitIndices {
  Index train_end = 0;  // K_t
  Index val_end = 0;    // K_v
  Index n_slices = 0;   // N

  bool valid() const { return 0 < train_end && train_end < val_end && val_end < n_slices; }
};

SplitIndices split_chronological(Index n_slices);

// Half-open range of pair indices; pair p joins input slice p with target
// slice p+1 (0-based).
struct PairRange {
  Index begin = 0;
  Index end = 0;
  Index count() const { return end - begin; }
};

PairRange train_pairs(const SplitIndices& split);
PairRange val_pairs(const SplitIndices& split);
PairRange test_pairs(const SplitIndices& split);
PairRange all_pairs(const SplitIndices& split);

// Per-window binary activity. Row i of `inputs` marks any posting in
// window i; row i of `targets` marks reaction posts only.
class SliceDataset {
 public:
  std::vector<std::string> users;
  std::int64_t delta_t = 43200;
  BinMat inputs;   // n_slices x D
  BinMat targets;  // n_slices x D
  SplitIndices split;

  Index n_slices() const { return inputs.rows(); }
  Index n_users() const { return inputs.cols(); }

  void apply_chronological_split() { split = split_chronological(n_slices()); }
};

// Windows are [t0 + k*dt, t0 + (k+1)*dt) anchored at the first post; the
// trailing partial window is dropped. Posts by users outside the given
// ordered list are ignored.
SliceDataset slice(const std::vector<PostRecord>& posts,
                   const std::vector<std::string>& users, std::int64_t delta_t);

struct NoiseEncoding {
  double mean_one = 1.0;
  double mean_zero = -1.0;
  double variance = 0.01;
  std::uint64_t seed = 0;

  double stddev() const { return std::sqrt(variance); }
};

// 1 -> N(mean_one, variance), 0 -> N(mean_zero, variance). The stream
// overload draws fresh samples; the plain overload seeds a stream from the
// encoding itself, so equal seeds give equal vectors.
Vec encode_noise(const BinVec& v, const NoiseEncoding& enc, Rng& stream);
Vec encode_noise(const BinVec& v, const NoiseEncoding& enc);
Mat encode_noise_rows(const BinMat& m, const NoiseEncoding& enc, Rng& stream);

// Exact {0,1} -> {-1,+1} mapping used for validation and test inputs.
Mat to_signed(const BinMat& m);
Vec to_signed(const BinVec& v);

// Fraction of 1-entries among target rows with slice index in
// [range.begin, range.end).
double class_density(const BinMat& targets, Index begin, Index end);

void save_slice_dataset(const std::string& path, const SliceDataset& ds);
SliceDataset load_slice_dataset(const std::string& path);
void export_slice_csv(const std::string& path, const SliceDataset& ds);

}  // namespace casc
