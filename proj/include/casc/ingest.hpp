#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "casc/graph.hpp"
#include "casc/posts.hpp"

namespace casc {

class SliceDataset;  // slicing.hpp

struct UserFilter {
  std::int64_t activity_threshold = 0;    // a: posts required for A
  std::int64_t popularity_threshold = 0;  // p: reactions required for P
  std::unordered_set<std::string> active;   // A
  std::unordered_set<std::string> popular;  // P
  std::vector<std::string> kept;            // V = A u P, sorted
  bool degenerate = false;  // fewer users than target, kept everyone
};

// Picks (a, p) over the observed count quantiles so that |A u P| lands as
// close to target_size as possible; ties prefer smaller thresholds, which
// keep more users.
UserFilter filter_users(const std::vector<PostRecord>& posts,
                        std::size_t target_size);

// B = 1 - |A n P| / |A u P|. Errors when both sets are empty.
double broadcasticity(const std::unordered_set<std::string>& active,
                      const std::unordered_set<std::string>& popular);

struct SmallWorldResult {
  double mean_path = 0.0;      // E[L] over connected ordered pairs
  double critical_path = 0.0;  // E_c[L] = log10(N)
  bool small_world = false;    // E[L] <= E_c[L]
  std::size_t pairs_used = 0;
  double path_stddev = 0.0;
  bool exact = false;
};

// Shortest paths on the undirected projection: exact all-pairs BFS up to
// `exact_threshold` users, uniform ordered-pair sampling above it. Sampled
// pairs are drawn from the seed up front, so the result is independent of
// the BFS thread count.
SmallWorldResult small_world_check(const SocialGraph& graph,
                                   std::size_t sample_pairs,
                                   std::uint64_t seed,
                                   std::size_t exact_threshold = 2000);

struct DatasetStats {
  std::map<std::string, std::size_t> post_counts_by_kind;
  double broadcasticity = 0.0;
  SmallWorldResult small_world;
  // Average posts per slice (rounded to nearest integer) -> user count,
  // over the dataset's users.
  std::map<long, std::size_t> activity_histogram;
};

DatasetStats dataset_stats(const std::vector<PostRecord>& posts,
                           const SocialGraph& graph, const UserFilter& filter,
                           const SliceDataset& slices,
                           std::size_t sample_pairs = 20000,
                           std::uint64_t seed = 1);

// One row per statistic.
void write_stats_csv(const std::string& path, const DatasetStats& stats,
                     const UserFilter& filter);

}  // namespace casc
