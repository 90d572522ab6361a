#include "casc/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <unordered_map>

#include "casc/common.hpp"
#include "casc/rng.hpp"
#include "casc/slicing.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace casc {

namespace {

// Per-user totals over the whole log: posts authored and reactions received.
struct UserCounts {
  std::vector<std::string> users;  // sorted
  std::vector<std::int64_t> posts;
  std::vector<std::int64_t> reactions;
};

UserCounts tally(const std::vector<PostRecord>& posts) {
  std::unordered_map<std::string, std::pair<std::int64_t, std::int64_t>> acc;
  for (const auto& p : posts) {
    acc[p.author].first += 1;
    if (is_reaction(p.kind) && p.target) acc[*p.target].second += 1;
  }
  UserCounts uc;
  uc.users.reserve(acc.size());
  for (const auto& [id, _] : acc) uc.users.push_back(id);
  std::sort(uc.users.begin(), uc.users.end());
  uc.posts.reserve(uc.users.size());
  uc.reactions.reserve(uc.users.size());
  for (const auto& id : uc.users) {
    uc.posts.push_back(acc[id].first);
    uc.reactions.push_back(acc[id].second);
  }
  return uc;
}

// Distinct observed values, thinned to at most `max_levels` quantile levels.
std::vector<std::int64_t> quantile_levels(std::vector<std::int64_t> values,
                                          std::size_t max_levels = 512) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (values.size() <= max_levels) return values;
  std::vector<std::int64_t> out;
  out.reserve(max_levels);
  for (std::size_t k = 0; k < max_levels; ++k) {
    const std::size_t ix = k * (values.size() - 1) / (max_levels - 1);
    if (out.empty() || values[ix] != out.back()) out.push_back(values[ix]);
  }
  return out;
}

}  // namespace

UserFilter filter_users(const std::vector<PostRecord>& posts,
                        std::size_t target_size) {
  require(target_size >= 1, "filter_users: target_size must be >= 1");
  UserCounts uc = tally(posts);
  const std::size_t n = uc.users.size();

  UserFilter out;
  auto materialize = [&](std::int64_t a, std::int64_t p) {
    out.activity_threshold = a;
    out.popularity_threshold = p;
    out.active.clear();
    out.popular.clear();
    out.kept.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const bool in_a = uc.posts[i] >= a;
      const bool in_p = uc.reactions[i] >= p;
      if (in_a) out.active.insert(uc.users[i]);
      if (in_p) out.popular.insert(uc.users[i]);
      if (in_a || in_p) out.kept.push_back(uc.users[i]);
    }
  };

  if (n <= target_size) {
    // Nothing to trim: keep every user that posted or was reacted to.
    out.degenerate = true;
    materialize(1, 1);
    return out;
  }

  const auto a_levels = quantile_levels(uc.posts);
  const auto p_levels = quantile_levels(uc.reactions);

  // Order users by post count so |A u P| for (a, p) can be counted as
  // |A| + (users below a whose reaction count >= p), via a suffix count
  // over reaction levels rebuilt incrementally.
  std::vector<std::size_t> by_posts(n);
  for (std::size_t i = 0; i < n; ++i) by_posts[i] = i;
  std::sort(by_posts.begin(), by_posts.end(), [&](std::size_t x, std::size_t y) {
    return uc.posts[x] < uc.posts[y];
  });

  auto reaction_level = [&](std::int64_t r) {
    // index of the largest level <= r, or -1
    auto it = std::upper_bound(p_levels.begin(), p_levels.end(), r);
    return static_cast<std::ptrdiff_t>(it - p_levels.begin()) - 1;
  };

  std::int64_t best_err = -1;
  std::int64_t best_a = 0, best_p = 0;
  // Sweep a from the smallest level upward; users dropping out of A are
  // exactly those with posts < a, accumulated in a histogram over their
  // reaction levels.
  std::vector<std::int64_t> below_hist(p_levels.size() + 1, 0);
  std::size_t cursor = 0;  // next user (by posts) not yet below threshold
  for (std::int64_t a : a_levels) {
    while (cursor < n && uc.posts[by_posts[cursor]] < a) {
      below_hist[static_cast<std::size_t>(
          reaction_level(uc.reactions[by_posts[cursor]]) + 1)]++;
      ++cursor;
    }
    const std::int64_t size_a = static_cast<std::int64_t>(n - cursor);
    // suffix over levels: users below a with reactions >= p_levels[j]
    std::int64_t suffix = 0;
    std::vector<std::int64_t> suffix_at(p_levels.size(), 0);
    for (std::size_t j = p_levels.size(); j-- > 0;) {
      suffix += below_hist[j + 1];
      suffix_at[j] = suffix;
    }
    for (std::size_t j = 0; j < p_levels.size(); ++j) {
      const std::int64_t union_size = size_a + suffix_at[j];
      const std::int64_t err =
          std::llabs(union_size - static_cast<std::int64_t>(target_size));
      const std::int64_t p = p_levels[j];
      if (best_err < 0 || err < best_err ||
          (err == best_err &&
           (a < best_a || (a == best_a && p < best_p)))) {
        best_err = err;
        best_a = a;
        best_p = p;
      }
    }
  }
  materialize(best_a, best_p);
  return out;
}

double broadcasticity(const std::unordered_set<std::string>& active,
                      const std::unordered_set<std::string>& popular) {
  require(!active.empty() || !popular.empty(),
          "broadcasticity: both sets empty");
  std::size_t inter = 0;
  const auto& small = active.size() <= popular.size() ? active : popular;
  const auto& large = active.size() <= popular.size() ? popular : active;
  for (const auto& u : small) inter += large.count(u);
  const std::size_t uni = active.size() + popular.size() - inter;
  return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

// Undirected adjacency in CSR-ish form for BFS.
struct UndirectedView {
  std::vector<std::vector<std::int32_t>> adj;
};

UndirectedView undirected_projection(const SocialGraph& g) {
  UndirectedView v;
  v.adj.resize(g.user_count());
  for (std::size_t u = 0; u < g.user_count(); ++u) {
    for (std::size_t w : g.out_neighbors(u)) {
      v.adj[u].push_back(static_cast<std::int32_t>(w));
      v.adj[w].push_back(static_cast<std::int32_t>(u));
    }
  }
  for (auto& nbrs : v.adj) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
  return v;
}

// Distances from one source; -1 marks unreachable.
std::vector<std::int32_t> bfs(const UndirectedView& g, std::int32_t src) {
  std::vector<std::int32_t> dist(g.adj.size(), -1);
  std::deque<std::int32_t> queue{src};
  dist[static_cast<std::size_t>(src)] = 0;
  while (!queue.empty()) {
    const std::int32_t u = queue.front();
    queue.pop_front();
    for (std::int32_t w : g.adj[static_cast<std::size_t>(u)]) {
      if (dist[static_cast<std::size_t>(w)] < 0) {
        dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(u)] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

}  // namespace

SmallWorldResult small_world_check(const SocialGraph& graph,
                                   std::size_t sample_pairs,
                                   std::uint64_t seed,
                                   std::size_t exact_threshold) {
  const std::size_t n = graph.user_count();
  require(n >= 2, "small_world_check: need at least 2 users");
  const UndirectedView view = undirected_projection(graph);

  double sum = 0.0, sum_sq = 0.0;
  std::size_t pairs = 0;
  SmallWorldResult res;

  if (n <= exact_threshold) {
    res.exact = true;
    const std::int64_t nn = static_cast<std::int64_t>(n);
    std::vector<double> partial_sum(n, 0.0), partial_sq(n, 0.0);
    std::vector<std::size_t> partial_cnt(n, 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
    for (std::int64_t s = 0; s < nn; ++s) {
      const auto dist = bfs(view, static_cast<std::int32_t>(s));
      for (std::size_t t = 0; t < n; ++t) {
        if (t == static_cast<std::size_t>(s) || dist[t] < 0) continue;
        partial_sum[static_cast<std::size_t>(s)] += dist[t];
        partial_sq[static_cast<std::size_t>(s)] +=
            static_cast<double>(dist[t]) * dist[t];
        partial_cnt[static_cast<std::size_t>(s)] += 1;
      }
    }
    // Sequential reduce keeps the result independent of thread count.
    for (std::size_t s = 0; s < n; ++s) {
      sum += partial_sum[s];
      sum_sq += partial_sq[s];
      pairs += partial_cnt[s];
    }
  } else {
    // All pairs are drawn from the seed before any BFS runs.
    Rng rng(seed);
    std::vector<std::pair<std::int32_t, std::int32_t>> sampled;
    sampled.reserve(sample_pairs);
    for (std::size_t k = 0; k < sample_pairs; ++k) {
      const auto s = static_cast<std::int32_t>(rng.uniform_below(n));
      auto t = static_cast<std::int32_t>(rng.uniform_below(n - 1));
      if (t >= s) ++t;
      sampled.emplace_back(s, t);
    }
    std::sort(sampled.begin(), sampled.end());
    std::vector<std::int32_t> dists(sampled.size(), -1);
#ifdef _OPENMP
#pragma omp parallel
#endif
    {
      std::vector<std::int32_t> dist;
      std::int32_t have_src = -1;
#ifdef _OPENMP
#pragma omp for schedule(dynamic, 32)
#endif
      for (std::int64_t k = 0; k < static_cast<std::int64_t>(sampled.size()); ++k) {
        if (sampled[static_cast<std::size_t>(k)].first != have_src) {
          have_src = sampled[static_cast<std::size_t>(k)].first;
          dist = bfs(view, have_src);
        }
        dists[static_cast<std::size_t>(k)] =
            dist[static_cast<std::size_t>(sampled[static_cast<std::size_t>(k)].second)];
      }
    }
    for (const auto d : dists) {
      if (d < 0) continue;
      sum += d;
      sum_sq += static_cast<double>(d) * d;
      ++pairs;
    }
  }

  require(pairs > 0, "small_world_check: no connected pair");
  res.mean_path = sum / static_cast<double>(pairs);
  res.pairs_used = pairs;
  const double var =
      sum_sq / static_cast<double>(pairs) - res.mean_path * res.mean_path;
  res.path_stddev = std::sqrt(std::max(0.0, var));
  res.critical_path = std::log10(static_cast<double>(n));
  res.small_world = res.mean_path <= res.critical_path;
  return res;
}

DatasetStats dataset_stats(const std::vector<PostRecord>& posts,
                           const SocialGraph& graph, const UserFilter& filter,
                           const SliceDataset& slices,
                           std::size_t sample_pairs, std::uint64_t seed) {
  DatasetStats stats;
  stats.post_counts_by_kind = {{"tweet", 0}, {"retweet", 0}, {"reply", 0}, {"mention", 0}};
  std::unordered_map<std::string, std::size_t> posts_per_user;
  for (const auto& p : posts) {
    stats.post_counts_by_kind[to_string(p.kind)] += 1;
    posts_per_user[p.author] += 1;
  }
  stats.broadcasticity = broadcasticity(filter.active, filter.popular);
  if (graph.user_count() >= 2)
    stats.small_world = small_world_check(graph, sample_pairs, seed);

  // Average posts per slice, rounded, over the dataset's users (Fig.-4
  // style histogram).
  const double n_slices = static_cast<double>(std::max<Index>(1, slices.n_slices()));
  for (const auto& u : slices.users) {
    const auto it = posts_per_user.find(u);
    const double avg = it == posts_per_user.end()
                           ? 0.0
                           : static_cast<double>(it->second) / n_slices;
    stats.activity_histogram[static_cast<long>(std::llround(avg))] += 1;
  }
  return stats;
}

void write_stats_csv(const std::string& path, const DatasetStats& stats,
                     const UserFilter& filter) {
  std::ofstream os(path);
  require(os.good(), "write_stats_csv: cannot open " + path);
  os << "statistic,value\n";
  for (const auto& [kind, count] : stats.post_counts_by_kind)
    os << "posts_" << kind << ',' << count << '\n';
  os << "activity_threshold," << filter.activity_threshold << '\n';
  os << "popularity_threshold," << filter.popularity_threshold << '\n';
  os << "active_users," << filter.active.size() << '\n';
  os << "popular_users," << filter.popular.size() << '\n';
  os << "kept_users," << filter.kept.size() << '\n';
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", stats.broadcasticity);
  os << "broadcasticity," << buf << '\n';
  std::snprintf(buf, sizeof(buf), "%.6f", stats.small_world.mean_path);
  os << "mean_shortest_path," << buf << '\n';
  std::snprintf(buf, sizeof(buf), "%.6f", stats.small_world.critical_path);
  os << "critical_path," << buf << '\n';
  os << "small_world," << (stats.small_world.small_world ? 1 : 0) << '\n';
  for (const auto& [bucket, count] : stats.activity_histogram)
    os << "activity_hist_" << bucket << ',' << count << '\n';
  require(os.good(), "write_stats_csv: write failed for " + path);
}

}  // namespace casc
