#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "casc/ingest.hpp"
#include "casc/rng.hpp"
#include "casc/slicing.hpp"

using namespace casc;

namespace {

PostRecord reaction(std::int64_t ts, const std::string& who, const std::string& to) {
  return {ts, who, PostKind::retweet, to};
}
PostRecord tweet(std::int64_t ts, const std::string& who) {
  return {ts, who, PostKind::tweet, std::nullopt};
}

// Brute-force reference for filter_users: try every observed threshold
// pair, same tie rule (smaller error, then smaller a, then smaller p).
std::pair<std::int64_t, std::int64_t> sweep_oracle(
    const std::vector<PostRecord>& posts, std::size_t target) {
  std::map<std::string, std::int64_t> pc, rc;
  for (const auto& p : posts) {
    pc[p.author] += 1;
    rc[p.author] += 0;
    if (p.target) {
      pc[*p.target] += 0;
      rc[*p.target] += 1;
    }
  }
  std::set<std::int64_t> as, ps;
  for (const auto& [u, c] : pc) as.insert(c);
  for (const auto& [u, c] : rc) ps.insert(c);
  std::int64_t best_err = -1, best_a = 0, best_p = 0;
  for (const auto a : as) {
    for (const auto p : ps) {
      std::int64_t uni = 0;
      for (const auto& [u, c] : pc)
        if (c >= a || rc[u] >= p) ++uni;
      const std::int64_t err = std::llabs(uni - static_cast<std::int64_t>(target));
      if (best_err < 0 || err < best_err ||
          (err == best_err && (a < best_a || (a == best_a && p < best_p)))) {
        best_err = err;
        best_a = a;
        best_p = p;
      }
    }
  }
  return {best_a, best_p};
}

}  // namespace

TEST_CASE("filter_users on the heavy-poster / popular-user toy input") {
  // u1 posts 5 reactions, u2 and u3 two each, all targeting u4: u4 is
  // reacted to 9 times and never posts.
  std::vector<PostRecord> posts;
  for (int i = 0; i < 5; ++i) posts.push_back(reaction(i, "u1", "u4"));
  for (int i = 0; i < 2; ++i) posts.push_back(reaction(10 + i, "u2", "u4"));
  for (int i = 0; i < 2; ++i) posts.push_back(reaction(20 + i, "u3", "u4"));

  const UserFilter f = filter_users(posts, 2);
  CHECK(f.activity_threshold == 5);
  CHECK(f.popularity_threshold == 9);
  CHECK(f.active == std::unordered_set<std::string>{"u1"});
  CHECK(f.popular == std::unordered_set<std::string>{"u4"});
  CHECK(f.kept == std::vector<std::string>{"u1", "u4"});

  const auto [oa, op] = sweep_oracle(posts, 2);
  CHECK(f.activity_threshold == oa);
  CHECK(f.popularity_threshold == op);
}

TEST_CASE("filter_users keeps everyone when the target covers all users") {
  std::vector<PostRecord> posts;
  posts.push_back(tweet(0, "u1"));
  posts.push_back(reaction(1, "u2", "u1"));
  const UserFilter f = filter_users(posts, 10);
  CHECK(f.degenerate);
  CHECK(f.kept == std::vector<std::string>{"u1", "u2"});
}

TEST_CASE("filter_users with identical activity keeps the all side") {
  std::vector<PostRecord> posts;
  for (int u = 0; u < 4; ++u)
    for (int k = 0; k < 3; ++k)
      posts.push_back(tweet(u * 10 + k, "u" + std::to_string(u)));
  const UserFilter f = filter_users(posts, 2);
  // only observed thresholds are candidates, so every user stays
  CHECK(f.kept.size() == 4);
  const auto [oa, op] = sweep_oracle(posts, 2);
  CHECK(f.activity_threshold == oa);
  CHECK(f.popularity_threshold == op);
}

TEST_CASE("filter_users matches the sweep oracle on random logs") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<PostRecord> posts;
    const int n_users = 12;
    std::int64_t ts = 0;
    for (int u = 0; u < n_users; ++u) {
      const int n_posts = static_cast<int>(rng.uniform_below(6));
      for (int k = 0; k < n_posts; ++k) {
        const int target = static_cast<int>(rng.uniform_below(n_users));
        if (target == u || rng.uniform01() < 0.3)
          posts.push_back(tweet(ts++, "u" + std::to_string(u)));
        else
          posts.push_back(reaction(ts++, "u" + std::to_string(u),
                                   "u" + std::to_string(target)));
      }
    }
    if (posts.empty()) continue;
    const std::size_t target = 1 + rng.uniform_below(6);
    const UserFilter f = filter_users(posts, target);
    if (f.degenerate) continue;
    const auto [oa, op] = sweep_oracle(posts, target);
    CHECK(f.activity_threshold == oa);
    CHECK(f.popularity_threshold == op);
  }
}

TEST_CASE("filter_users is deterministic") {
  std::vector<PostRecord> posts;
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const int u = static_cast<int>(rng.uniform_below(20));
    const int v = static_cast<int>(rng.uniform_below(20));
    if (u == v)
      posts.push_back(tweet(i, "u" + std::to_string(u)));
    else
      posts.push_back(reaction(i, "u" + std::to_string(u), "u" + std::to_string(v)));
  }
  const UserFilter a = filter_users(posts, 8);
  const UserFilter b = filter_users(posts, 8);
  CHECK(a.activity_threshold == b.activity_threshold);
  CHECK(a.popularity_threshold == b.popularity_threshold);
  CHECK(a.kept == b.kept);
}

TEST_CASE("broadcasticity formula") {
  CHECK(broadcasticity({"u1", "u2"}, {"u3", "u4"}) == doctest::Approx(1.0));
  CHECK(broadcasticity({"u1", "u2"}, {"u1", "u2"}) == doctest::Approx(0.0));
  CHECK(broadcasticity({"u1", "u2"}, {"u2", "u3"}) ==
        doctest::Approx(1.0 - 1.0 / 3.0).epsilon(1e-12));
  CHECK_THROWS_AS(broadcasticity({}, {}), CascError);
}

TEST_CASE("broadcasticity is symmetric with 0/1 extremes") {
  Rng rng(123);
  for (int trial = 0; trial < 30; ++trial) {
    std::unordered_set<std::string> a, p;
    for (int u = 0; u < 12; ++u) {
      if (rng.uniform01() < 0.5) a.insert("u" + std::to_string(u));
      if (rng.uniform01() < 0.5) p.insert("u" + std::to_string(u));
    }
    if (a.empty() && p.empty()) continue;
    CHECK(broadcasticity(a, p) == doctest::Approx(broadcasticity(p, a)));
    bool disjoint = true, equal = a.size() == p.size();
    for (const auto& u : a) {
      if (p.count(u)) disjoint = false;
      else equal = false;
    }
    const double b = broadcasticity(a, p);
    if (equal) CHECK(b == doctest::Approx(0.0));
    if (disjoint) CHECK(b == doctest::Approx(1.0));
    if (!equal) CHECK(b > 0.0);
    if (!disjoint) CHECK(b < 1.0);
  }
}

TEST_CASE("small world check on a path graph") {
  SocialGraph g;
  g.add_edge("u1", "u2");
  g.add_edge("u2", "u3");
  const auto res = small_world_check(g, 1000, 1);
  CHECK(res.exact);
  CHECK(res.mean_path == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(res.pairs_used == 6);
}

TEST_CASE("small world check on a complete graph") {
  SocialGraph g;
  for (int u = 0; u < 4; ++u)
    for (int v = 0; v < 4; ++v)
      if (u != v) g.add_edge("u" + std::to_string(u), "u" + std::to_string(v));
  const auto res = small_world_check(g, 1000, 1);
  CHECK(res.mean_path == doctest::Approx(1.0));
  // tiny graphs fail the criterion: log10(4) = 0.602 < 1
  CHECK(!res.small_world);
}

TEST_CASE("critical path matches the published value for N=8990") {
  // E_c[L] = log10(8990) = 3.9538
  CHECK(std::log10(8990.0) == doctest::Approx(3.953).epsilon(2e-4));
}

TEST_CASE("disconnected pairs are excluded from the mean") {
  SocialGraph g;
  g.add_edge("a", "b");
  g.add_user("c");  // isolated
  const auto res = small_world_check(g, 100, 1);
  CHECK(res.mean_path == doctest::Approx(1.0));
  CHECK(res.pairs_used == 2);
}

TEST_CASE("sampled estimate agrees with exact BFS within 3 standard errors") {
  Rng rng(77);
  SocialGraph g;
  const int n = 300;
  // sparse random graph plus a spanning ring to stay connected
  for (int u = 0; u < n; ++u)
    g.add_edge("u" + std::to_string(u), "u" + std::to_string((u + 1) % n));
  for (int e = 0; e < 500; ++e) {
    const int u = static_cast<int>(rng.uniform_below(n));
    const int v = static_cast<int>(rng.uniform_below(n));
    if (u != v) g.add_edge("u" + std::to_string(u), "u" + std::to_string(v));
  }
  const auto exact = small_world_check(g, 0, 1);
  REQUIRE(exact.exact);
  const std::size_t samples = 4000;
  const auto sampled = small_world_check(g, samples, 9, /*exact_threshold=*/10);
  REQUIRE(!sampled.exact);
  const double se =
      sampled.path_stddev / std::sqrt(static_cast<double>(sampled.pairs_used));
  CHECK(std::abs(sampled.mean_path - exact.mean_path) <= 3.0 * se);
}

TEST_CASE("small world errors without a connected pair") {
  SocialGraph g;
  g.add_user("a");
  g.add_user("b");
  CHECK_THROWS_AS(small_world_check(g, 10, 1), CascError);
}

TEST_CASE("dataset_stats counts kinds and delegates broadcasticity") {
  std::vector<PostRecord> posts;
  posts.push_back(tweet(0, "u1"));
  posts.push_back(tweet(30, "u1"));
  posts.push_back(reaction(60, "u2", "u1"));
  const UserFilter f = filter_users(posts, 10);
  const SocialGraph g = build_mention_graph(posts);
  const SliceDataset ds = slice(posts, f.kept, 10);
  const DatasetStats stats = dataset_stats(posts, g, f, ds);
  CHECK(stats.post_counts_by_kind.at("tweet") == 2);
  CHECK(stats.post_counts_by_kind.at("retweet") == 1);
  CHECK(stats.post_counts_by_kind.at("reply") == 0);
  CHECK(stats.post_counts_by_kind.at("mention") == 0);
  CHECK(stats.broadcasticity == doctest::Approx(broadcasticity(f.active, f.popular)));
}

TEST_CASE("activity histogram: one user active once per slice") {
  std::vector<PostRecord> posts;
  for (int i = 0; i <= 10; ++i) posts.push_back(tweet(i * 10, "u1"));
  const UserFilter f = filter_users(posts, 10);
  const SliceDataset ds = slice(posts, {"u1"}, 10);  // 10 full windows
  REQUIRE(ds.n_slices() == 10);
  SocialGraph g;
  g.add_edge("u1", "u2");
  const DatasetStats stats = dataset_stats(posts, g, f, ds);
  // 11 posts over 10 slices rounds to 1
  REQUIRE(stats.activity_histogram.count(1) == 1);
  CHECK(stats.activity_histogram.at(1) == 1);
}
