#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "casc/common.hpp"
#include "casc/graph.hpp"
#include "casc/posts.hpp"

using namespace casc;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content)
      : path(name) {
    std::ofstream os(path);
    os << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("parse_post_log maps fields") {
  TempFile f("posts_basic.jsonl",
             R"({"ts":100,"author":"u1","kind":"retweet","target":"u2"})"
             "\n"
             R"({"ts":50,"author":"u2","kind":"tweet"})"
             "\n");
  ParseReport report;
  const auto posts = parse_post_log(f.path, &report);
  REQUIRE(posts.size() == 2);
  CHECK(report.malformed_lines == 0);
  // sorted by timestamp
  CHECK(posts[0].timestamp == 50);
  CHECK(posts[0].author == "u2");
  CHECK(posts[0].kind == PostKind::tweet);
  CHECK(!posts[0].target.has_value());
  CHECK(posts[1].timestamp == 100);
  CHECK(posts[1].author == "u1");
  CHECK(posts[1].kind == PostKind::retweet);
  CHECK(posts[1].target == "u2");
}

TEST_CASE("tweet with a target is malformed") {
  TempFile f("posts_badtweet.jsonl",
             R"({"ts":1,"author":"u1","kind":"tweet","target":"u2"})"
             "\n"
             R"({"ts":2,"author":"u1","kind":"reply"})"
             "\n"
             R"({"ts":3,"author":"u1","kind":"mention","target":"u2"})"
             "\n");
  ParseReport report;
  // two bad lines out of three exceed the default 1% tolerance
  CHECK_THROWS_AS(parse_post_log(f.path, &report), CascError);
  const auto posts = parse_post_log(f.path, &report, /*tolerance=*/0.9);
  REQUIRE(posts.size() == 1);
  CHECK(report.malformed_lines == 2);
  CHECK(posts[0].kind == PostKind::mention);
}

TEST_CASE("empty file parses to an empty list") {
  TempFile f("posts_empty.jsonl", "");
  ParseReport report;
  const auto posts = parse_post_log(f.path, &report);
  CHECK(posts.empty());
  CHECK(report.total_lines == 0);
  CHECK(report.malformed_lines == 0);
}

TEST_CASE("negative timestamps and unknown kinds are malformed") {
  TempFile f("posts_bad.jsonl",
             R"({"ts":-5,"author":"u1","kind":"tweet"})"
             "\n"
             R"({"ts":5,"author":"u1","kind":"boost"})"
             "\n"
             "not json at all\n");
  ParseReport report;
  const auto posts = parse_post_log(f.path, &report, 1.0);
  CHECK(posts.empty());
  CHECK(report.malformed_lines == 3);
}

TEST_CASE("missing file is fatal") {
  CHECK_THROWS_AS(parse_post_log("no_such_file.jsonl"), CascError);
}

TEST_CASE("write then parse is the identity on sorted records") {
  std::vector<PostRecord> records;
  records.push_back({10, "alice", PostKind::tweet, std::nullopt});
  records.push_back({20, "bob", PostKind::retweet, "alice"});
  records.push_back({20, "carol", PostKind::reply, "alice"});
  records.push_back({35, "alice", PostKind::mention, "bob"});
  write_post_log("posts_rt.jsonl", records);
  const auto parsed = parse_post_log("posts_rt.jsonl");
  CHECK(parsed == records);
  std::remove("posts_rt.jsonl");
}

TEST_CASE("mention graph deduplicates and follows record direction") {
  std::vector<PostRecord> posts;
  posts.push_back({1, "u1", PostKind::retweet, "u2"});
  posts.push_back({2, "u1", PostKind::reply, "u2"});
  posts.push_back({3, "u2", PostKind::retweet, "u1"});
  posts.push_back({4, "u3", PostKind::tweet, std::nullopt});
  const SocialGraph g = build_mention_graph(posts);
  CHECK(g.semantics() == GraphSemantics::mention);
  CHECK(g.edge_count() == 2);  // (u1,u2) deduplicated, (u2,u1)
  CHECK(g.has_edge(g.user_index("u1"), g.user_index("u2")));
  CHECK(g.has_edge(g.user_index("u2"), g.user_index("u1")));
  CHECK(!g.has_user("u3"));  // only tweeted
  CHECK(g.edge_count() <= 3);  // never exceeds reaction record count
}

TEST_CASE("mention graph of tweets only is empty") {
  std::vector<PostRecord> posts;
  posts.push_back({1, "u1", PostKind::tweet, std::nullopt});
  posts.push_back({2, "u2", PostKind::tweet, std::nullopt});
  const SocialGraph g = build_mention_graph(posts);
  CHECK(g.edge_count() == 0);
}

TEST_CASE("self reactions never create self loops") {
  std::vector<PostRecord> posts;
  posts.push_back({1, "u1", PostKind::retweet, "u1"});
  const SocialGraph g = build_mention_graph(posts);
  CHECK(g.edge_count() == 0);
}

TEST_CASE("follower graph load restricts to the universe and drops isolated users") {
  TempFile f("edges.tsv", "u1\tu2\nu1\tu2\nu2\tu9\nu3\tu3\n");
  EdgeLoadReport report;
  const auto g = load_follower_graph(f.path, {"u1", "u2", "u3"}, &report);
  CHECK(g.semantics() == GraphSemantics::follower);
  CHECK(g.edge_count() == 1);  // duplicate collapsed
  CHECK(report.skipped_unknown == 1);   // u2 -> u9
  CHECK(report.skipped_self_loops == 1);  // u3 -> u3
  CHECK(g.user_count() == 2);  // u3 has no surviving edges
  CHECK(g.has_user("u1"));
  CHECK(g.has_user("u2"));
  CHECK(!g.has_user("u3"));
}

TEST_CASE("empty edge file gives an empty graph") {
  TempFile f("edges_empty.tsv", "");
  const auto g = load_follower_graph(f.path, {"u1"});
  CHECK(g.user_count() == 0);
  CHECK(g.edge_count() == 0);
}

TEST_CASE("edge list round trip") {
  SocialGraph g(GraphSemantics::follower);
  g.add_edge("a", "b");
  g.add_edge("b", "c");
  g.add_edge("a", "c");
  write_edge_list("edges_rt.tsv", g);
  const auto g2 = load_follower_graph("edges_rt.tsv", {"a", "b", "c"});
  CHECK(g2.edge_count() == 3);
  CHECK(g2.has_edge(g2.user_index("a"), g2.user_index("b")));
  CHECK(g2.has_edge(g2.user_index("b"), g2.user_index("c")));
  CHECK(g2.has_edge(g2.user_index("a"), g2.user_index("c")));
  std::remove("edges_rt.tsv");
}
