#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "casc/posts.hpp"

namespace casc {

enum class GraphSemantics { mention, follower };

// Directed user graph. An edge u -> v means "u reacts to / follows v",
// i.e. v is one of the users that can influence u.
class SocialGraph {
 public:
  SocialGraph() = default;
  explicit SocialGraph(GraphSemantics semantics) : semantics_(semantics) {}

  GraphSemantics semantics() const { return semantics_; }

  // Adds users/edges; duplicate edges and self-loops are ignored.
  std::size_t add_user(const std::string& id);
  bool add_edge(const std::string& from, const std::string& to);

  bool has_user(const std::string& id) const { return index_.count(id) > 0; }
  std::size_t user_index(const std::string& id) const;
  const std::vector<std::string>& users() const { return users_; }
  std::size_t user_count() const { return users_.size(); }
  std::size_t edge_count() const { return edge_count_; }

  // Out-neighborhood N(u): the users u reacts to / follows.
  const std::vector<std::size_t>& out_neighbors(std::size_t u) const {
    return out_[u];
  }
  const std::vector<std::size_t>& in_neighbors(std::size_t u) const {
    return in_[u];
  }
  bool has_edge(std::size_t u, std::size_t v) const;

  // Restricts to the given user set, dropping users that end up with no
  // edges in either direction.
  SocialGraph restricted_to(const std::unordered_set<std::string>& keep) const;

 private:
  GraphSemantics semantics_ = GraphSemantics::mention;
  std::vector<std::string> users_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  std::vector<std::unordered_set<std::size_t>> out_set_;
  std::size_t edge_count_ = 0;
};

// One edge per reaction record: (author -> target), deduplicated.
SocialGraph build_mention_graph(const std::vector<PostRecord>& posts);

struct EdgeLoadReport {
  std::size_t skipped_unknown = 0;
  std::size_t skipped_self_loops = 0;
};

// Tab-separated "follower<TAB>followee" lines. Edges touching users outside
// `universe` are skipped with a warning count; users left with no edges in
// either direction are dropped.
SocialGraph load_follower_graph(const std::string& path,
                                const std::unordered_set<std::string>& universe,
                                EdgeLoadReport* report = nullptr);

void write_edge_list(const std::string& path, const SocialGraph& graph);

}  // namespace casc
