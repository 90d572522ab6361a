#include "casc/graph.hpp"

#include <fstream>

#include "casc/common.hpp"

namespace casc {

std::size_t SocialGraph::add_user(const std::string& id) {
  auto it = index_.find(id);
  if (it != index_.end()) return it->second;
  const std::size_t ix = users_.size();
  users_.push_back(id);
  index_.emplace(id, ix);
  out_.emplace_back();
  in_.emplace_back();
  out_set_.emplace_back();
  return ix;
}

bool SocialGraph::add_edge(const std::string& from, const std::string& to) {
  if (from == to) return false;
  const std::size_t u = add_user(from);
  const std::size_t v = add_user(to);
  if (out_set_[u].count(v)) return false;
  out_set_[u].insert(v);
  out_[u].push_back(v);
  in_[v].push_back(u);
  ++edge_count_;
  return true;
}

std::size_t SocialGraph::user_index(const std::string& id) const {
  auto it = index_.find(id);
  require(it != index_.end(), "SocialGraph: unknown user " + id);
  return it->second;
}

bool SocialGraph::has_edge(std::size_t u, std::size_t v) const {
  return u < out_set_.size() && out_set_[u].count(v) > 0;
}

SocialGraph SocialGraph::restricted_to(
    const std::unordered_set<std::string>& keep) const {
  SocialGraph g(semantics_);
  for (std::size_t u = 0; u < users_.size(); ++u) {
    if (!keep.count(users_[u])) continue;
    for (std::size_t v : out_[u])
      if (keep.count(users_[v])) g.add_edge(users_[u], users_[v]);
  }
  return g;
}

SocialGraph build_mention_graph(const std::vector<PostRecord>& posts) {
  SocialGraph g(GraphSemantics::mention);
  for (const auto& p : posts) {
    if (!is_reaction(p.kind) || !p.target) continue;
    g.add_edge(p.author, *p.target);
  }
  return g;
}

SocialGraph load_follower_graph(const std::string& path,
                                const std::unordered_set<std::string>& universe,
                                EdgeLoadReport* report) {
  std::ifstream is(path);
  require(is.good(), "load_follower_graph: cannot open " + path);
  EdgeLoadReport local;
  SocialGraph g(GraphSemantics::follower);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    require(tab != std::string::npos,
            "load_follower_graph: missing tab in line: " + line.substr(0, 80));
    const std::string follower = line.substr(0, tab);
    const std::string followee = line.substr(tab + 1);
    if (!universe.count(follower) || !universe.count(followee)) {
      ++local.skipped_unknown;
      continue;
    }
    if (follower == followee) {
      ++local.skipped_self_loops;
      continue;
    }
    g.add_edge(follower, followee);
  }
  // add_edge only materializes endpoint users, so zero-degree users never
  // enter the graph.
  if (report) *report = local;
  return g;
}

void write_edge_list(const std::string& path, const SocialGraph& graph) {
  std::ofstream os(path);
  require(os.good(), "write_edge_list: cannot open " + path);
  for (std::size_t u = 0; u < graph.user_count(); ++u)
    for (std::size_t v : graph.out_neighbors(u))
      os << graph.users()[u] << '\t' << graph.users()[v] << '\n';
  require(os.good(), "write_edge_list: write failed for " + path);
}

}  // namespace casc
