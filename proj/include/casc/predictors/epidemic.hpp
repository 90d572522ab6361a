#pragma once

#include <string>
#include <vector>

#include "casc/common.hpp"
#include "casc/graph.hpp"

namespace casc {

enum class EpidemicKind { alo, lt };

// Out-neighborhoods N(u) re-indexed to a dataset's user ordering.
using NeighborLists = std::vector<std::vector<Index>>;
NeighborLists dataset_neighbors(const SocialGraph& graph,
                                const std::vector<std::string>& users);

// Parameters of the SI-style baselines. The influence matrix alpha is
// nonzero only on social-graph edges (alpha(u, v) = influence of v on u,
// for v in N(u)); the temporal factor defaults to the constant 1.
struct EpidemicParams {
  Vec beta;   // per-user prior, in [0, 1]
  Mat alpha;  // D x D influence, in [0, 1], supported on edges
  double gamma = 1.0;
  double sig_a = 1.0;  // sigmoid steepness (sign controls orientation)
  double sig_b = 0.5;  // sigmoid midpoint
  // Temporal component; the constant 1 unless use_temporal is set.
  bool use_temporal = false;
  Vec mu;
  Vec sigma2;
  double t_post = 1.0;

  Index n_users() const { return beta.size(); }
};

void validate_epidemic(const EpidemicParams& params);

// At-Least-One: the user stays inactive only if the prior channel and every
// active-neighbor channel all fail.
//   p_u = 1 - (1 - gamma beta_u) prod_{v in N(u)} (1 - gamma alpha_{v,u} tau_v)
double alo_probability(const EpidemicParams& params,
                       const NeighborLists& neighbors, Index u,
                       const BinVec& tau);

// Linear Threshold: aggregated influence through the (a, b) sigmoid, times
// the temporal factor.
//   A = sigma_{a,b}( gamma (beta_u + sum_{v in N(u)} gamma alpha_{v,u} tau_v) )
// (gamma appears twice, matching the published expression; with gamma = 1
// the duplication is inert.)
double lt_probability(const EpidemicParams& params,
                      const NeighborLists& neighbors, Index u,
                      const BinVec& tau);

// Strict threshold: react iff p_u > 0.5.
BinVec epidemic_predict(const EpidemicParams& params,
                        const NeighborLists& neighbors, const BinVec& tau,
                        EpidemicKind kind);

void save_epidemic_params(const std::string& path,
                          const EpidemicParams& params);
EpidemicParams load_epidemic_params(const std::string& path);

}  // namespace casc
