#pragma once

#include <string>
#include <vector>

#include "casc/common.hpp"
#include "casc/graph.hpp"
#include "casc/slicing.hpp"

namespace casc {

enum class GenKind { per_user_markov, neighbor_driven, broadcast };
enum class InitState { stationary, all_active, all_silent };

// Synthetic cascade specification. Every draw comes from `seed`, so equal
// specs generate identical data.
struct GeneratorSpec {
  GenKind kind = GenKind::per_user_markov;
  Index n_users = 100;
  Index n_slices = 100;
  std::uint64_t seed = 1;
  std::int64_t delta_t = 43200;

  // per_user_markov: activity is an independent two-state chain per user,
  //   P(active next | inactive) = q01[u], P(active next | active) = q11[u].
  // Empty vectors mean "draw each uniformly from the seed".
  Vec q01;
  Vec q11;
  InitState init = InitState::stationary;

  // neighbor_driven: activity at i+1 ~ Bernoulli(logistic(W tau_i + bias)).
  // Either pass W/bias explicitly, or leave them empty to plant a community
  // structure: `communities` groups, each with `drivers_per_community`
  // source users whose spontaneous rate is `driver_rate`, and followers
  // that listen to every driver of their group with weight
  // `follower_weight` and bias -follower_weight * threshold_offset (a
  // follower needs more than `threshold_offset` active drivers to likely
  // react). With `driver_coupling` > 0 the drivers of a community also
  // excite each other, which turns isolated firing into multi-slice
  // community flares.
  // With `driver_coupling` > 0 the drivers of the first
  // `coupled_communities` groups excite each other (driver_rate then acts
  // as the spontaneous ignition rate), producing multi-slice flares; the
  // remaining groups keep independent drivers firing at `iid_driver_rate`.
  // With `follower_coupling` > 0 followers also excite their co-followers.
  Mat weights;  // weights(u, v) = influence of v on u
  Vec bias;
  Index communities = 10;
  Index drivers_per_community = 9;
  double driver_rate = 0.3;
  double driver_coupling = 0.0;
  Index coupled_communities = -1;  // -1: all when driver_coupling > 0
  double iid_driver_rate = 0.3;
  double follower_weight = 6.0;
  double follower_coupling = 0.0;
  double threshold_offset = 4.5;

  // broadcast: the first `seed_users` users tweet every slice; each other
  // user follows all of them and reacts independently with probability
  // `reaction_prob`; non-followers never react.
  Index seed_users = 5;
  double reaction_prob = 1.0;
};

struct GroundTruth {
  std::vector<std::string> users;
  Vec q01, q11;               // markov
  Mat weights;                // neighbor_driven
  Vec bias;                   // neighbor_driven
  std::vector<Index> community;  // -1 for drivers/none
  std::vector<bool> is_driver;
};

struct Generated {
  SliceDataset dataset;
  SocialGraph graph;
  GroundTruth truth;
  std::vector<PostRecord> posts;  // same content as the emitted log files
};

Generated generate(const GeneratorSpec& spec);

// Expected F1 of the best per-user threshold rule on a per_user_markov
// spec, computed from the chain parameters and stationary masses by an
// exhaustive sweep over probability superlevel sets.
double bayes_optimal_f1(const GeneratorSpec& spec);

// Flat key=value spec files for the CLI.
GeneratorSpec load_generator_spec(const std::string& path);
void save_generator_spec(const std::string& path, const GeneratorSpec& spec);

}  // namespace casc
