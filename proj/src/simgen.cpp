#include "casc/simgen.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "casc/numerics/functions.hpp"
#include "casc/rng.hpp"

namespace casc {

namespace {

std::vector<std::string> make_user_ids(Index n) {
  int width = 1;
  for (Index v = n - 1; v >= 10; v /= 10) ++width;
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    std::string num = std::to_string(i);
    ids.push_back("u" + std::string(static_cast<std::size_t>(width) - num.size(), '0') + num);
  }
  return ids;
}

// Stationary activity mass of a two-state chain; falls back to the initial
// state when the chain is frozen (q01 = 0, q11 = 1).
double stationary_active(double q01, double q11, InitState init) {
  const double denom = q01 + (1.0 - q11);
  if (denom > 0.0) return q01 / denom;
  switch (init) {
    case InitState::all_active: return 1.0;
    case InitState::all_silent: return 0.0;
    case InitState::stationary: return 0.5;
  }
  return 0.5;
}

void materialize_markov(const GeneratorSpec& spec, Vec& q01, Vec& q11) {
  Rng rng = Rng(spec.seed).derive(0xa11ce);
  auto fill = [&](const Vec& given, Vec& out) {
    if (given.size() == spec.n_users) {
      out = given;
    } else {
      require(given.size() == 0, "generate: q vector length mismatch");
      out.resize(spec.n_users);
      for (Index u = 0; u < spec.n_users; ++u) out[u] = rng.uniform01();
    }
  };
  fill(spec.q01, q01);
  fill(spec.q11, q11);
  require((q01.array() >= 0).all() && (q01.array() <= 1).all() &&
              (q11.array() >= 0).all() && (q11.array() <= 1).all(),
          "generate: markov probabilities outside [0,1]");
}

void plant_community_dynamic(const GeneratorSpec& spec, GroundTruth& truth) {
  const Index n = spec.n_users;
  truth.weights = Mat::Zero(n, n);
  truth.bias = Vec::Zero(n);
  truth.community.assign(static_cast<std::size_t>(n), -1);
  truth.is_driver.assign(static_cast<std::size_t>(n), false);

  const Index k = spec.communities;
  const Index nd = spec.drivers_per_community;
  require(k >= 1 && nd >= 1 && k * nd < n,
          "generate: community layout does not fit n_users");
  // Users [0, k*nd) are drivers, the rest are followers dealt round-robin.
  const Index coupled = spec.driver_coupling <= 0.0 ? 0
                        : spec.coupled_communities < 0
                            ? k
                            : std::min(spec.coupled_communities, k);
  for (Index c = 0; c < k; ++c)
    for (Index j = 0; j < nd; ++j) {
      const Index u = c * nd + j;
      truth.community[static_cast<std::size_t>(u)] = c;
      truth.is_driver[static_cast<std::size_t>(u)] = true;
      // driver_rate governs ignition in coupled groups and firing in an
      // all-iid layout; iid_driver_rate applies to the iid groups of a
      // mixed layout only.
      const double rate = (coupled > 0 && c >= coupled) ? spec.iid_driver_rate
                                                        : spec.driver_rate;
      require(rate > 0.0 && rate < 1.0, "generate: driver rate outside (0,1)");
      truth.bias[u] = std::log(rate / (1.0 - rate));
      if (c < coupled)
        for (Index j2 = 0; j2 < nd; ++j2)
          if (j2 != j) truth.weights(u, c * nd + j2) = spec.driver_coupling;
    }
  for (Index u = k * nd; u < n; ++u) {
    const Index c = (u - k * nd) % k;
    truth.community[static_cast<std::size_t>(u)] = c;
    truth.bias[u] = -spec.follower_weight * spec.threshold_offset;
    for (Index j = 0; j < nd; ++j) truth.weights(u, c * nd + j) = spec.follower_weight;
  }
  if (spec.follower_coupling > 0.0)
    for (Index u = k * nd; u < n; ++u)
      for (Index v = k * nd; v < n; ++v)
        if (u != v && truth.community[static_cast<std::size_t>(u)] ==
                          truth.community[static_cast<std::size_t>(v)])
          truth.weights(u, v) = spec.follower_coupling;
}

}  // namespace

Generated generate(const GeneratorSpec& spec) {
  require(spec.n_users >= 1 && spec.n_slices >= 1, "generate: empty spec");
  require(spec.delta_t > 0, "generate: delta_t must be positive");
  Generated out;
  const Index n = spec.n_users;
  const Index t = spec.n_slices;
  const auto ids = make_user_ids(n);

  BinMat inputs = BinMat::Zero(t, n);
  BinMat targets = BinMat::Zero(t, n);
  SocialGraph graph(GraphSemantics::follower);
  for (const auto& id : ids) graph.add_user(id);

  Rng rng = Rng(spec.seed).derive(0x5e9);

  switch (spec.kind) {
    case GenKind::per_user_markov: {
      materialize_markov(spec, out.truth.q01, out.truth.q11);
      BinVec state(n);
      for (Index u = 0; u < n; ++u) {
        const double pi1 = stationary_active(out.truth.q01[u], out.truth.q11[u], spec.init);
        switch (spec.init) {
          case InitState::all_active: state[u] = 1; break;
          case InitState::all_silent: state[u] = 0; break;
          case InitState::stationary: state[u] = rng.bernoulli(pi1) ? 1 : 0; break;
        }
      }
      for (Index i = 0; i < t; ++i) {
        for (Index u = 0; u < n; ++u) {
          inputs(i, u) = state[u];
          targets(i, u) = state[u];  // every synthetic post is a reaction
        }
        BinVec next(n);
        for (Index u = 0; u < n; ++u) {
          const double p = state[u] ? out.truth.q11[u] : out.truth.q01[u];
          next[u] = rng.bernoulli(p) ? 1 : 0;
        }
        state = next;
      }
      break;
    }
    case GenKind::neighbor_driven: {
      if (spec.weights.size() > 0) {
        require(spec.weights.rows() == n && spec.weights.cols() == n &&
                    spec.bias.size() == n,
                "generate: explicit dynamic shape mismatch");
        out.truth.weights = spec.weights;
        out.truth.bias = spec.bias;
        out.truth.community.assign(static_cast<std::size_t>(n), -1);
        out.truth.is_driver.assign(static_cast<std::size_t>(n), false);
      } else {
        plant_community_dynamic(spec, out.truth);
      }
      for (Index u = 0; u < n; ++u)
        for (Index v = 0; v < n; ++v)
          if (u != v && out.truth.weights(u, v) != 0.0)
            graph.add_edge(ids[static_cast<std::size_t>(u)],
                           ids[static_cast<std::size_t>(v)]);
      BinVec state(n);
      for (Index u = 0; u < n; ++u)
        state[u] = rng.bernoulli(logistic(out.truth.bias[u])) ? 1 : 0;
      Vec drive(n);
      for (Index i = 0; i < t; ++i) {
        for (Index u = 0; u < n; ++u) {
          inputs(i, u) = state[u];
          targets(i, u) = state[u];
        }
        for (Index u = 0; u < n; ++u) {
          double acc = out.truth.bias[u];
          for (Index v = 0; v < n; ++v)
            if (out.truth.weights(u, v) != 0.0 && state[v]) acc += out.truth.weights(u, v);
          drive[u] = acc;
        }
        for (Index u = 0; u < n; ++u)
          state[u] = rng.bernoulli(logistic(drive[u])) ? 1 : 0;
      }
      break;
    }
    case GenKind::broadcast: {
      require(spec.seed_users >= 1 && spec.seed_users < n,
              "generate: seed_users out of range");
      require(spec.reaction_prob >= 0.0 && spec.reaction_prob <= 1.0,
              "generate: reaction_prob outside [0,1]");
      for (Index u = spec.seed_users; u < n; ++u)
        for (Index s = 0; s < spec.seed_users; ++s)
          graph.add_edge(ids[static_cast<std::size_t>(u)], ids[static_cast<std::size_t>(s)]);
      for (Index i = 0; i < t; ++i) {
        for (Index s = 0; s < spec.seed_users; ++s) inputs(i, s) = 1;
        for (Index u = spec.seed_users; u < n; ++u) {
          if (rng.bernoulli(spec.reaction_prob)) {
            inputs(i, u) = 1;
            targets(i, u) = 1;
          }
        }
      }
      break;
    }
  }

  // Posts: one per active (user, window) cell. Reactions target an active
  // neighbor from the previous window when one exists, so the mention
  // graph reconstructed from the log reflects the true influence edges.
  Rng target_rng = Rng(spec.seed).derive(0x7a6);
  std::vector<PostRecord> posts;
  if (!(inputs.row(0).array() != 0).any()) {
    // Ensure the first window is inhabited so re-ingestion sees it.
    inputs(0, 0) = 1;
  }
  // The earliest active user posts at t = 0 exactly, anchoring the slicer's
  // first window at the window grid.
  Index first_active = 0;
  while (!inputs(0, first_active)) ++first_active;
  for (Index i = 0; i < t; ++i) {
    for (Index u = 0; u < n; ++u) {
      if (!inputs(i, u)) continue;
      PostRecord rec;
      rec.timestamp = (i == 0 && u == first_active)
                          ? 0
                          : i * spec.delta_t + (u % spec.delta_t);
      rec.author = ids[static_cast<std::size_t>(u)];
      if (targets(i, u)) {
        rec.kind = PostKind::retweet;
        const auto& nbrs = graph.out_neighbors(static_cast<std::size_t>(u));
        Index chosen = -1;
        if (!nbrs.empty()) {
          // active previous-window neighbors first
          std::vector<std::size_t> active;
          if (i > 0)
            for (std::size_t v : nbrs)
              if (inputs(i - 1, static_cast<Index>(v))) active.push_back(v);
          if (!active.empty())
            chosen = static_cast<Index>(
                active[target_rng.uniform_below(active.size())]);
          else
            chosen = static_cast<Index>(nbrs[target_rng.uniform_below(nbrs.size())]);
        } else {
          chosen = (u + 1) % n;
        }
        rec.target = ids[static_cast<std::size_t>(chosen)];
      } else {
        rec.kind = PostKind::tweet;
      }
      posts.push_back(std::move(rec));
    }
  }
  // Closing tweet just past the final boundary so the last window is kept
  // as a full window by the slicer (the post itself lands in the dropped
  // partial window).
  PostRecord closing;
  closing.timestamp = t * spec.delta_t;
  closing.author = ids[0];
  closing.kind = PostKind::tweet;
  posts.push_back(closing);

  out.dataset.users = ids;
  out.dataset.delta_t = spec.delta_t;
  out.dataset.inputs = std::move(inputs);
  out.dataset.targets = std::move(targets);
  out.dataset.split = {0, 0, t};
  if (t >= 10) out.dataset.apply_chronological_split();
  out.truth.users = ids;
  out.graph = std::move(graph);
  out.posts = std::move(posts);
  return out;
}

double bayes_optimal_f1(const GeneratorSpec& spec) {
  require(spec.kind == GenKind::per_user_markov,
          "bayes_optimal_f1: closed form exists for per_user_markov only");
  Vec q01, q11;
  materialize_markov(spec, q01, q11);

  struct Cell {
    double mass;
    double prob;
  };
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(2 * spec.n_users));
  double total_pos = 0.0;
  for (Index u = 0; u < spec.n_users; ++u) {
    const double pi1 = stationary_active(q01[u], q11[u], spec.init);
    cells.push_back({pi1, q11[u]});
    cells.push_back({1.0 - pi1, q01[u]});
    total_pos += pi1 * q11[u] + (1.0 - pi1) * q01[u];
  }
  std::sort(cells.begin(), cells.end(),
            [](const Cell& a, const Cell& b) { return a.prob > b.prob; });

  double best = 0.0, tp = 0.0, fp = 0.0;
  for (const auto& c : cells) {
    tp += c.mass * c.prob;
    fp += c.mass * (1.0 - c.prob);
    const double fn = total_pos - tp;
    const double denom = 2.0 * tp + fp + fn;
    if (denom > 0.0) best = std::max(best, 2.0 * tp / denom);
  }
  return best;
}

namespace {

std::map<std::string, std::string> read_kv(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), "load_generator_spec: cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos,
            "load_generator_spec: expected key=value, got: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

}  // namespace

GeneratorSpec load_generator_spec(const std::string& path) {
  const auto kv = read_kv(path);
  GeneratorSpec spec;
  auto get = [&](const std::string& key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (const auto* v = get("kind")) {
    if (*v == "per_user_markov") spec.kind = GenKind::per_user_markov;
    else if (*v == "neighbor_driven") spec.kind = GenKind::neighbor_driven;
    else if (*v == "broadcast") spec.kind = GenKind::broadcast;
    else throw CascError("load_generator_spec: unknown kind " + *v);
  }
  if (const auto* v = get("init")) {
    if (*v == "stationary") spec.init = InitState::stationary;
    else if (*v == "all_active") spec.init = InitState::all_active;
    else if (*v == "all_silent") spec.init = InitState::all_silent;
    else throw CascError("load_generator_spec: unknown init " + *v);
  }
  auto get_ll = [&](const std::string& key, auto& field) {
    if (const auto* v = get(key)) field = static_cast<std::decay_t<decltype(field)>>(std::stoll(*v));
  };
  auto get_d = [&](const std::string& key, double& field) {
    if (const auto* v = get(key)) field = std::stod(*v);
  };
  get_ll("n_users", spec.n_users);
  get_ll("n_slices", spec.n_slices);
  get_ll("seed", spec.seed);
  get_ll("delta_t", spec.delta_t);
  get_ll("communities", spec.communities);
  get_ll("drivers_per_community", spec.drivers_per_community);
  get_ll("seed_users", spec.seed_users);
  get_d("driver_rate", spec.driver_rate);
  get_d("follower_weight", spec.follower_weight);
  get_d("threshold_offset", spec.threshold_offset);
  get_d("reaction_prob", spec.reaction_prob);
  // Scalar q01/q11 apply to every user; "uniform" (the default) leaves the
  // vector empty so generate() draws per-user values from the seed.
  auto get_q = [&](const std::string& key, Vec& field) {
    const auto* v = get(key);
    if (!v || *v == "uniform") return;
    field = Vec::Constant(spec.n_users, std::stod(*v));
  };
  get_q("q01", spec.q01);
  get_q("q11", spec.q11);
  return spec;
}

void save_generator_spec(const std::string& path, const GeneratorSpec& spec) {
  std::ofstream os(path);
  require(os.good(), "save_generator_spec: cannot open " + path);
  const char* kind = spec.kind == GenKind::per_user_markov ? "per_user_markov"
                     : spec.kind == GenKind::neighbor_driven ? "neighbor_driven"
                                                             : "broadcast";
  const char* init = spec.init == InitState::stationary    ? "stationary"
                     : spec.init == InitState::all_active ? "all_active"
                                                          : "all_silent";
  os << "kind=" << kind << '\n'
     << "n_users=" << spec.n_users << '\n'
     << "n_slices=" << spec.n_slices << '\n'
     << "seed=" << spec.seed << '\n'
     << "delta_t=" << spec.delta_t << '\n'
     << "init=" << init << '\n';
  if (spec.kind == GenKind::per_user_markov) {
    if (spec.q01.size() > 0) os << "q01=" << spec.q01[0] << '\n';
    if (spec.q11.size() > 0) os << "q11=" << spec.q11[0] << '\n';
  } else if (spec.kind == GenKind::neighbor_driven) {
    os << "communities=" << spec.communities << '\n'
       << "drivers_per_community=" << spec.drivers_per_community << '\n'
       << "driver_rate=" << spec.driver_rate << '\n'
       << "follower_weight=" << spec.follower_weight << '\n'
       << "threshold_offset=" << spec.threshold_offset << '\n';
  } else {
    os << "seed_users=" << spec.seed_users << '\n'
       << "reaction_prob=" << spec.reaction_prob << '\n';
  }
  require(os.good(), "save_generator_spec: write failed for " + path);
}

}  // namespace casc
