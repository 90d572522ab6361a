#include "casc/predictors/epidemic.hpp"

#include <unordered_map>

#include "casc/numerics/functions.hpp"
#include "casc/numerics/tensor.hpp"

namespace casc {

NeighborLists dataset_neighbors(const SocialGraph& graph,
                                const std::vector<std::string>& users) {
  NeighborLists out(users.size());
  std::unordered_map<std::string, Index> index;
  for (std::size_t i = 0; i < users.size(); ++i)
    index.emplace(users[i], static_cast<Index>(i));
  for (std::size_t gu = 0; gu < graph.user_count(); ++gu) {
    auto it = index.find(graph.users()[gu]);
    if (it == index.end()) continue;
    for (std::size_t gv : graph.out_neighbors(gu)) {
      auto jt = index.find(graph.users()[gv]);
      if (jt != index.end())
        out[static_cast<std::size_t>(it->second)].push_back(jt->second);
    }
  }
  for (auto& nbrs : out) std::sort(nbrs.begin(), nbrs.end());
  return out;
}

void validate_epidemic(const EpidemicParams& params) {
  require(params.gamma >= 0.0 && params.gamma <= 1.0,
          "epidemic: gamma outside [0,1]");
  require((params.beta.array() >= 0.0).all() && (params.beta.array() <= 1.0).all(),
          "epidemic: beta outside [0,1]");
  require(params.alpha.rows() == params.beta.size() &&
              params.alpha.cols() == params.beta.size(),
          "epidemic: alpha shape mismatch");
  require((params.alpha.array() >= 0.0).all() &&
              (params.alpha.array() <= 1.0).all(),
          "epidemic: alpha outside [0,1]");
}

namespace {
double temporal_factor(const EpidemicParams& params, Index u) {
  if (!params.use_temporal) return 1.0;
  return erfc_half_transform(params.t_post, params.mu[u],
                             std::sqrt(params.sigma2[u]));
}
}  // namespace

double alo_probability(const EpidemicParams& params,
                       const NeighborLists& neighbors, Index u,
                       const BinVec& tau) {
  require(u >= 0 && u < params.n_users(), "alo_probability: user out of range");
  double survive = 1.0 - params.gamma * params.beta[u];
  require(survive >= 0.0 && survive <= 1.0, "alo_probability: factor outside [0,1]");
  for (Index v : neighbors[static_cast<std::size_t>(u)]) {
    const double act = tau[v] ? 1.0 : 0.0;
    const double factor = 1.0 - params.gamma * params.alpha(u, v) * act;
    require(factor >= 0.0 && factor <= 1.0, "alo_probability: factor outside [0,1]");
    survive *= factor;
  }
  return 1.0 - survive;
}

double lt_probability(const EpidemicParams& params,
                      const NeighborLists& neighbors, Index u,
                      const BinVec& tau) {
  require(u >= 0 && u < params.n_users(), "lt_probability: user out of range");
  double influence = 0.0;
  for (Index v : neighbors[static_cast<std::size_t>(u)]) {
    const double act = tau[v] ? 1.0 : 0.0;
    influence += params.gamma * params.alpha(u, v) * act;
  }
  const double arg = params.gamma * (params.beta[u] + influence);
  return sigmoid_ab(arg, params.sig_a, params.sig_b) * temporal_factor(params, u);
}

BinVec epidemic_predict(const EpidemicParams& params,
                        const NeighborLists& neighbors, const BinVec& tau,
                        EpidemicKind kind) {
  BinVec out(params.n_users());
  for (Index u = 0; u < params.n_users(); ++u) {
    const double p = kind == EpidemicKind::alo
                         ? alo_probability(params, neighbors, u, tau)
                         : lt_probability(params, neighbors, u, tau);
    out[u] = p > 0.5 ? 1 : 0;
  }
  return out;
}

void save_epidemic_params(const std::string& path,
                          const EpidemicParams& params) {
  std::vector<NamedTensor> tensors;
  auto add = [&](const std::string& name, const Mat& m,
                 std::vector<std::uint64_t> shape) {
    tensors.push_back({name, std::move(shape), m});
  };
  add("beta", params.beta, {static_cast<std::uint64_t>(params.beta.size())});
  add("alpha", params.alpha,
      {static_cast<std::uint64_t>(params.alpha.rows()),
       static_cast<std::uint64_t>(params.alpha.cols())});
  Mat scalars(3, 1);
  scalars << params.gamma, params.sig_a, params.sig_b;
  add("scalars", scalars, {3});
  save_checkpoint(path, tensors);
}

EpidemicParams load_epidemic_params(const std::string& path) {
  const auto tensors = load_checkpoint(path);
  require(tensors.size() == 3, "load_epidemic_params: unexpected layout");
  EpidemicParams p;
  require(tensors[0].name == "beta" && tensors[1].name == "alpha" &&
              tensors[2].name == "scalars",
          "load_epidemic_params: unexpected tensor names");
  p.beta = tensors[0].values.col(0);
  p.alpha = tensors[1].values;
  p.gamma = tensors[2].values(0, 0);
  p.sig_a = tensors[2].values(1, 0);
  p.sig_b = tensors[2].values(2, 0);
  return p;
}

}  // namespace casc
