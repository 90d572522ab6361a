#include "casc/experiment/runner.hpp"

#include <algorithm>
#include <unordered_set>

namespace casc {

const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names = {
      "rnd_half", "rnd_prop", "mle", "twpn", "twmn",
      "twmn_all1", "twcrn", "alo", "lt"};
  return names;
}

std::string to_string(ModelKind kind) {
  return model_names()[static_cast<std::size_t>(kind)];
}

std::optional<ModelKind> model_kind_from_string(const std::string& name) {
  const auto& names = model_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<ModelKind>(i);
  return std::nullopt;
}

bool is_neural(ModelKind kind) {
  return kind == ModelKind::twpn || kind == ModelKind::twmn ||
         kind == ModelKind::twmn_all1 || kind == ModelKind::twcrn;
}

bool is_epidemic(ModelKind kind) {
  return kind == ModelKind::alo || kind == ModelKind::lt;
}

Mat extract_influence(NeuralModel& twmn, bool* degenerate) {
  require(twmn.stack.size() >= 1, "extract_influence: empty model");
  auto* masked = dynamic_cast<MaskedLinearLayer<double>*>(&twmn.stack.layer(0));
  require(masked != nullptr, "extract_influence: model has no masked layer");
  const Mat& mask = masked->mask();
  const Mat& w = masked->weight();

  bool any = false;
  double lo = 0.0, hi = 0.0;
  for (Index i = 0; i < mask.rows(); ++i)
    for (Index j = 0; j < mask.cols(); ++j) {
      if (mask(i, j) == 0.0) continue;
      const double v = w(i, j);
      if (!any) {
        lo = hi = v;
        any = true;
      } else {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  require(any, "extract_influence: mask has no support");

  Mat alpha = Mat::Zero(mask.rows(), mask.cols());
  const bool flat = hi == lo;
  if (degenerate) *degenerate = flat;
  for (Index i = 0; i < mask.rows(); ++i)
    for (Index j = 0; j < mask.cols(); ++j) {
      if (mask(i, j) == 0.0) continue;
      alpha(i, j) = flat ? 0.5 : (w(i, j) - lo) / (hi - lo);
    }
  return alpha;
}

EpidemicParams search_priors(EpidemicKind kind, const SliceDataset& ds,
                             const NeighborLists& neighbors, const Mat& alpha,
                             Index budget, std::uint64_t seed) {
  require(ds.split.valid(), "search_priors: dataset has no split");
  const Index d = ds.n_users();
  require(alpha.rows() == d && alpha.cols() == d,
          "search_priors: alpha shape mismatch");

  EpidemicParams best;
  best.alpha = alpha;
  best.gamma = 1.0;
  const PairRange tr = train_pairs(ds.split);
  const double density =
      class_density(ds.targets, tr.begin + 1, tr.end + 1);
  best.beta = Vec::Constant(d, density);
  best.sig_a = 1.0;
  best.sig_b = 0.5;
  if (budget <= 0) return best;

  const PairRange va = val_pairs(ds.split);
  Rng rng = Rng(seed).derive(0xbe7a);
  double best_f1 = -1.0;
  EpidemicParams cand = best;
  for (Index trial = 0; trial < budget; ++trial) {
    for (Index u = 0; u < d; ++u) cand.beta[u] = rng.uniform01();
    if (kind == EpidemicKind::lt) {
      cand.sig_a = -20.0 + 40.0 * rng.uniform01();
      cand.sig_b = 2.0 * rng.uniform01();
    }
    const RunMetrics m = evaluate(
        [&](const BinVec& tau) {
          return epidemic_predict(cand, neighbors, tau, kind);
        },
        ds, va);
    if (m.f1 > best_f1) {
      best_f1 = m.f1;
      best = cand;
    }
  }
  return best;
}

TrainedModel make_trained(ModelKind kind, const SliceDataset& ds,
                          const RunnerOptions& opt, std::uint64_t seed) {
  TrainedModel out;
  out.kind = kind;
  TrainConfig cfg = opt.train;
  cfg.seed = seed;
  Rng init_rng = Rng(seed).derive(0x171);

  switch (kind) {
    case ModelKind::rnd_half:
      out.predictor = std::make_unique<RndWrapper>(RndKind::half, seed);
      break;
    case ModelKind::rnd_prop:
      out.predictor = std::make_unique<RndWrapper>(RndKind::proportional, seed);
      break;
    case ModelKind::mle: {
      require(ds.split.valid(), "make_trained: dataset has no split");
      out.predictor =
          std::make_unique<MleWrapper>(mle_fit(ds, train_pairs(ds.split)));
      break;
    }
    case ModelKind::twpn: {
      NeuralModel m = make_twpn(ds.n_users(), init_rng);
      out.train_log = train(m, ds, cfg);
      out.predictor = std::make_unique<NeuralPredictor>(std::move(m));
      break;
    }
    case ModelKind::twmn:
    case ModelKind::twmn_all1: {
      Mat mask;
      if (kind == ModelKind::twmn_all1) {
        mask = Mat::Ones(ds.n_users(), ds.n_users());
      } else {
        require(opt.graph != nullptr, "make_trained: twmn needs a social graph");
        mask = adjacency_mask(*opt.graph, ds.users);
      }
      NeuralModel m = make_twmn(mask, init_rng, to_string(kind));
      out.train_log = train(m, ds, cfg);
      out.predictor = std::make_unique<NeuralPredictor>(std::move(m));
      break;
    }
    case ModelKind::twcrn: {
      NeuralModel m = make_twcrn(ds.n_users(), opt.twcrn, init_rng);
      out.train_log = train(m, ds, cfg);
      out.predictor = std::make_unique<NeuralPredictor>(std::move(m));
      break;
    }
    case ModelKind::alo:
    case ModelKind::lt: {
      require(opt.graph != nullptr, "make_trained: epidemic models need a social graph");
      Mat alpha;
      if (opt.influence != nullptr) {
        alpha = *opt.influence;
      } else {
        // The influence matrix comes from a TWMN trained on the same data.
        Mat mask = adjacency_mask(*opt.graph, ds.users);
        NeuralModel twmn = make_twmn(mask, init_rng);
        TrainResult twmn_log = train(twmn, ds, cfg);
        require(!twmn_log.aborted, "make_trained: influence TWMN aborted");
        alpha = extract_influence(twmn);
      }
      const NeighborLists neighbors = dataset_neighbors(*opt.graph, ds.users);
      EpidemicParams params =
          search_priors(kind == ModelKind::alo ? EpidemicKind::alo : EpidemicKind::lt,
                        ds, neighbors, alpha, opt.prior_budget, seed);
      out.predictor = std::make_unique<EpidemicWrapper>(
          kind == ModelKind::alo ? EpidemicKind::alo : EpidemicKind::lt,
          std::move(params), neighbors);
      break;
    }
  }
  return out;
}

EvalReport repeat_runs(ModelKind kind, const SliceDataset& ds,
                       const RunnerOptions& opt,
                       const std::vector<std::uint64_t>& seeds) {
  require(seeds.size() >= 2, "repeat_runs: need at least 2 seeds");
  require(std::unordered_set<std::uint64_t>(seeds.begin(), seeds.end()).size() ==
              seeds.size(),
          "repeat_runs: seeds must be distinct");
  std::vector<RunMetrics> runs;
  bool partial = false;
  for (const auto seed : seeds) {
    TrainedModel tm = make_trained(kind, ds, opt, seed);
    if (tm.train_log.aborted) {
      partial = true;
      continue;
    }
    runs.push_back(evaluate(
        [&](const BinVec& tau) { return tm.predictor->predict(tau); }, ds,
        test_pairs(ds.split)));
  }
  return aggregate_runs(runs, partial);
}

}  // namespace casc
