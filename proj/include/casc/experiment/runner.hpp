#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "casc/experiment/metrics.hpp"
#include "casc/experiment/train.hpp"
#include "casc/predictors/epidemic.hpp"
#include "casc/predictors/mle.hpp"
#include "casc/predictors/nets.hpp"
#include "casc/predictors/rnd.hpp"

namespace casc {

// The nine model variants.
enum class ModelKind {
  rnd_half,
  rnd_prop,
  mle,
  twpn,
  twmn,
  twmn_all1,
  twcrn,
  alo,
  lt,
};

const std::vector<std::string>& model_names();
std::string to_string(ModelKind kind);
std::optional<ModelKind> model_kind_from_string(const std::string& name);
bool is_neural(ModelKind kind);
bool is_epidemic(ModelKind kind);

// Type-erased trained predictor: binary activity window in, binary reaction
// prediction out. Stateless except for the random baselines, which consume
// their stream across calls.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual BinVec predict(const BinVec& tau) = 0;
};

class NeuralPredictor final : public Predictor {
 public:
  explicit NeuralPredictor(NeuralModel model) : model_(std::move(model)) {}
  BinVec predict(const BinVec& tau) override {
    const Mat out = model_.stack.forward(to_signed(tau).transpose());
    return binarize(out.row(0).transpose());
  }
  NeuralModel& model() { return model_; }

 private:
  NeuralModel model_;
};

class MleWrapper final : public Predictor {
 public:
  explicit MleWrapper(MlePredictor table) : table_(std::move(table)) {}
  BinVec predict(const BinVec& tau) override { return table_.predict(tau); }
  MlePredictor& table() { return table_; }

 private:
  MlePredictor table_;
};

class RndWrapper final : public Predictor {
 public:
  RndWrapper(RndKind kind, std::uint64_t seed) : kind_(kind), rng_(seed) {}
  BinVec predict(const BinVec& tau) override { return rnd_predict(kind_, tau, rng_); }

 private:
  RndKind kind_;
  Rng rng_;
};

class EpidemicWrapper final : public Predictor {
 public:
  EpidemicWrapper(EpidemicKind kind, EpidemicParams params, NeighborLists neighbors)
      : kind_(kind), params_(std::move(params)), neighbors_(std::move(neighbors)) {}
  BinVec predict(const BinVec& tau) override {
    return epidemic_predict(params_, neighbors_, tau, kind_);
  }
  EpidemicParams& params() { return params_; }

 private:
  EpidemicKind kind_;
  EpidemicParams params_;
  NeighborLists neighbors_;
};

struct RunnerOptions {
  TrainConfig train;
  TwcrnConfig twcrn;
  Index prior_budget = 500;              // random-search evaluations for ALO/LT
  const SocialGraph* graph = nullptr;    // required for twmn / alo / lt
  const Mat* influence = nullptr;        // pre-extracted alpha for alo / lt;
                                         // when absent a TWMN is trained first
};

struct TrainedModel {
  ModelKind kind = ModelKind::mle;
  std::unique_ptr<Predictor> predictor;
  TrainResult train_log;  // empty for the counting / random models

  NeuralPredictor* neural() { return dynamic_cast<NeuralPredictor*>(predictor.get()); }
  MleWrapper* mle() { return dynamic_cast<MleWrapper*>(predictor.get()); }
  EpidemicWrapper* epidemic() { return dynamic_cast<EpidemicWrapper*>(predictor.get()); }
};

// Builds and fits one model variant end to end on the dataset's train
// split (validation split for prior search and early stopping).
TrainedModel make_trained(ModelKind kind, const SliceDataset& ds,
                          const RunnerOptions& opt, std::uint64_t seed);

// Influence matrix from a trained TWMN: masked weights min-max rescaled
// into [0, 1] over the mask support, zero elsewhere. All-equal weights
// collapse to 0.5 (flagged via `degenerate`).
Mat extract_influence(NeuralModel& twmn, bool* degenerate = nullptr);

// Random search over the prior vector (and the sigmoid (a, b) for LT)
// maximizing validation F1; gamma = 1 and T = 1 stay fixed. Zero budget
// returns the defaults (beta = train-split class density).
EpidemicParams search_priors(EpidemicKind kind, const SliceDataset& ds,
                             const NeighborLists& neighbors, const Mat& alpha,
                             Index budget, std::uint64_t seed);

// Independent train + evaluate per seed, aggregated mean and sample
// standard deviation. Aborted runs are dropped and flagged.
EvalReport repeat_runs(ModelKind kind, const SliceDataset& ds,
                       const RunnerOptions& opt,
                       const std::vector<std::uint64_t>& seeds);

}  // namespace casc
