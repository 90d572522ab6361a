#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "casc/experiment/runner.hpp"
#include "casc/numerics/functions.hpp"
#include "casc/simgen.hpp"

using namespace casc;

namespace {

// One user whose next reaction always equals the current activity: a
// single-weight problem for TWPN.
SliceDataset copy_next_dataset(Index n_slices, std::uint64_t seed) {
  Rng rng(seed);
  SliceDataset ds;
  ds.users = {"u"};
  ds.inputs = BinMat::Zero(n_slices, 1);
  ds.targets = BinMat::Zero(n_slices, 1);
  std::uint8_t prev = 1;
  for (Index i = 0; i < n_slices; ++i) {
    ds.inputs(i, 0) = prev;
    ds.targets(i, 0) = prev;
    prev = rng.uniform01() < 0.5 ? 1 : 0;
  }
  // re-wire so targets[i+1] == inputs[i]
  for (Index i = n_slices - 1; i > 0; --i) ds.targets(i, 0) = ds.inputs(i - 1, 0);
  ds.apply_chronological_split();
  return ds;
}

}  // namespace

TEST_CASE("metrics formulas") {
  Confusion c{2, 1, 1, 6};
  const RunMetrics m = metrics_from(c);
  CHECK(m.precision == doctest::Approx(2.0 / 3.0));
  CHECK(m.recall == doctest::Approx(2.0 / 3.0));
  CHECK(m.f1 == doctest::Approx(2.0 / 3.0));

  const RunMetrics perfect = metrics_from({5, 0, 0, 5});
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);

  const RunMetrics nothing = metrics_from({0, 0, 0, 10});
  CHECK(nothing.f1 == 0.0);
}

TEST_CASE("evaluate counts every cell exactly once") {
  GeneratorSpec spec;
  spec.kind = GenKind::per_user_markov;
  spec.n_users = 11;
  spec.n_slices = 50;
  spec.seed = 17;
  const Generated gen = generate(spec);
  const PairRange range = test_pairs(gen.dataset.split);
  const RunMetrics m = evaluate(
      [&](const BinVec& tau) { return tau; },  // copy-forward predictor
      gen.dataset, range);
  CHECK(m.confusion.total() == range.count() * gen.dataset.n_users());
  CHECK_THROWS_AS(evaluate([](const BinVec& t) { return t; }, gen.dataset,
                           PairRange{3, 3}),
                  CascError);
}

TEST_CASE("aggregation uses the sample standard deviation") {
  std::vector<RunMetrics> runs;
  for (double f : {0.5, 0.6, 0.7, 0.6, 0.6}) {
    RunMetrics m;
    m.f1 = f;
    runs.push_back(m);
  }
  const EvalReport rep = aggregate_runs(runs);
  CHECK(rep.mean_f1 == doctest::Approx(0.6).epsilon(1e-12));
  // sample (n-1) convention: sqrt(0.02 / 4)
  CHECK(rep.std_f1 == doctest::Approx(0.07071067811865475).epsilon(1e-9));
}

TEST_CASE("twpn learns the copy-forward user") {
  SliceDataset ds = copy_next_dataset(200, 7);
  Rng rng(1);
  NeuralModel m = make_twpn(1, rng);
  TrainConfig cfg;
  cfg.max_epochs = 500;
  cfg.patience = 500;  // let it run
  cfg.learning_rate = 0.08;
  cfg.seed = 2;
  const TrainResult res = train(m, ds, cfg);
  CHECK(!res.aborted);
  const double w = dynamic_cast<DiagScaleLayer<double>&>(m.stack.layer(0)).weight()(0, 0);
  CHECK(w > 2.0);
  CHECK(res.train_loss.back() < 0.05);
}

TEST_CASE("patience halts training and restores the best epoch") {
  // constant inputs and targets: with zero noise the loss is flat, so the
  // first epoch is never improved upon and patience expires exactly.
  SliceDataset ds;
  ds.users = {"u"};
  ds.inputs = BinMat::Ones(40, 1);
  ds.targets = BinMat::Ones(40, 1);
  ds.apply_chronological_split();
  Rng rng(3);
  NeuralModel m = make_twpn(1, rng);
  TrainConfig cfg;
  cfg.max_epochs = 5000;
  cfg.patience = 50;
  cfg.learning_rate = 0.0;  // freeze parameters: validation never improves
  cfg.noise.variance = 0.0;
  const TrainResult res = train(m, ds, cfg);
  CHECK(res.best_epoch == 0);
  CHECK(res.epochs_run == 51);  // epoch 1 best, then 50 non-improving
}

TEST_CASE("early stopping never returns a worse validation loss") {
  SliceDataset ds = copy_next_dataset(120, 9);
  Rng rng(4);
  NeuralModel m = make_twpn(1, rng);
  TrainConfig cfg;
  cfg.max_epochs = 300;
  cfg.patience = 20;
  cfg.learning_rate = 0.05;
  const TrainResult res = train(m, ds, cfg);
  double best_seen = res.val_loss[0];
  for (double v : res.val_loss) best_seen = std::min(best_seen, v);
  CHECK(res.best_val_loss == doctest::Approx(best_seen));
  // restored parameters reproduce the best validation loss
  const PairRange va = val_pairs(ds.split);
  Mat x(va.count(), 1), y(va.count(), 1);
  for (Index p = va.begin; p < va.end; ++p) {
    x(p - va.begin, 0) = ds.inputs(p, 0) ? 1.0 : -1.0;
    y(p - va.begin, 0) = ds.targets(p + 1, 0) ? 1.0 : -1.0;
  }
  const double val_now = mse_loss(Mat(m.stack.forward(x)), y).first;
  CHECK(val_now == doctest::Approx(res.best_val_loss).epsilon(1e-12));
}

TEST_CASE("training is bit-deterministic given the seed") {
  GeneratorSpec spec;
  spec.kind = GenKind::per_user_markov;
  spec.n_users = 6;
  spec.n_slices = 60;
  spec.seed = 23;
  const Generated gen = generate(spec);
  TrainConfig cfg;
  cfg.max_epochs = 40;
  cfg.patience = 40;
  auto run = [&]() {
    Rng rng(5);
    NeuralModel m = make_twpn(6, rng);
    train(m, gen.dataset, cfg);
    return dynamic_cast<DiagScaleLayer<double>&>(m.stack.layer(0)).weight();
  };
  const Mat a = run(), b = run();
  CHECK((a - b).norm() == 0.0);
}

TEST_CASE("shuffled training preserves row popcounts and degrades learning") {
  SliceDataset ds = copy_next_dataset(150, 13);
  TrainConfig cfg;
  cfg.max_epochs = 120;
  cfg.patience = 120;
  cfg.learning_rate = 0.02;
  cfg.shuffle_inputs = true;  // single user: permutation is the identity
  Rng rng(6);
  NeuralModel m = make_twpn(1, rng);
  const TrainResult res = train(m, ds, cfg);  // popcount assert runs inside
  CHECK(!res.aborted);
}

TEST_CASE("extract_influence min-max rescales over the mask support") {
  Rng rng(7);
  Mat mask = Mat::Zero(3, 3);
  mask(0, 1) = 1.0;
  mask(1, 2) = 1.0;
  NeuralModel m = make_twmn(mask, rng);
  auto& layer = dynamic_cast<MaskedLinearLayer<double>&>(m.stack.layer(0));
  layer.weight().setZero();
  layer.weight()(0, 1) = 1.0;
  layer.weight()(1, 2) = 3.0;
  bool degenerate = true;
  const Mat alpha = extract_influence(m, &degenerate);
  CHECK(!degenerate);
  CHECK(alpha(0, 1) == 0.0);
  CHECK(alpha(1, 2) == 1.0);
  CHECK(alpha(2, 0) == 0.0);  // off the mask

  // all-equal weights collapse to 0.5
  layer.weight()(0, 1) = 2.0;
  layer.weight()(1, 2) = 2.0;
  const Mat flat = extract_influence(m, &degenerate);
  CHECK(degenerate);
  CHECK(flat(0, 1) == 0.5);
  CHECK(flat(1, 2) == 0.5);
}

TEST_CASE("search_priors with zero budget returns the density default") {
  GeneratorSpec spec;
  spec.kind = GenKind::per_user_markov;
  spec.n_users = 5;
  spec.n_slices = 40;
  spec.seed = 29;
  const Generated gen = generate(spec);
  const NeighborLists nbrs(5);
  const Mat alpha = Mat::Zero(5, 5);
  const EpidemicParams p = search_priors(EpidemicKind::alo, gen.dataset, nbrs,
                                         alpha, 0, 1);
  const PairRange tr = train_pairs(gen.dataset.split);
  const double density = class_density(gen.dataset.targets, tr.begin + 1, tr.end + 1);
  CHECK(p.beta.size() == 5);
  for (Index u = 0; u < 5; ++u) CHECK(p.beta[u] == doctest::Approx(density));
}

TEST_CASE("search_priors is deterministic and returns the sampled candidate at budget one") {
  GeneratorSpec spec;
  spec.kind = GenKind::per_user_markov;
  spec.n_users = 4;
  spec.n_slices = 40;
  spec.seed = 31;
  const Generated gen = generate(spec);
  const NeighborLists nbrs(4);
  const Mat alpha = Mat::Zero(4, 4);
  const EpidemicParams a = search_priors(EpidemicKind::lt, gen.dataset, nbrs, alpha, 1, 42);
  const EpidemicParams b = search_priors(EpidemicKind::lt, gen.dataset, nbrs, alpha, 1, 42);
  CHECK((a.beta - b.beta).norm() == 0.0);
  CHECK(a.sig_a == b.sig_a);
  CHECK(a.sig_b == b.sig_b);
  const EpidemicParams c = search_priors(EpidemicKind::lt, gen.dataset, nbrs, alpha, 1, 43);
  CHECK((a.beta - c.beta).norm() != 0.0);
}

TEST_CASE("search_priors recovers a planted on/off prior pattern") {
  // ALO with no edges: p_u = beta_u, so targets follow Bernoulli(beta*).
  const Index d = 10;
  Rng rng(37);
  Vec beta_true(d);
  for (Index u = 0; u < d; ++u) beta_true[u] = (u % 2 == 0) ? 0.97 : 0.03;
  SliceDataset ds;
  ds.users.resize(d);
  for (Index u = 0; u < d; ++u) ds.users[u] = "u" + std::to_string(u);
  const Index n = 400;
  ds.inputs = BinMat::Zero(n, d);
  ds.targets = BinMat::Zero(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index u = 0; u < d; ++u) {
      ds.targets(i, u) = rng.bernoulli(beta_true[u]) ? 1 : 0;
      ds.inputs(i, u) = ds.targets(i, u);
    }
  ds.apply_chronological_split();

  const NeighborLists nbrs(d);
  const Mat alpha = Mat::Zero(d, d);
  const EpidemicParams found =
      search_priors(EpidemicKind::alo, ds, nbrs, alpha, 500, 3);
  Index matches = 0;
  for (Index u = 0; u < d; ++u)
    if ((found.beta[u] > 0.5) == (beta_true[u] > 0.5)) ++matches;
  CHECK(matches >= 9);  // at least 90% of users
}

TEST_CASE("repeat_runs gives zero spread for deterministic models") {
  GeneratorSpec spec;
  spec.kind = GenKind::per_user_markov;
  spec.n_users = 15;
  spec.n_slices = 120;
  spec.seed = 41;
  const Generated gen = generate(spec);
  RunnerOptions opt;
  const EvalReport mle = repeat_runs(ModelKind::mle, gen.dataset, opt, {1, 2, 3});
  CHECK(mle.std_f1 == 0.0);
  CHECK(mle.std_precision == 0.0);
  const EvalReport rnd = repeat_runs(ModelKind::rnd_half, gen.dataset, opt, {1, 2, 3, 4, 5});
  CHECK(rnd.std_f1 > 0.0);
  CHECK_THROWS_AS(repeat_runs(ModelKind::mle, gen.dataset, opt, {1}), CascError);
  CHECK_THROWS_AS(repeat_runs(ModelKind::mle, gen.dataset, opt, {1, 1}), CascError);
}

TEST_CASE("eval report files") {
  std::vector<ModelReportRow> rows;
  RunMetrics a;
  a.precision = 0.5;
  a.recall = 0.25;
  a.f1 = 1.0 / 3.0;
  rows.push_back({"MLE", aggregate_runs({a, a})});
  write_eval_csv("eval_rt.csv", "toy", rows);
  write_eval_markdown("eval_rt.md", "toy", rows);
  std::string name;
  const auto back = load_eval_csv("eval_rt.csv", &name);
  CHECK(name == "toy");
  REQUIRE(back.size() == 1);
  CHECK(back[0].model == "MLE");
  CHECK(back[0].report.mean_precision == doctest::Approx(0.5));
  CHECK(back[0].report.std_f1 == doctest::Approx(0.0));
  std::ifstream md("eval_rt.md");
  std::string all((std::istreambuf_iterator<char>(md)), std::istreambuf_iterator<char>());
  CHECK(all.find("| Model | P | F1 | R |") != std::string::npos);
  CHECK(all.find("| MLE |") != std::string::npos);
  std::remove("eval_rt.csv");
  std::remove("eval_rt.md");
}
