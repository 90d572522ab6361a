// cascpred: simulate / ingest / slice / stats / train / eval / report
// pipeline for window-to-window reaction prediction on social post logs.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_set>

#include "casc/experiment/runner.hpp"
#include "casc/ingest.hpp"
#include "casc/simgen.hpp"

namespace fs = std::filesystem;
using namespace casc;

namespace {

constexpr int kExitInputError = 2;

struct CommonTrainFlags {
  std::int64_t max_epochs = 5000;
  std::int64_t patience = 50;
  std::int64_t batch = 0;
  double learning_rate = 0.001;
  double noise_variance = 0.01;
  std::int64_t code_dim = 100;
  std::int64_t channels = 8;
  std::int64_t blocks = 2;
  std::int64_t prior_budget = 500;

  void attach(CLI::App* cmd) {
    cmd->add_option("--max-epochs", max_epochs, "Training epoch cap");
    cmd->add_option("--patience", patience, "Early-stopping patience (epochs)");
    cmd->add_option("--batch", batch, "Minibatch size (0 = full batch)");
    cmd->add_option("--lr", learning_rate, "Adam step size");
    cmd->add_option("--noise-variance", noise_variance,
                    "Variance of the +-1 noise encoding");
    cmd->add_option("--code-dim", code_dim, "TWCRN bottleneck width d");
    cmd->add_option("--channels", channels, "TWCRN convolution channels");
    cmd->add_option("--blocks", blocks, "TWCRN residual blocks");
    cmd->add_option("--budget", prior_budget, "ALO/LT prior-search evaluations");
  }

  RunnerOptions runner(bool shuffle, std::uint64_t seed) const {
    RunnerOptions opt;
    opt.train.max_epochs = max_epochs;
    opt.train.patience = patience;
    opt.train.batch = batch;
    opt.train.learning_rate = learning_rate;
    opt.train.noise.variance = noise_variance;
    opt.train.shuffle_inputs = shuffle;
    opt.train.seed = seed;
    opt.twcrn.code_dim = code_dim;
    opt.twcrn.channels = channels;
    opt.twcrn.blocks = blocks;
    opt.prior_budget = prior_budget;
    return opt;
  }
};

std::unordered_set<std::string> as_set(const std::vector<std::string>& users) {
  return {users.begin(), users.end()};
}

// Model tokens accepted by train/eval: the nine variants plus the
// shuffle-trained convolutional network.
struct ModelToken {
  ModelKind kind;
  bool shuffle = false;
  std::string label;  // file stem and display key
};

ModelToken resolve_model_token(const std::string& name) {
  if (name == "twcrn_shuf")
    return {ModelKind::twcrn, true, "twcrn_shuf"};
  const auto kind = model_kind_from_string(name);
  if (!kind) {
    std::string valid;
    for (const auto& n : model_names()) valid += " " + n;
    valid += " twcrn_shuf";
    throw CascError("unknown model '" + name + "'; valid models:" + valid);
  }
  return {*kind, false, name};
}

std::string display_name(const std::string& label) {
  if (label == "rnd_half") return "RND_p=0.5";
  if (label == "rnd_prop") return "RND_p=prop";
  if (label == "mle") return "MLE";
  if (label == "alo") return "ALO";
  if (label == "lt") return "LT";
  if (label == "twpn") return "TWPN";
  if (label == "twmn") return "TWMN";
  if (label == "twmn_all1") return "TWMN_all-1";
  if (label == "twcrn") return "TWCRN";
  if (label == "twcrn_shuf") return "TWCRN_SHUF";
  return label;
}

SocialGraph load_graph_for(const SliceDataset& ds, const std::string& edges_path) {
  require(!edges_path.empty(),
          "this model needs a social graph; pass --edges <file>");
  require(fs::exists(edges_path), "edge file not found: " + edges_path);
  return load_follower_graph(edges_path, as_set(ds.users));
}

// Reconstructs the architecture a checkpoint belongs to, then loads it.
NeuralModel load_neural(const ModelToken& token, const SliceDataset& ds,
                        const std::string& edges_path,
                        const CommonTrainFlags& flags, const std::string& ckpt) {
  Rng rng(1);
  NeuralModel m;
  switch (token.kind) {
    case ModelKind::twpn:
      m = make_twpn(ds.n_users(), rng);
      break;
    case ModelKind::twmn: {
      const SocialGraph graph = load_graph_for(ds, edges_path);
      m = make_twmn(adjacency_mask(graph, ds.users), rng);
      break;
    }
    case ModelKind::twmn_all1:
      m = make_twmn(Mat::Ones(ds.n_users(), ds.n_users()), rng, "twmn_all1");
      break;
    case ModelKind::twcrn: {
      TwcrnConfig cfg;
      cfg.code_dim = flags.code_dim;
      cfg.channels = flags.channels;
      cfg.blocks = flags.blocks;
      m = make_twcrn(ds.n_users(), cfg, rng);
      break;
    }
    default:
      throw CascError("load_neural: not a neural model");
  }
  load_model_params(ckpt, m);
  return m;
}

int cmd_simulate(const std::string& spec_path, const std::string& out_log,
                 const std::string& out_edges, const std::string& out_data) {
  require(fs::exists(spec_path), "spec file not found: " + spec_path);
  const GeneratorSpec spec = load_generator_spec(spec_path);
  Generated gen = generate(spec);
  write_post_log(out_log, gen.posts);
  write_edge_list(out_edges, gen.graph);
  if (!out_data.empty()) save_slice_dataset(out_data, gen.dataset);
  std::cout << "simulate: " << gen.posts.size() << " posts, "
            << gen.graph.edge_count() << " edges, " << gen.dataset.n_slices()
            << " slices\n";
  return 0;
}

int cmd_ingest(const std::string& log_path, const std::string& graph_kind,
               const std::string& edges_path, std::int64_t target_size,
               std::int64_t delta_t, const std::string& out_dir) {
  require(fs::exists(log_path), "post log not found: " + log_path);
  require(graph_kind == "mention" || graph_kind == "followers",
          "--graph must be 'mention' or 'followers'");
  require(graph_kind != "followers" || !edges_path.empty(),
          "--graph=followers needs --edges <file>");
  fs::create_directories(out_dir);

  ParseReport parse_report;
  const auto posts = parse_post_log(log_path, &parse_report);
  for (const auto& w : parse_report.warnings) std::cerr << "warning: " << w << '\n';
  require(!posts.empty(), "post log is empty: " + log_path);

  const UserFilter filter = filter_users(posts, static_cast<std::size_t>(target_size));
  if (filter.degenerate)
    std::cerr << "warning: fewer distinct users than --target-size, keeping all\n";

  SocialGraph graph;
  std::vector<std::string> users;
  if (graph_kind == "mention") {
    graph = build_mention_graph(posts).restricted_to(as_set(filter.kept));
    users = filter.kept;
  } else {
    require(fs::exists(edges_path), "edge file not found: " + edges_path);
    EdgeLoadReport edge_report;
    graph = load_follower_graph(edges_path, as_set(filter.kept), &edge_report);
    if (edge_report.skipped_unknown > 0)
      std::cerr << "warning: skipped " << edge_report.skipped_unknown
                << " edges outside the kept user set\n";
    require(graph.user_count() > 0, "followers graph is empty after filtering");
    // The followers-graph dataset keeps exactly the users that survive the
    // zero-degree removal.
    users = graph.users();
    std::sort(users.begin(), users.end());
  }

  SliceDataset ds = slice(posts, users, delta_t);
  require(ds.n_slices() >= 10,
          "only " + std::to_string(ds.n_slices()) +
              " full windows; need at least 10 for the 70-20-10 split");
  ds.apply_chronological_split();

  const DatasetStats stats = dataset_stats(posts, graph, filter, ds);
  save_slice_dataset(out_dir + "/data.bin", ds);
  write_edge_list(out_dir + "/graph.tsv", graph);
  write_stats_csv(out_dir + "/stats.csv", stats, filter);
  std::cout << "ingest: " << ds.n_users() << " users, " << ds.n_slices()
            << " slices, B=" << stats.broadcasticity << '\n';
  return 0;
}

int cmd_slice(const std::string& log_path, const std::string& users_path,
              std::int64_t delta_t, const std::string& out_path,
              const std::string& csv_path) {
  require(fs::exists(log_path), "post log not found: " + log_path);
  const auto posts = parse_post_log(log_path);
  std::vector<std::string> users;
  if (!users_path.empty()) {
    require(fs::exists(users_path), "user list not found: " + users_path);
    std::ifstream is(users_path);
    for (std::string line; std::getline(is, line);)
      if (!line.empty()) users.push_back(line);
  } else {
    std::unordered_set<std::string> seen;
    for (const auto& p : posts) {
      seen.insert(p.author);
      if (p.target) seen.insert(*p.target);
    }
    users.assign(seen.begin(), seen.end());
    std::sort(users.begin(), users.end());
  }
  SliceDataset ds = slice(posts, users, delta_t);
  if (ds.n_slices() >= 10) ds.apply_chronological_split();
  save_slice_dataset(out_path, ds);
  if (!csv_path.empty()) export_slice_csv(csv_path, ds);
  std::cout << "slice: " << ds.n_users() << " users, " << ds.n_slices()
            << " slices\n";
  return 0;
}

int cmd_stats(const std::string& log_path, const std::string& graph_kind,
              const std::string& edges_path, std::int64_t target_size,
              std::int64_t delta_t, const std::string& out_path) {
  require(fs::exists(log_path), "post log not found: " + log_path);
  require(graph_kind != "followers" || !edges_path.empty(),
          "--graph=followers needs --edges <file>");
  const auto posts = parse_post_log(log_path);
  require(!posts.empty(), "post log is empty: " + log_path);
  const UserFilter filter = filter_users(posts, static_cast<std::size_t>(target_size));
  SocialGraph graph;
  if (graph_kind == "followers") {
    require(fs::exists(edges_path), "edge file not found: " + edges_path);
    graph = load_follower_graph(edges_path, as_set(filter.kept));
  } else {
    graph = build_mention_graph(posts).restricted_to(as_set(filter.kept));
  }
  const SliceDataset ds = slice(posts, filter.kept, delta_t);
  const DatasetStats stats = dataset_stats(posts, graph, filter, ds);
  write_stats_csv(out_path, stats, filter);
  std::cout << "stats: B=" << stats.broadcasticity
            << " E[L]=" << stats.small_world.mean_path
            << " Ec[L]=" << stats.small_world.critical_path << '\n';
  return 0;
}

int cmd_train(const std::string& data_path, const std::string& model_name,
              const std::string& edges_path, const std::string& influence_path,
              bool shuffle, std::uint64_t seed, const CommonTrainFlags& flags,
              const std::string& out_dir) {
  require(fs::exists(data_path), "dataset not found: " + data_path);
  const ModelToken token = resolve_model_token(model_name);
  const bool do_shuffle = shuffle || token.shuffle;
  const std::string label =
      token.label + (do_shuffle && !token.shuffle ? "_shuf" : "");
  fs::create_directories(out_dir);

  const SliceDataset ds = load_slice_dataset(data_path);
  require(ds.split.valid(), "dataset has no chronological split");

  RunnerOptions opt = flags.runner(do_shuffle, seed);
  SocialGraph graph;
  if (token.kind == ModelKind::twmn || is_epidemic(token.kind)) {
    graph = load_graph_for(ds, edges_path);
    opt.graph = &graph;
  }
  Mat influence;
  if (is_epidemic(token.kind) && !influence_path.empty()) {
    require(fs::exists(influence_path),
            "influence checkpoint not found: " + influence_path);
    NeuralModel twmn = load_neural({ModelKind::twmn, false, "twmn"}, ds,
                                   edges_path, flags, influence_path);
    influence = extract_influence(twmn);
    opt.influence = &influence;
  }

  TrainedModel tm = make_trained(token.kind, ds, opt, seed);
  require(!tm.train_log.aborted, "training aborted on non-finite loss");

  const std::string stem = out_dir + "/" + label;
  if (auto* np = tm.neural()) {
    save_model(stem + ".ckpt", np->model());
    write_loss_csv(stem + "_loss.csv", tm.train_log);
  } else if (auto* mw = tm.mle()) {
    mw->table().save_csv(stem + ".csv", ds.users);
  } else if (auto* ep = tm.epidemic()) {
    save_epidemic_params(stem + ".ckpt", ep->params());
  } else {
    // Random baselines have no parameters; an empty container marks the
    // completed step for pipeline systems.
    save_checkpoint(stem + ".ckpt", {});
  }
  if (!tm.train_log.val_loss.empty())
    std::cout << "train " << label << ": best epoch " << tm.train_log.best_epoch
              << ", val mse " << tm.train_log.best_val_loss << '\n';
  else
    std::cout << "train " << label << ": done\n";
  return 0;
}

int cmd_eval(const std::string& data_path, const std::string& models_csv,
             const std::string& edges_path, const std::string& ckpt_dir,
             const std::string& seeds_csv, bool retrain,
             const CommonTrainFlags& flags, const std::string& out_dir,
             const std::string& dataset_name) {
  require(fs::exists(data_path), "dataset not found: " + data_path);
  const SliceDataset ds = load_slice_dataset(data_path);
  require(ds.split.valid(), "dataset has no chronological split");
  fs::create_directories(out_dir);

  std::vector<ModelToken> tokens;
  {
    std::stringstream ss(models_csv);
    for (std::string item; std::getline(ss, item, ',');)
      if (!item.empty()) tokens.push_back(resolve_model_token(item));
  }
  require(!tokens.empty(), "no models given");

  std::vector<std::uint64_t> seeds;
  {
    std::stringstream ss(seeds_csv);
    for (std::string item; std::getline(ss, item, ',');)
      if (!item.empty()) seeds.push_back(std::stoull(item));
  }
  require(!seeds.empty(), "no seeds given");

  SocialGraph graph;
  bool graph_loaded = false;
  auto ensure_graph = [&]() {
    if (!graph_loaded) {
      graph = load_graph_for(ds, edges_path);
      graph_loaded = true;
    }
    return &graph;
  };

  std::vector<ModelReportRow> rows;
  for (const auto& token : tokens) {
    EvalReport report;
    if (retrain) {
      RunnerOptions opt = flags.runner(token.shuffle, seeds.front());
      if (token.kind == ModelKind::twmn || is_epidemic(token.kind))
        opt.graph = ensure_graph();
      report = repeat_runs(token.kind, ds, opt, seeds);
    } else if (token.kind == ModelKind::rnd_half ||
               token.kind == ModelKind::rnd_prop) {
      // Stochastic prediction: one evaluation per seed.
      std::vector<RunMetrics> runs;
      for (const auto seed : seeds) {
        RndWrapper rnd(token.kind == ModelKind::rnd_half ? RndKind::half
                                                         : RndKind::proportional,
                       seed);
        runs.push_back(evaluate(
            [&](const BinVec& tau) { return rnd.predict(tau); }, ds,
            test_pairs(ds.split)));
      }
      report = aggregate_runs(runs);
    } else {
      // Deterministic prediction from a checkpoint: a single run.
      const std::string stem = ckpt_dir + "/" + token.label;
      std::unique_ptr<Predictor> predictor;
      if (is_neural(token.kind)) {
        require(fs::exists(stem + ".ckpt"), "checkpoint not found: " + stem + ".ckpt");
        predictor = std::make_unique<NeuralPredictor>(
            load_neural(token, ds, edges_path, flags, stem + ".ckpt"));
      } else if (token.kind == ModelKind::mle) {
        require(fs::exists(stem + ".csv"), "checkpoint not found: " + stem + ".csv");
        predictor = std::make_unique<MleWrapper>(MlePredictor::load_csv(stem + ".csv"));
      } else {
        require(fs::exists(stem + ".ckpt"), "checkpoint not found: " + stem + ".ckpt");
        EpidemicParams params = load_epidemic_params(stem + ".ckpt");
        predictor = std::make_unique<EpidemicWrapper>(
            token.kind == ModelKind::alo ? EpidemicKind::alo : EpidemicKind::lt,
            std::move(params), dataset_neighbors(*ensure_graph(), ds.users));
      }
      std::vector<RunMetrics> runs{evaluate(
          [&](const BinVec& tau) { return predictor->predict(tau); }, ds,
          test_pairs(ds.split))};
      report = aggregate_runs(runs);
    }
    rows.push_back({display_name(token.label), report});
  }

  write_eval_csv(out_dir + "/eval.csv", dataset_name, rows);
  write_eval_markdown(out_dir + "/report.md", dataset_name, rows);
  for (const auto& row : rows)
    std::cout << row.model << ": P=" << row.report.mean_precision
              << " F1=" << row.report.mean_f1 << " R=" << row.report.mean_recall
              << '\n';
  return 0;
}

int cmd_report(const std::vector<std::string>& from, const std::string& out_path) {
  require(!from.empty(), "no input eval CSVs given");
  std::ofstream os(out_path);
  require(os.good(), "cannot open " + out_path);
  for (const auto& path : from) {
    require(fs::exists(path), "eval CSV not found: " + path);
    std::string dataset_name;
    const auto rows = load_eval_csv(path, &dataset_name);
    const std::string tmp = out_path + ".part";
    write_eval_markdown(tmp, dataset_name, rows);
    std::ifstream is(tmp);
    os << is.rdbuf() << '\n';
    fs::remove(tmp);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"window-to-window reaction prediction pipeline"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value configuration file")
      ->envname("CASCPRED_CONFIG");

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a synthetic post log");
  std::string sim_spec, sim_log = "posts.jsonl", sim_edges = "edges.tsv", sim_data;
  sim->add_option("--spec", sim_spec, "generator spec file")->required();
  sim->add_option("--out-log", sim_log, "output post log");
  sim->add_option("--out-edges", sim_edges, "output edge list");
  sim->add_option("--out-data", sim_data, "also write the direct dataset");

  // ingest
  auto* ing = app.add_subcommand("ingest", "post log -> dataset + stats");
  std::string ing_log, ing_graph = "mention", ing_edges, ing_out = ".";
  std::int64_t ing_target = 10000, ing_delta = 43200;
  ing->add_option("--log", ing_log, "post log (JSON lines)")->required();
  ing->add_option("--graph", ing_graph, "mention|followers");
  ing->add_option("--edges", ing_edges, "follower edge list (TSV)");
  ing->add_option("--target-size", ing_target, "target kept-user count");
  ing->add_option("--delta-t", ing_delta, "window width in seconds");
  ing->add_option("--out", ing_out, "output directory");

  // slice
  auto* slc = app.add_subcommand("slice", "post log -> dataset, no filtering");
  std::string slc_log, slc_users, slc_out = "data.bin", slc_csv;
  std::int64_t slc_delta = 43200;
  slc->add_option("--log", slc_log)->required();
  slc->add_option("--users", slc_users, "user list file, one id per line");
  slc->add_option("--delta-t", slc_delta);
  slc->add_option("--out", slc_out);
  slc->add_option("--csv", slc_csv, "also export a CSV view");

  // stats
  auto* sts = app.add_subcommand("stats", "dataset statistics only");
  std::string sts_log, sts_graph = "mention", sts_edges, sts_out = "stats.csv";
  std::int64_t sts_target = 10000, sts_delta = 43200;
  sts->add_option("--log", sts_log)->required();
  sts->add_option("--graph", sts_graph, "mention|followers");
  sts->add_option("--edges", sts_edges);
  sts->add_option("--target-size", sts_target);
  sts->add_option("--delta-t", sts_delta);
  sts->add_option("--out", sts_out);

  // train
  auto* trn = app.add_subcommand("train", "fit one model, write checkpoint");
  std::string trn_data, trn_model, trn_edges, trn_influence, trn_out = ".";
  std::uint64_t trn_seed = 1;
  bool trn_shuffle = false;
  CommonTrainFlags trn_flags;
  trn->add_option("--data", trn_data, "dataset file")->required();
  trn->add_option("--model", trn_model, "model name")->required();
  trn->add_option("--edges", trn_edges, "social graph edge list");
  trn->add_option("--influence", trn_influence, "TWMN checkpoint for ALO/LT");
  trn->add_option("--seed", trn_seed);
  trn->add_flag("--shuffle", trn_shuffle, "permutation-test training");
  trn->add_option("--out", trn_out, "output directory");
  trn_flags.attach(trn);

  // eval
  auto* evl = app.add_subcommand("eval", "evaluate models, write report");
  std::string evl_data, evl_models = "rnd_half,rnd_prop,mle,twpn,twmn,twmn_all1,twcrn,alo,lt";
  std::string evl_edges, evl_ckpts = ".", evl_seeds = "1,2,3,4,5", evl_out = ".";
  std::string evl_name = "dataset";
  bool evl_retrain = false;
  CommonTrainFlags evl_flags;
  evl->add_option("--data", evl_data)->required();
  evl->add_option("--models", evl_models, "comma-separated model list");
  evl->add_option("--edges", evl_edges);
  evl->add_option("--ckpt-dir", evl_ckpts, "directory with checkpoints");
  evl->add_option("--seeds", evl_seeds, "comma-separated seeds");
  evl->add_option("--out", evl_out, "output directory");
  evl->add_option("--name", evl_name, "dataset label for the report");
  evl->add_flag("--retrain", evl_retrain,
                "retrain per seed instead of loading checkpoints");
  evl_flags.attach(evl);

  // report
  auto* rpt = app.add_subcommand("report", "merge eval CSVs into Markdown");
  std::vector<std::string> rpt_from;
  std::string rpt_out = "report.md";
  rpt->add_option("--from", rpt_from, "eval CSV files")->required();
  rpt->add_option("--out", rpt_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }

  try {
    if (*sim) return cmd_simulate(sim_spec, sim_log, sim_edges, sim_data);
    if (*ing)
      return cmd_ingest(ing_log, ing_graph, ing_edges, ing_target, ing_delta, ing_out);
    if (*slc) return cmd_slice(slc_log, slc_users, slc_delta, slc_out, slc_csv);
    if (*sts)
      return cmd_stats(sts_log, sts_graph, sts_edges, sts_target, sts_delta, sts_out);
    if (*trn)
      return cmd_train(trn_data, trn_model, trn_edges, trn_influence, trn_shuffle,
                       trn_seed, trn_flags, trn_out);
    if (*evl)
      return cmd_eval(evl_data, evl_models, evl_edges, evl_ckpts, evl_seeds,
                      evl_retrain, evl_flags, evl_out, evl_name);
    if (*rpt) return cmd_report(rpt_from, rpt_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return 0;
}
