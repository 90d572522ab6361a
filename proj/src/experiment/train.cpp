#include "casc/experiment/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "casc/numerics/functions.hpp"

namespace casc {

namespace {

BinMat gather_rows(const BinMat& m, Index begin, Index end, Index offset) {
  BinMat out(end - begin, m.cols());
  for (Index p = begin; p < end; ++p) out.row(p - begin) = m.row(p + offset);
  return out;
}

}  // namespace

TrainResult train(NeuralModel& model, const SliceDataset& ds,
                  const TrainConfig& cfg) {
  require(ds.split.valid(), "train: dataset has no chronological split");
  require(cfg.patience >= 1, "train: patience must be >= 1");
  const PairRange tr = train_pairs(ds.split);
  const PairRange va = val_pairs(ds.split);
  require(tr.count() > 0 && va.count() > 0, "train: degenerate split");

  const BinMat x_train = gather_rows(ds.inputs, tr.begin, tr.end, 0);
  const BinMat y_train = gather_rows(ds.targets, tr.begin, tr.end, 1);
  const Mat x_val = to_signed(gather_rows(ds.inputs, va.begin, va.end, 0));
  const Mat y_val = to_signed(gather_rows(ds.targets, va.begin, va.end, 1));

  Rng noise_rng = Rng(cfg.seed).derive(0x401);
  Rng shuffle_rng = Rng(cfg.seed).derive(0x5471);
  NoiseEncoding enc = cfg.noise;

  AdamConfig adam_cfg;
  adam_cfg.step_size = cfg.learning_rate;
  AdamState<double> adam(adam_cfg);

  std::vector<MatX<double>*> param_values;
  std::vector<const MatX<double>*> param_grads;
  for (auto& p : model.stack.params()) {
    param_values.push_back(p.value);
    param_grads.push_back(p.grad);
  }

  TrainResult result;
  result.best_val_loss = std::numeric_limits<double>::infinity();
  std::vector<Mat> best_params = model.stack.snapshot();
  Index since_best = 0;

  const Index n_pairs = tr.count();
  const Index batch = cfg.batch > 0 ? std::min(cfg.batch, n_pairs) : n_pairs;
  std::vector<Index> perm(static_cast<std::size_t>(ds.n_users()));

  for (Index epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    double epoch_loss = 0.0;
    Index cells = 0;
    for (Index start = 0; start < n_pairs; start += batch) {
      const Index count = std::min(batch, n_pairs - start);
      BinMat xb = x_train.middleRows(start, count);
      if (cfg.shuffle_inputs) {
        for (Index r = 0; r < count; ++r) {
          std::iota(perm.begin(), perm.end(), Index{0});
          shuffle_rng.shuffle(perm);
          BinVec row = xb.row(r).transpose();
          Index ones_before = 0, ones_after = 0;
          for (Index j = 0; j < row.size(); ++j) {
            ones_before += row[j];
            xb(r, j) = row[perm[static_cast<std::size_t>(j)]];
            ones_after += xb(r, j);
          }
          require(ones_before == ones_after,
                  "train: shuffle must preserve the row multiset");
        }
      }
      const Mat xe = encode_noise_rows(xb, enc, noise_rng);
      const Mat ye = encode_noise_rows(y_train.middleRows(start, count), enc, noise_rng);
      const Mat pred = model.stack.forward(xe);
      const auto [loss, grad] = mse_loss(pred, ye);
      if (!std::isfinite(loss)) {
        result.aborted = true;
        model.stack.restore(best_params);
        return result;
      }
      model.stack.backward(grad);
      adam.step(param_values, param_grads);
      epoch_loss += loss * static_cast<double>(pred.size());
      cells += static_cast<Index>(pred.size());
    }
    result.train_loss.push_back(epoch_loss / static_cast<double>(cells));

    const double val = mse_loss(Mat(model.stack.forward(x_val)), y_val).first;
    result.val_loss.push_back(val);
    result.epochs_run = epoch + 1;
    if (!std::isfinite(val)) {
      result.aborted = true;
      model.stack.restore(best_params);
      return result;
    }
    if (val < result.best_val_loss) {
      result.best_val_loss = val;
      result.best_epoch = epoch;
      best_params = model.stack.snapshot();
      since_best = 0;
    } else {
      ++since_best;
      if (since_best >= cfg.patience) break;
    }
  }

  model.stack.restore(best_params);
  return result;
}

void write_loss_csv(const std::string& path, const TrainResult& result) {
  std::ofstream os(path);
  require(os.good(), "write_loss_csv: cannot open " + path);
  os << "epoch,train_mse,val_mse\n";
  char buf[96];
  for (std::size_t e = 0; e < result.train_loss.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g", e, result.train_loss[e],
                  result.val_loss[e]);
    os << buf << '\n';
  }
  require(os.good(), "write_loss_csv: write failed for " + path);
}

}  // namespace casc
