#pragma once

#include <string>
#include <vector>

#include "casc/numerics/adam.hpp"
#include "casc/predictors/nets.hpp"
#include "casc/slicing.hpp"

namespace casc {

struct TrainConfig {
  Index max_epochs = 5000;
  Index patience = 50;    // epochs without validation improvement
  Index batch = 0;        // 0 = all train pairs per step (full batch)
  double learning_rate = 0.001;
  NoiseEncoding noise;    // +-1 encoding, variance 0.01
  bool shuffle_inputs = false;  // permutation test: reshuffle every presentation
  std::uint64_t seed = 1;
};

struct TrainResult {
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_loss;    // per epoch, clean +-1 data
  Index best_epoch = -1;           // 0-based epoch whose parameters were kept
  double best_val_loss = 0.0;
  bool aborted = false;            // non-finite loss encountered
  Index epochs_run = 0;
};

// Full-batch (or minibatch) Adam on the train pairs: inputs and targets are
// freshly +-1 noise-encoded every epoch, validation tracks the MSE on clean
// +-1 data, and the parameters of the best validation epoch are restored
// when training stops (patience exhausted, max epochs, or abort).
//
// With shuffle_inputs set, every input row is permuted anew each time it is
// presented while targets stay fixed, destroying coordinate identity but
// preserving each vector's multiset.
TrainResult train(NeuralModel& model, const SliceDataset& ds,
                  const TrainConfig& cfg);

void write_loss_csv(const std::string& path, const TrainResult& result);

}  // namespace casc
