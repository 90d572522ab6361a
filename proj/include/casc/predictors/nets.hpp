#pragma once

#include <string>
#include <vector>

#include "casc/graph.hpp"
#include "casc/numerics/layers.hpp"
#include "casc/numerics/tensor.hpp"

namespace casc {

// Sign threshold on raw model outputs: positive -> 1, zero or negative -> 0.
inline BinVec binarize(const Vec& outputs) {
  BinVec out(outputs.size());
  for (Index i = 0; i < outputs.size(); ++i) out[i] = outputs[i] > 0.0 ? 1 : 0;
  return out;
}

inline BinMat binarize_rows(const Mat& outputs) {
  BinMat out(outputs.rows(), outputs.cols());
  for (Index i = 0; i < outputs.rows(); ++i)
    for (Index j = 0; j < outputs.cols(); ++j)
      out(i, j) = outputs(i, j) > 0.0 ? 1 : 0;
  return out;
}

// Adjacency mask aligned with a dataset's user ordering: mask(u, v) = 1
// iff v is in N(u), i.e. u reacts to / follows v.
Mat adjacency_mask(const SocialGraph& graph,
                   const std::vector<std::string>& users);

// Trainable model: a named layer stack mapping an activity vector (+-1
// encoded) to a raw prediction vector.
struct NeuralModel {
  std::string name;
  LayerStack<double> stack;

  Index dim_in() const { return stack.in_features(); }
  Index dim_out() const { return stack.out_features(); }
};

// Two layers, input and output, with a single tanh(w_u x_u) per user.
NeuralModel make_twpn(Index n_users, Rng& rng);

// Fully connected single layer with the non-adjacent inputs masked out:
// output_u = tanh(sum_{v in N(u)} w_{v,u} x_v). Pass an all-ones mask for
// the unmasked ablation.
NeuralModel make_twmn(const Mat& mask, Rng& rng, const std::string& name = "twmn");

struct TwcrnConfig {
  Index code_dim = 100;  // d
  Index channels = 8;    // conv stem width
  Index blocks = 2;      // residual blocks
};

// Halving dense widths D -> ... -> d (last layer pinned to d).
std::vector<Index> encoder_plan(Index dim, Index code_dim);
// Doubling dense widths d -> ... -> D (last layer pinned to D).
std::vector<Index> decoder_plan(Index code_dim, Index dim);

// Encoder, row-copy inflater, residual convolutional core with global
// average pooling, then the up-sampling decoder. All stage shapes are
// validated at construction.
NeuralModel make_twcrn(Index n_users, const TwcrnConfig& cfg, Rng& rng);

// Checkpoint round trip for any neural model.
void save_model(const std::string& path, NeuralModel& model);
void load_model_params(const std::string& path, NeuralModel& model);

}  // namespace casc
