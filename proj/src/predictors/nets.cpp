#include "casc/predictors/nets.hpp"

#include <unordered_map>

namespace casc {

Mat adjacency_mask(const SocialGraph& graph,
                   const std::vector<std::string>& users) {
  const Index d = static_cast<Index>(users.size());
  Mat mask = Mat::Zero(d, d);
  std::unordered_map<std::string, Index> index;
  for (Index i = 0; i < d; ++i) index.emplace(users[static_cast<std::size_t>(i)], i);
  for (std::size_t gu = 0; gu < graph.user_count(); ++gu) {
    auto it = index.find(graph.users()[gu]);
    if (it == index.end()) continue;
    for (std::size_t gv : graph.out_neighbors(gu)) {
      auto jt = index.find(graph.users()[gv]);
      if (jt == index.end()) continue;
      mask(it->second, jt->second) = 1.0;
    }
  }
  return mask;
}

NeuralModel make_twpn(Index n_users, Rng& rng) {
  NeuralModel m;
  m.name = "twpn";
  m.stack.emplace<DiagScaleLayer<double>>(n_users);
  m.stack.emplace<TanhLayer<double>>(n_users);
  m.stack.init(rng);
  return m;
}

NeuralModel make_twmn(const Mat& mask, Rng& rng, const std::string& name) {
  require(mask.rows() == mask.cols(), "make_twmn: mask must be square");
  NeuralModel m;
  m.name = name;
  m.stack.emplace<MaskedLinearLayer<double>>(mask);
  m.stack.emplace<TanhLayer<double>>(mask.rows());
  m.stack.init(rng);
  return m;
}

std::vector<Index> encoder_plan(Index dim, Index code_dim) {
  require(dim > 0 && code_dim > 0, "encoder_plan: extents must be positive");
  std::vector<Index> widths{dim};
  if (dim <= code_dim) {
    if (dim != code_dim) widths.push_back(code_dim);
    return widths;
  }
  while (widths.back() / 2 > code_dim) widths.push_back(widths.back() / 2);
  widths.push_back(code_dim);
  return widths;
}

std::vector<Index> decoder_plan(Index code_dim, Index dim) {
  require(dim > 0 && code_dim > 0, "decoder_plan: extents must be positive");
  std::vector<Index> widths{code_dim};
  if (code_dim >= dim) {
    if (code_dim != dim) widths.push_back(dim);
    return widths;
  }
  while (widths.back() * 2 < dim) widths.push_back(widths.back() * 2);
  widths.push_back(dim);
  return widths;
}

NeuralModel make_twcrn(Index n_users, const TwcrnConfig& cfg, Rng& rng) {
  require(cfg.code_dim > 0 && cfg.channels > 0 && cfg.blocks >= 0,
          "make_twcrn: bad configuration");
  NeuralModel m;
  m.name = "twcrn";
  const Index d = cfg.code_dim;

  // Encoder: halving dense layers, tanh throughout.
  const auto enc = encoder_plan(n_users, d);
  for (std::size_t i = 0; i + 1 < enc.size(); ++i) {
    m.stack.emplace<DenseLayer<double>>(enc[i], enc[i + 1]);
    m.stack.emplace<TanhLayer<double>>(enc[i + 1]);
  }

  // Inflater and the convolutional core on d x d images.
  m.stack.emplace<InflateLayer<double>>(d);
  m.stack.emplace<Conv2dLayer<double>>(1, cfg.channels, d, d);
  m.stack.emplace<ReluLayer<double>>(cfg.channels * d * d);
  for (Index b = 0; b < cfg.blocks; ++b)
    m.stack.emplace<ResidualBlockLayer<double>>(cfg.channels, d, d);
  m.stack.emplace<GlobalAvgPoolLayer<double>>(cfg.channels, d, d);
  m.stack.emplace<DenseLayer<double>>(cfg.channels, d);
  m.stack.emplace<TanhLayer<double>>(d);

  // Decoder: doubling dense layers, tanh on all but the final (linear)
  // layer so the sign rule stays meaningful.
  const auto dec = decoder_plan(d, n_users);
  for (std::size_t i = 0; i + 1 < dec.size(); ++i) {
    m.stack.emplace<DenseLayer<double>>(dec[i], dec[i + 1]);
    if (i + 2 < dec.size()) m.stack.emplace<TanhLayer<double>>(dec[i + 1]);
  }

  require(m.stack.out_features() == n_users, "make_twcrn: decoder shape break");
  m.stack.init(rng);
  return m;
}

void save_model(const std::string& path, NeuralModel& model) {
  std::vector<NamedTensor> tensors;
  for (auto& p : model.stack.params()) {
    NamedTensor t;
    t.name = p.name;
    t.shape = {static_cast<std::uint64_t>(p.value->rows()),
               static_cast<std::uint64_t>(p.value->cols())};
    t.values = *p.value;
    tensors.push_back(std::move(t));
  }
  save_checkpoint(path, tensors);
}

void load_model_params(const std::string& path, NeuralModel& model) {
  const auto tensors = load_checkpoint(path);
  auto params = model.stack.params();
  require(tensors.size() == params.size(),
          "load_model_params: tensor count mismatch in " + path);
  for (std::size_t i = 0; i < params.size(); ++i) {
    require(tensors[i].name == params[i].name,
            "load_model_params: tensor name mismatch: " + tensors[i].name);
    require(tensors[i].values.rows() == params[i].value->rows() &&
                tensors[i].values.cols() == params[i].value->cols(),
            "load_model_params: tensor shape mismatch: " + tensors[i].name);
    *params[i].value = tensors[i].values;
  }
}

}  // namespace casc
