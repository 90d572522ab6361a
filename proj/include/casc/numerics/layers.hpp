#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "casc/common.hpp"
#include "casc/rng.hpp"

namespace casc {

// A parameter slot exposed by a layer: the value matrix and the gradient
// written by the most recent backward pass.
template <typename Scalar>
struct ParamRef {
  std::string name;
  MatX<Scalar>* value;
  MatX<Scalar>* grad;
};

// Differentiable layer over batched rows: forward maps (batch x in) to
// (batch x out) and caches whatever backward needs; backward consumes the
// upstream gradient of the exact shape forward produced, overwrites the
// parameter gradients and returns the input gradient.
template <typename Scalar = double>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string kind() const = 0;
  virtual Index in_features() const = 0;
  virtual Index out_features() const = 0;
  virtual MatX<Scalar> forward(const MatX<Scalar>& x) = 0;
  virtual MatX<Scalar> backward(const MatX<Scalar>& g) = 0;
  virtual std::vector<ParamRef<Scalar>> params() { return {}; }
  virtual void init(Rng&) {}
};

namespace detail {
// Uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
template <typename Scalar>
void init_uniform(MatX<Scalar>& w, Index fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (Index i = 0; i < w.rows(); ++i)
    for (Index j = 0; j < w.cols(); ++j)
      w(i, j) = static_cast<Scalar>((2.0 * rng.uniform01() - 1.0) * bound);
}
}  // namespace detail

template <typename Scalar = double>
class DenseLayer final : public Layer<Scalar> {
 public:
  DenseLayer(Index in, Index out, bool with_bias = true)
      : in_(in), out_(out), with_bias_(with_bias) {
    require(in > 0 && out > 0, "DenseLayer: extents must be positive");
    weight_ = MatX<Scalar>::Zero(out, in);
    bias_ = MatX<Scalar>::Zero(out, 1);
    grad_w_ = MatX<Scalar>::Zero(out, in);
    grad_b_ = MatX<Scalar>::Zero(out, 1);
  }

  std::string kind() const override { return "dense"; }
  Index in_features() const override { return in_; }
  Index out_features() const override { return out_; }

  MatX<Scalar> forward(const MatX<Scalar>& x) override {
    require(x.cols() == in_, "DenseLayer: input width mismatch");
    input_ = x;
    MatX<Scalar> y = x * weight_.transpose();
    if (with_bias_) y.rowwise() += bias_.col(0).transpose();
    return y;
  }

  MatX<Scalar> backward(const MatX<Scalar>& g) override {
    grad_w_.noalias() = g.transpose() * input_;
    if (with_bias_) grad_b_.col(0) = g.colwise().sum().transpose();
    return g * weight_;
  }

  std::vector<ParamRef<Scalar>> params() override {
    std::vector<ParamRef<Scalar>> p{{"weight", &weight_, &grad_w_}};
    if (with_bias_) p.push_back({"bias", &bias_, &grad_b_});
    return p;
  }

  void init(Rng& rng) override { detail::init_uniform(weight_, in_, rng); }

  MatX<Scalar>& weight() { return weight_; }

 private:
  Index in_, out_;
  bool with_bias_;
  MatX<Scalar> weight_, bias_, grad_w_, grad_b_, input_;
};

// Per-coordinate weight w_u, output u depends on input u alone.
template <typename Scalar = double>
class DiagScaleLayer final : public Layer<Scalar> {
 public:
  explicit DiagScaleLayer(Index dim) : dim_(dim) {
    weight_ = MatX<Scalar>::Zero(dim, 1);
    grad_w_ = MatX<Scalar>::Zero(dim, 1);
  }

  std::string kind() const override { return "diag_scale"; }
  Index in_features() const override { return dim_; }
  Index out_features() const override { return dim_; }

  MatX<Scalar> forward(const MatX<Scalar>& x) override {
    require(x.cols() == dim_, "DiagScaleLayer: input width mismatch");
    input_ = x;
    return x.array().rowwise() * weight_.col(0).transpose().array();
  }

  MatX<Scalar> backward(const MatX<Scalar>& g) override {
    grad_w_.col(0) = g.cwiseProduct(input_).colwise().sum().transpose();
    return g.array().rowwise() * weight_.col(0).transpose().array();
  }

  std::vector<ParamRef<Scalar>> params() override {
    return {{"weight", &weight_, &grad_w_}};
  }

  void init(Rng& rng) override { detail::init_uniform(weight_, 1, rng); }

  MatX<Scalar>& weight() { return weight_; }

 private:
  Index dim_;
  MatX<Scalar> weight_, grad_w_, input_;
};

// Dense map with a fixed boolean mask on the weights: row u only reads the
// inputs the mask admits. Off-mask weights are pinned at zero (their
// gradients are masked, so an optimizer never moves them).
template <typename Scalar = double>
class MaskedLinearLayer final : public Layer<Scalar> {
 public:
  MaskedLinearLayer(MatX<Scalar> mask)
      : dim_out_(mask.rows()), dim_in_(mask.cols()), mask_(std::move(mask)) {
    require(dim_in_ > 0 && dim_out_ > 0, "MaskedLinearLayer: empty mask");
    weight_ = MatX<Scalar>::Zero(dim_out_, dim_in_);
    grad_w_ = MatX<Scalar>::Zero(dim_out_, dim_in_);
  }

  std::string kind() const override { return "masked_linear"; }
  Index in_features() const override { return dim_in_; }
  Index out_features() const override { return dim_out_; }

  MatX<Scalar> forward(const MatX<Scalar>& x) override {
    require(x.cols() == dim_in_, "MaskedLinearLayer: input width mismatch");
    input_ = x;
    return x * weight_.cwiseProduct(mask_).transpose();
  }

  MatX<Scalar> backward(const MatX<Scalar>& g) override {
    grad_w_ = (g.transpose() * input_).cwiseProduct(mask_);
    return g * weight_.cwiseProduct(mask_);
  }

  std::vector<ParamRef<Scalar>> params() override {
    return {{"weight", &weight_, &grad_w_}};
  }

  void init(Rng& rng) override {
    detail::init_uniform(weight_, dim_in_, rng);
    weight_ = weight_.cwiseProduct(mask_);
  }

  const MatX<Scalar>& mask() const { return mask_; }
  MatX<Scalar>& weight() { return weight_; }

 private:
  Index dim_out_, dim_in_;
  MatX<Scalar> mask_, weight_, grad_w_, input_;
};

template <typename Scalar = double>
class TanhLayer final : public Layer<Scalar> {
 public:
  explicit TanhLayer(Index dim) : dim_(dim) {}
  std::string kind() const override { return "tanh"; }
  Index in_features() const override { return dim_; }
  Index out_features() const override { return dim_; }

  MatX<Scalar> forward(const MatX<Scalar>& x) override {
    require(x.cols() == dim_, "TanhLayer: input width mismatch");
    output_ = x.array().tanh();
    return output_;
  }

  MatX<Scalar> backward(const MatX<Scalar>& g) override {
    return g.array() * (Scalar(1) - output_.array().square());
  }

 private:
  Index dim_;
  MatX<Scalar> output_;
};

template <typename Scalar = double>
class ReluLayer final : public Layer<Scalar> {
 public:
  explicit ReluLayer(Index dim) : dim_(dim) {}
  std::string kind() const override { return "relu"; }
  Index in_features() const override { return dim_; }
  Index out_features() const override { return dim_; }

  MatX<Scalar> forward(const MatX<Scalar>& x) override {
    require(x.cols() == dim_, "ReluLayer: input width mismatch");
    output_ = x.cwiseMax(Scalar(0));
    return output_;
  }

  MatX<Scalar> backward(const MatX<Scalar>& g) override {
    return (output_.array() > Scalar(0)).select(g, MatX<Scalar>::Zero(g.rows(), g.cols()));
  }

 private:
  Index dim_;
  MatX<Scalar> output_;
};

// Copies a length-d vector into a d x d image row-wise, so a 1-D code can
// feed a 2-D convolutional core. Output feature order is row-major.
template <typename Scalar = double>
class InflateLayer final : public Layer<Scalar> {
 public:
  explicit InflateLayer(Index d) : d_(d) {}
  std::string kind() const override { return "inflate"; }
  Index in_features() const override { return d_; }
  Index out_features() const override { return d_ * d_; }

  MatX<Scalar> forward(const MatX<Scalar>& x) override {
    require(x.cols() == d_, "InflateLayer: input width mismatch");
    MatX<Scalar> y(x.rows(), d_ * d_);
    for (Index r = 0; r < d_; ++r) y.middleCols(r * d_, d_) = x;
    return y;
  }

  MatX<Scalar> backward(const MatX<Scalar>& g) override {
    MatX<Scalar> gx = MatX<Scalar>::Zero(g.rows(), d_);
    for (Index r = 0; r < d_; ++r) gx += g.middleCols(r * d_, d_);
    return gx;
  }

 private:
  Index d_;
};

// 3x3 same-padding convolution over channel-major flattened images:
// feature index = c*H*W + i*W + j. Implemented as im2col plus one batched
// matrix product. Batch rows are staged into row-major scratch so every
// patch copy is a contiguous run; the patch matrix is cached between
// forward and backward while it stays below a fixed byte budget and is
// rebuilt otherwise.
template <typename Scalar = double>
class Conv2dLayer final : public Layer<Scalar> {
  using RowMat =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

 public:
  Conv2dLayer(Index in_ch, Index out_ch, Index height, Index width,
              Index ksize = 3)
      : cin_(in_ch), cout_(out_ch), h_(height), w_(width), k_(ksize),
        pad_((ksize - 1) / 2) {
    require(ksize % 2 == 1, "Conv2dLayer: kernel size must be odd");
    require(in_ch > 0 && out_ch > 0 && height > 0 && width > 0,
            "Conv2dLayer: extents must be positive");
    kernel_ = MatX<Scalar>::Zero(cout_, cin_ * k_ * k_);
    bias_ = MatX<Scalar>::Zero(cout_, 1);
    grad_k_ = MatX<Scalar>::Zero(cout_, cin_ * k_ * k_);
    grad_b_ = MatX<Scalar>::Zero(cout_, 1);
  }

  std::string kind() const override { return "conv2d"; }
  Index in_features() const override { return cin_ * h_ * w_; }
  Index out_features() const override { return cout_ * h_ * w_; }

  MatX<Scalar> forward(const MatX<Scalar>& x) override {
    require(x.cols() == in_features(), "Conv2dLayer: input width mismatch");
    const Index hw = h_ * w_;
    const Index rows = x.rows() * hw;
    to_row_major(x, input_rm_);
    // The patch buffer persists across calls: interior entries are
    // overwritten every pass and the padding entries are structurally zero,
    // so one setZero at (re)allocation suffices.
    if (patches_.rows() < rows) patches_.setZero(rows, cin_ * k_ * k_);
    im2col(input_rm_, patches_);
    patch_rows_ = rows;
    if (yflat_.rows() < rows) yflat_.resize(rows, cout_);
    yflat_.topRows(rows).noalias() =
        patches_.topRows(rows) * kernel_.transpose();  // (B*HW) x Cout
    yflat_.topRows(rows).rowwise() += bias_.col(0).transpose();
    MatX<Scalar> y(x.rows(), cout_ * hw);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (Index co = 0; co < cout_; ++co)
      for (Index p = 0; p < hw; ++p)
        for (Index s = 0; s < x.rows(); ++s)
          y(s, co * hw + p) = yflat_(s * hw + p, co);
    return y;
  }

  MatX<Scalar> backward(const MatX<Scalar>& g) override {
    const Index hw = h_ * w_;
    const Index batch = g.rows();
    const Index rows = batch * hw;
    require(rows == patch_rows_, "Conv2dLayer: backward shape mismatch");
    if (gflat_.rows() < rows) gflat_.resize(rows, cout_);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (Index co = 0; co < cout_; ++co)
      for (Index s = 0; s < batch; ++s)
        for (Index p = 0; p < hw; ++p)
          gflat_(s * hw + p, co) = g(s, co * hw + p);
    grad_k_.noalias() = gflat_.topRows(rows).transpose() * patches_.topRows(rows);
    grad_b_.col(0) = gflat_.topRows(rows).colwise().sum().transpose();
    if (gpatches_.rows() < rows) gpatches_.resize(rows, cin_ * k_ * k_);
    gpatches_.topRows(rows).noalias() = gflat_.topRows(rows) * kernel_;
    const RowMat gx = col2im(gpatches_, batch);
    MatX<Scalar> out(batch, cin_ * hw);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (Index f = 0; f < cin_ * hw; ++f)
      for (Index s = 0; s < batch; ++s) out(s, f) = gx(s, f);
    return out;
  }

  std::vector<ParamRef<Scalar>> params() override {
    return {{"kernel", &kernel_, &grad_k_}, {"bias", &bias_, &grad_b_}};
  }

  void init(Rng& rng) override { detail::init_uniform(kernel_, cin_ * k_ * k_, rng); }

 private:
  static void to_row_major(const MatX<Scalar>& x, RowMat& out) {
    out.resize(x.rows(), x.cols());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (Index f = 0; f < x.cols(); ++f)
      for (Index s = 0; s < x.rows(); ++s) out(s, f) = x(s, f);
  }

  void im2col(const RowMat& x, MatX<Scalar>& patches) const {
    const Index hw = h_ * w_;
    const Index n_cols = cin_ * k_ * k_;
    // Each iteration owns one patch column: disjoint writes, so the loop
    // parallelizes without changing any result.
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (Index col = 0; col < n_cols; ++col) {
      const Index c = col / (k_ * k_);
      const Index di = (col / k_) % k_;
      const Index dj = col % k_;
      Scalar* dst_base = patches.col(col).data();
      // Valid source columns: 0 <= j + dj - pad < w_.
      const Index j0 = std::max<Index>(0, pad_ - dj);
      const Index j1 = std::min<Index>(w_, w_ + pad_ - dj);
      if (j0 >= j1) continue;
      for (Index s = 0; s < x.rows(); ++s) {
        const Scalar* src_base = x.data() + s * cin_ * hw + c * hw;
        for (Index i = 0; i < h_; ++i) {
          const Index si = i + di - pad_;
          if (si < 0 || si >= h_) continue;
          std::memcpy(dst_base + s * hw + i * w_ + j0,
                      src_base + si * w_ + j0 + dj - pad_,
                      sizeof(Scalar) * static_cast<std::size_t>(j1 - j0));
        }
      }
    }
  }

  MatX<Scalar> col2im(const MatX<Scalar>& gpatches, Index batch) const {
    const Index hw = h_ * w_;
    RowMat gx = RowMat::Zero(batch, cin_ * hw);
    // Parallel over input channels: each owns a disjoint slice of gx and
    // accumulates its 9 offsets in a fixed order.
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (Index c = 0; c < cin_; ++c) {
      for (Index di = 0; di < k_; ++di) {
        for (Index dj = 0; dj < k_; ++dj) {
          const Index col = (c * k_ + di) * k_ + dj;
          const Scalar* src_base = gpatches.col(col).data();
          const Index j0 = std::max<Index>(0, pad_ - dj);
          const Index j1 = std::min<Index>(w_, w_ + pad_ - dj);
          if (j0 >= j1) continue;
          for (Index s = 0; s < batch; ++s) {
            Scalar* dst_base = gx.data() + s * cin_ * hw + c * hw;
            for (Index i = 0; i < h_; ++i) {
              const Index si = i + di - pad_;
              if (si < 0 || si >= h_) continue;
              Scalar* dst = dst_base + si * w_ + j0 + dj - pad_;
              const Scalar* src = src_base + s * hw + i * w_ + j0;
              for (Index j = 0; j < j1 - j0; ++j) dst[j] += src[j];
            }
          }
        }
      }
    }
    return gx;
  }

  Index cin_, cout_, h_, w_, k_, pad_;
  MatX<Scalar> kernel_, bias_, grad_k_, grad_b_;
  RowMat input_rm_;
  // scratch buffers reused across calls; rows() is capacity, not extent
  MatX<Scalar> patches_, yflat_, gflat_, gpatches_;
  Index patch_rows_ = 0;
};

// Basic residual block: relu(x + conv2(relu(conv1(x)))), both convolutions
// 3x3 same-padding with channel count preserved.
template <typename Scalar = double>
class ResidualBlockLayer final : public Layer<Scalar> {
 public:
  ResidualBlockLayer(Index channels, Index height, Index width)
      : conv1_(channels, channels, height, width),
        conv2_(channels, channels, height, width) {}

  std::string kind() const override { return "residual_block"; }
  Index in_features() const override { return conv1_.in_features(); }
  Index out_features() const override { return conv2_.out_features(); }

  MatX<Scalar> forward(const MatX<Scalar>& x) override {
    mid_ = conv1_.forward(x).cwiseMax(Scalar(0));
    output_ = (conv2_.forward(mid_) + x).cwiseMax(Scalar(0));
    return output_;
  }

  MatX<Scalar> backward(const MatX<Scalar>& g) override {
    const MatX<Scalar> gs =
        (output_.array() > Scalar(0))
            .select(g, MatX<Scalar>::Zero(g.rows(), g.cols()));
    const MatX<Scalar> gmid_raw = conv2_.backward(gs);
    const MatX<Scalar> gmid =
        (mid_.array() > Scalar(0))
            .select(gmid_raw, MatX<Scalar>::Zero(g.rows(), g.cols()));
    return conv1_.backward(gmid) + gs;
  }

  std::vector<ParamRef<Scalar>> params() override {
    std::vector<ParamRef<Scalar>> out;
    for (auto& p : conv1_.params()) out.push_back({"conv1." + p.name, p.value, p.grad});
    for (auto& p : conv2_.params()) out.push_back({"conv2." + p.name, p.value, p.grad});
    return out;
  }

  void init(Rng& rng) override {
    conv1_.init(rng);
    conv2_.init(rng);
  }

 private:
  Conv2dLayer<Scalar> conv1_, conv2_;
  MatX<Scalar> mid_, output_;
};

// Mean over the spatial grid per channel.
template <typename Scalar = double>
class GlobalAvgPoolLayer final : public Layer<Scalar> {
 public:
  GlobalAvgPoolLayer(Index channels, Index height, Index width)
      : c_(channels), hw_(height * width) {}

  std::string kind() const override { return "global_avg_pool"; }
  Index in_features() const override { return c_ * hw_; }
  Index out_features() const override { return c_; }

  MatX<Scalar> forward(const MatX<Scalar>& x) override {
    require(x.cols() == c_ * hw_, "GlobalAvgPoolLayer: input width mismatch");
    MatX<Scalar> y(x.rows(), c_);
    for (Index c = 0; c < c_; ++c)
      y.col(c) = x.middleCols(c * hw_, hw_).rowwise().mean();
    return y;
  }

  MatX<Scalar> backward(const MatX<Scalar>& g) override {
    MatX<Scalar> gx(g.rows(), c_ * hw_);
    const Scalar scale = Scalar(1) / static_cast<Scalar>(hw_);
    for (Index c = 0; c < c_; ++c)
      gx.middleCols(c * hw_, hw_) = (g.col(c) * scale).replicate(1, hw_);
    return gx;
  }

 private:
  Index c_, hw_;
};

// An ordered composition of layers. Shapes are checked when layers are
// appended, never at inference time.
template <typename Scalar = double>
class LayerStack {
 public:
  LayerStack() = default;

  void append(std::unique_ptr<Layer<Scalar>> layer) {
    if (!layers_.empty())
      require(layers_.back()->out_features() == layer->in_features(),
              "LayerStack: shape break between " + layers_.back()->kind() +
                  " and " + layer->kind());
    layers_.push_back(std::move(layer));
  }

  template <typename L, typename... Args>
  L& emplace(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    append(std::move(layer));
    return ref;
  }

  Index in_features() const { return layers_.front()->in_features(); }
  Index out_features() const { return layers_.back()->out_features(); }
  std::size_t size() const { return layers_.size(); }
  Layer<Scalar>& layer(std::size_t i) { return *layers_[i]; }

  MatX<Scalar> forward(const MatX<Scalar>& x) {
    MatX<Scalar> h = x;
    for (auto& l : layers_) h = l->forward(h);
    return h;
  }

  MatX<Scalar> backward(const MatX<Scalar>& g) {
    MatX<Scalar> h = g;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
      h = (*it)->backward(h);
    return h;
  }

  std::vector<ParamRef<Scalar>> params() {
    std::vector<ParamRef<Scalar>> out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      for (auto& p : layers_[i]->params()) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "L%02zu.", i);
        out.push_back({buf + p.name, p.value, p.grad});
      }
    }
    return out;
  }

  void init(Rng& rng) {
    for (auto& l : layers_) l->init(rng);
  }

  std::vector<MatX<Scalar>> snapshot() {
    std::vector<MatX<Scalar>> vals;
    for (auto& p : params()) vals.push_back(*p.value);
    return vals;
  }

  void restore(const std::vector<MatX<Scalar>>& vals) {
    auto ps = params();
    require(ps.size() == vals.size(), "LayerStack::restore: snapshot mismatch");
    for (std::size_t i = 0; i < ps.size(); ++i) *ps[i].value = vals[i];
  }

 private:
  std::vector<std::unique_ptr<Layer<Scalar>>> layers_;
};

}  // namespace casc
