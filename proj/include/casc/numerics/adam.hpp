#pragma once

#include <vector>

#include "casc/common.hpp"

namespace casc {

struct AdamConfig {
  double step_size = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam over a fixed list of parameter matrices. Moments are
// zero-initialized and keyed by position, so the caller must pass the same
// parameter list (same order, same shapes) on every step.
template <typename Scalar = double>
class AdamState {
 public:
  explicit AdamState(AdamConfig cfg = {}) : cfg_(cfg) {}

  const AdamConfig& config() const { return cfg_; }
  long timestep() const { return t_; }

  void step(const std::vector<MatX<Scalar>*>& params,
            const std::vector<const MatX<Scalar>*>& grads) {
    require(params.size() == grads.size(), "adam_step: param/grad count mismatch");
    if (m_.empty()) {
      for (const auto* p : params) {
        m_.push_back(MatX<Scalar>::Zero(p->rows(), p->cols()));
        v_.push_back(MatX<Scalar>::Zero(p->rows(), p->cols()));
      }
    }
    require(m_.size() == params.size(), "adam_step: parameter list changed");
    ++t_;
    const Scalar b1 = static_cast<Scalar>(cfg_.beta1);
    const Scalar b2 = static_cast<Scalar>(cfg_.beta2);
    const Scalar corr1 = Scalar(1) - std::pow(b1, static_cast<Scalar>(t_));
    const Scalar corr2 = Scalar(1) - std::pow(b2, static_cast<Scalar>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      const MatX<Scalar>& g = *grads[k];
      require(g.allFinite(), "adam_step: non-finite gradient");
      require(g.rows() == params[k]->rows() && g.cols() == params[k]->cols(),
              "adam_step: grad shape mismatch");
      m_[k] = b1 * m_[k] + (Scalar(1) - b1) * g;
      v_[k] = b2 * v_[k] + (Scalar(1) - b2) * g.cwiseProduct(g);
      const MatX<Scalar> m_hat = m_[k] / corr1;
      const MatX<Scalar> v_hat = v_[k] / corr2;
      params[k]->noalias() -=
          static_cast<Scalar>(cfg_.step_size) *
          (m_hat.array() / (v_hat.array().sqrt() + static_cast<Scalar>(cfg_.epsilon)))
              .matrix();
    }
  }

 private:
  AdamConfig cfg_;
  long t_ = 0;
  std::vector<MatX<Scalar>> m_;
  std::vector<MatX<Scalar>> v_;
};

}  // namespace casc
