#pragma once

#include <cmath>
#include <utility>

#include "casc/common.hpp"

namespace casc {

// sigma_{a,b}(x) = 1 / (1 + exp(-a (b - x))).
// Note the orientation: for a > 0 this DECREASES in x.
template <typename Scalar>
Scalar sigmoid_ab(Scalar x, Scalar a, Scalar b) {
  return Scalar(1) / (Scalar(1) + std::exp(-a * (b - x)));
}

// Plain logistic, used by the synthetic generators.
template <typename Scalar>
Scalar logistic(Scalar x) {
  return Scalar(1) / (Scalar(1) + std::exp(-x));
}

// Temporal factor of the threshold baselines:
//   T(mu, sigma^2, t) = 1/2 erfc(-(ln t - mu) / (sigma sqrt(2)))
// i.e. the log-normal CDF of the post age.
template <typename Scalar>
Scalar erfc_half_transform(Scalar t_post, Scalar mu, Scalar sigma) {
  require(t_post > Scalar(0), "erfc_half_transform: t_post must be > 0");
  require(sigma > Scalar(0), "erfc_half_transform: sigma must be > 0");
  return Scalar(0.5) *
         std::erfc(-(std::log(t_post) - mu) / (sigma * std::sqrt(Scalar(2))));
}

// Mean squared error over all coefficients, plus d(loss)/d(pred).
template <typename Derived>
std::pair<typename Derived::Scalar, MatX<typename Derived::Scalar>> mse_loss(
    const Eigen::MatrixBase<Derived>& pred,
    const Eigen::MatrixBase<Derived>& target) {
  using Scalar = typename Derived::Scalar;
  require(pred.rows() == target.rows() && pred.cols() == target.cols(),
          "mse_loss: shape mismatch");
  const MatX<Scalar> diff = pred - target;
  const Scalar n = static_cast<Scalar>(diff.size());
  const Scalar loss = diff.squaredNorm() / n;
  MatX<Scalar> grad = (Scalar(2) / n) * diff;
  return {loss, std::move(grad)};
}

}  // namespace casc
