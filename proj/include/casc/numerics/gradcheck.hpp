#pragma once

#include <string>

#include "casc/numerics/functions.hpp"
#include "casc/numerics/layers.hpp"

namespace casc {

struct GradCheckReport {
  double max_param_rel_error = 0.0;
  double max_input_rel_error = 0.0;
  std::string worst_param;

  double worst() const {
    return std::max(max_param_rel_error, max_input_rel_error);
  }
};

namespace detail {
// Relative error with a floor tied to the gradient's overall scale: below
// that floor the central difference is dominated by floating-point noise
// in the loss (|up - down| approaches the rounding error of the loss
// itself), so coordinates with near-zero derivatives are compared against
// the landscape scale rather than against themselves.
inline double rel_error(double a, double b, double scale_floor) {
  const double denom = std::max(scale_floor, std::abs(a) + std::abs(b));
  return std::abs(a - b) / denom;
}
}  // namespace detail

// Central finite differences against the analytic backward pass, with the
// MSE loss against a fixed target closing the loop. 64-bit only; the
// default step of 1e-5 puts the truncation error near 1e-10 for O(1)
// activations.
inline GradCheckReport grad_check(LayerStack<double>& stack, const Mat& input,
                                  const Mat& target, double step = 1e-5) {
  GradCheckReport report;

  auto loss_of = [&]() { return mse_loss(stack.forward(input), target).first; };

  // Analytic gradients.
  const Mat pred = stack.forward(input);
  const auto [loss0, gloss] = mse_loss(pred, target);
  (void)loss0;
  const Mat ginput = stack.backward(gloss);
  std::vector<Mat> analytic;
  for (auto& p : stack.params()) analytic.push_back(*p.grad);

  double g_scale = ginput.cwiseAbs().maxCoeff();
  for (const auto& g : analytic)
    if (g.size() > 0) g_scale = std::max(g_scale, g.cwiseAbs().maxCoeff());
  const double floor = std::max(1e-8, 1e-3 * g_scale);

  // Parameters.
  auto params = stack.params();
  for (std::size_t k = 0; k < params.size(); ++k) {
    Mat& value = *params[k].value;
    for (Index i = 0; i < value.rows(); ++i) {
      for (Index j = 0; j < value.cols(); ++j) {
        const double saved = value(i, j);
        value(i, j) = saved + step;
        const double up = loss_of();
        value(i, j) = saved - step;
        const double down = loss_of();
        value(i, j) = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double err = detail::rel_error(analytic[k](i, j), numeric, floor);
        if (err > report.max_param_rel_error) {
          report.max_param_rel_error = err;
          report.worst_param = params[k].name;
        }
      }
    }
  }

  // Input coordinates.
  Mat x = input;
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      const double saved = x(i, j);
      x(i, j) = saved + step;
      const double up = mse_loss(stack.forward(x), target).first;
      x(i, j) = saved - step;
      const double down = mse_loss(stack.forward(x), target).first;
      x(i, j) = saved;
      const double numeric = (up - down) / (2.0 * step);
      report.max_input_rel_error =
          std::max(report.max_input_rel_error,
                   detail::rel_error(ginput(i, j), numeric, floor));
    }
  }

  return report;
}

}  // namespace casc
