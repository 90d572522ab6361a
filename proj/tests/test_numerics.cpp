#include <doctest.h>

#include <cmath>

#include "casc/numerics/adam.hpp"
#include "casc/numerics/functions.hpp"
#include "casc/numerics/tensor.hpp"
#include "casc/rng.hpp"

using namespace casc;

TEST_CASE("sigmoid_ab formula") {
  CHECK(sigmoid_ab(0.7, 3.0, 0.7) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sigmoid_ab(-5.0, 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  // a=1, b=0, x=-ln 3  ->  1/(1+e^{-ln 3}) = 0.75
  CHECK(sigmoid_ab(-std::log(3.0), 1.0, 0.0) == doctest::Approx(0.75).epsilon(1e-12));
  // decreasing in x for a > 0
  CHECK(sigmoid_ab(1.0, 2.0, 0.0) < sigmoid_ab(0.5, 2.0, 0.0));
}

TEST_CASE("erfc_half_transform") {
  CHECK(erfc_half_transform(std::exp(1.5), 1.5, 2.0) == doctest::Approx(0.5).epsilon(1e-12));
  // mu=0, sigma=1, t=e -> Phi(1)
  CHECK(erfc_half_transform(std::exp(1.0), 0.0, 1.0) ==
        doctest::Approx(0.8413447460685429).epsilon(1e-10));
  // limits
  CHECK(erfc_half_transform(1e-12, 0.0, 1.0) < 1e-6);
  CHECK(erfc_half_transform(1e12, 0.0, 1.0) > 1.0 - 1e-6);
  CHECK_THROWS_AS(erfc_half_transform(0.0, 0.0, 1.0), CascError);
  CHECK_THROWS_AS(erfc_half_transform(-1.0, 0.0, 1.0), CascError);
  CHECK_THROWS_AS(erfc_half_transform(1.0, 0.0, 0.0), CascError);
}

TEST_CASE("mse_loss value and gradient") {
  Mat pred(1, 2), target(1, 2);
  pred << 1.0, -1.0;
  target << -1.0, 1.0;
  auto [loss, grad] = mse_loss(pred, target);
  CHECK(loss == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(grad(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(grad(0, 1) == doctest::Approx(-2.0).epsilon(1e-12));

  Mat same = Mat::Random(3, 4);
  CHECK(mse_loss(same, same).first == 0.0);

  Mat wrong(2, 2);
  CHECK_THROWS_AS(mse_loss(pred, wrong), CascError);
}

TEST_CASE("mse gradient matches central finite differences") {
  Rng rng(17);
  Mat pred(1, 10), target(1, 10);
  for (int j = 0; j < 10; ++j) {
    pred(0, j) = rng.normal(0, 1);
    target(0, j) = rng.normal(0, 1);
  }
  auto [loss, grad] = mse_loss(pred, target);
  (void)loss;
  const double h = 1e-5;
  for (int j = 0; j < 10; ++j) {
    Mat up = pred, down = pred;
    up(0, j) += h;
    down(0, j) -= h;
    const double numeric =
        (mse_loss(up, target).first - mse_loss(down, target).first) / (2 * h);
    CHECK(std::abs(grad(0, j) - numeric) < 1e-8);
  }
}

TEST_CASE("adam single step from zero") {
  AdamState<double> adam;
  Mat theta = Mat::Zero(1, 1);
  Mat g = Mat::Ones(1, 1);
  adam.step({&theta}, {&g});
  // bias-corrected first step is exactly -alpha * g / (|g| + eps)
  CHECK(std::abs(theta(0, 0) + 0.001) <= 1e-6);
}

TEST_CASE("adam ignores zero gradients") {
  AdamState<double> adam;
  Mat theta(2, 2);
  theta << 1, 2, 3, 4;
  const Mat before = theta;
  Mat g = Mat::Zero(2, 2);
  for (int i = 0; i < 5; ++i) adam.step({&theta}, {&g});
  CHECK((theta - before).norm() == 0.0);
}

TEST_CASE("adam step magnitude equals alpha under a constant gradient") {
  AdamState<double> adam;
  Mat theta = Mat::Zero(1, 1);
  Mat g = Mat::Constant(1, 1, 0.5);
  double prev = theta(0, 0);
  for (int i = 0; i < 200; ++i) {
    adam.step({&theta}, {&g});
    const double step = prev - theta(0, 0);
    CHECK(step == doctest::Approx(0.001).epsilon(1e-6));
    prev = theta(0, 0);
  }
}

TEST_CASE("adam rejects non-finite gradients") {
  AdamState<double> adam;
  Mat theta = Mat::Zero(1, 1);
  Mat g = Mat::Constant(1, 1, std::numeric_limits<double>::quiet_NaN());
  CHECK_THROWS_AS(adam.step({&theta}, {&g}), CascError);
}

TEST_CASE("adam is deterministic") {
  auto run = [] {
    AdamState<double> adam;
    Mat theta = Mat::Zero(2, 1);
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
      Mat g(2, 1);
      g << rng.normal(0, 1), rng.normal(0, 1);
      adam.step({&theta}, {&g});
    }
    return theta;
  };
  const Mat a = run(), b = run();
  CHECK((a - b).norm() == 0.0);
}

TEST_CASE("checkpoint container round trip") {
  std::vector<NamedTensor> tensors;
  Rng rng(23);
  NamedTensor a;
  a.name = "L00.weight";
  a.shape = {3, 4};
  a.values = Mat::Zero(3, 4);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 4; ++j) a.values(i, j) = rng.normal(0, 1);
  NamedTensor b;
  b.name = "L00.bias";
  b.shape = {3};
  b.values = Mat::Zero(3, 1);
  tensors = {a, b};

  const std::string path = "ckpt_roundtrip.bin";
  save_checkpoint(path, tensors);
  const auto loaded = load_checkpoint(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].name == "L00.weight");
  CHECK(loaded[0].shape == std::vector<std::uint64_t>{3, 4});
  CHECK((loaded[0].values - a.values).norm() == 0.0);
  CHECK(loaded[1].name == "L00.bias");
  CHECK((loaded[1].values - b.values).norm() == 0.0);
  std::remove(path.c_str());
}
