#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "belnet/nn.hpp"

#include <cmath>
#include <random>

using namespace belnet::nn;

namespace {

Mlp single_layer(const Eigen::MatrixXd& w, const Eigen::VectorXd& b,
                 Activation a) {
  DenseLayer layer{w, b, a};
  return Mlp({layer});
}

}  // namespace

TEST_CASE("identity layer passes input through") {
  const Mlp net = single_layer(Eigen::MatrixXd::Identity(2, 2),
                               Eigen::VectorXd::Zero(2), Activation::Identity);
  Eigen::VectorXd x(2);
  x << 1.0, 2.0;
  const Eigen::VectorXd y = net.forward(x);
  CHECK(y[0] == doctest::Approx(1.0));
  CHECK(y[1] == doctest::Approx(2.0));
}

TEST_CASE("tanh of zero pre-activation is zero") {
  const Mlp net = single_layer(Eigen::MatrixXd::Zero(1, 1),
                               Eigen::VectorXd::Zero(1), Activation::Tanh);
  Eigen::VectorXd x(1);
  x << 5.0;
  CHECK(net.forward(x)[0] == 0.0);
}

TEST_CASE("two-layer forward matches straight-line re-evaluation") {
  const Mlp net = init_mlp({3, 4, 2}, Activation::Tanh, Activation::Identity,
                           17);
  Eigen::VectorXd x(3);
  x << 0.3, -0.7, 1.1;
  const Eigen::VectorXd y = net.forward(x);

  const auto& l0 = net.layers()[0];
  const auto& l1 = net.layers()[1];
  Eigen::VectorXd h(4);
  for (int i = 0; i < 4; ++i) {
    double acc = l0.bias[i];
    for (int j = 0; j < 3; ++j) acc += l0.weights(i, j) * x[j];
    h[i] = std::tanh(acc);
  }
  for (int i = 0; i < 2; ++i) {
    double acc = l1.bias[i];
    for (int j = 0; j < 4; ++j) acc += l1.weights(i, j) * h[j];
    CHECK(y[i] == doctest::Approx(acc).epsilon(1e-12));
  }
}

TEST_CASE("linear layer gradient of weight is the input") {
  Eigen::MatrixXd w(1, 1);
  w << 3.0;
  const Mlp net = single_layer(w, Eigen::VectorXd::Zero(1),
                               Activation::Identity);
  Eigen::VectorXd x(1), upstream(1);
  x << 2.5;
  upstream << 1.0;
  Mlp::Cache cache;
  net.forward(x, cache);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(2);
  const Eigen::VectorXd gx = net.backward(cache, upstream, grad);
  CHECK(grad[0] == doctest::Approx(2.5));  // d(wx)/dw = x
  CHECK(grad[1] == doctest::Approx(1.0));  // d(wx+b)/db
  CHECK(gx[0] == doctest::Approx(3.0));    // d(wx)/dx = w
}

TEST_CASE("zero upstream gives zero gradients") {
  const Mlp net = init_mlp({2, 3, 2}, Activation::Sigmoid, Activation::Identity,
                           5);
  Eigen::VectorXd x(2);
  x << 0.4, -0.2;
  Mlp::Cache cache;
  net.forward(x, cache);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.param_count());
  const Eigen::VectorXd gx =
      net.backward(cache, Eigen::VectorXd::Zero(2), grad);
  CHECK(grad.norm() == 0.0);
  CHECK(gx.norm() == 0.0);
}

TEST_CASE("analytic gradients match central finite differences") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Activation acts[] = {Activation::Tanh, Activation::Sigmoid};
  for (int trial = 0; trial < 100; ++trial) {
    const int in = 1 + static_cast<int>(rng() % 4);
    const int hid = 1 + static_cast<int>(rng() % 6);
    const int out = 1 + static_cast<int>(rng() % 3);
    Mlp net = init_mlp({in, hid, out}, acts[trial % 2], Activation::Identity,
                       1000 + trial);
    Eigen::VectorXd x(in), upstream(out);
    for (int i = 0; i < in; ++i) x[i] = unit(rng);
    for (int i = 0; i < out; ++i) upstream[i] = unit(rng);

    Mlp::Cache cache;
    net.forward(x, cache);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.param_count());
    net.backward(cache, upstream, grad);

    Eigen::VectorXd theta(net.param_count());
    net.flatten_into(theta);
    Eigen::VectorXd probe = theta;
    const double h = 1e-5;
    for (Eigen::Index p = 0; p < theta.size(); ++p) {
      probe[p] = theta[p] + h;
      net.unflatten_from(probe);
      const double fp = upstream.dot(net.forward(x));
      probe[p] = theta[p] - h;
      net.unflatten_from(probe);
      const double fm = upstream.dot(net.forward(x));
      probe[p] = theta[p];
      const double fd = (fp - fm) / (2.0 * h);
      const double diff = std::abs(grad[p] - fd);
      const double scale = std::max(std::abs(grad[p]), std::abs(fd));
      CHECK((diff <= 1e-5 * scale || diff <= 1e-8));
    }
    net.unflatten_from(theta);
  }
}

TEST_CASE("relu gradient away from the kink") {
  Eigen::MatrixXd w(1, 1);
  w << 2.0;
  Eigen::VectorXd b(1);
  b << 1.0;
  const Mlp net = single_layer(w, b, Activation::Relu);
  Eigen::VectorXd x(1), upstream(1);
  upstream << 1.0;
  Mlp::Cache cache;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(2);

  x << 3.0;  // pre = 7 > 0
  net.forward(x, cache);
  net.backward(cache, upstream, grad);
  CHECK(grad[0] == doctest::Approx(3.0));

  grad.setZero();
  x << -3.0;  // pre = -5 < 0
  net.forward(x, cache);
  net.backward(cache, upstream, grad);
  CHECK(grad.norm() == 0.0);
}

TEST_CASE("initialization is seed-deterministic") {
  const Mlp a = init_mlp({3, 5, 2}, Activation::Tanh, Activation::Identity, 7);
  const Mlp b = init_mlp({3, 5, 2}, Activation::Tanh, Activation::Identity, 7);
  const Mlp c = init_mlp({3, 5, 2}, Activation::Tanh, Activation::Identity, 8);
  Eigen::VectorXd fa(a.param_count()), fb(b.param_count()), fc(c.param_count());
  a.flatten_into(fa);
  b.flatten_into(fb);
  c.flatten_into(fc);
  CHECK(fa == fb);
  CHECK(fa != fc);
}

TEST_CASE("glorot bounds and zero biases") {
  const Mlp net = init_mlp({6, 4}, Activation::Tanh, Activation::Tanh, 3);
  const auto& layer = net.layers()[0];
  const double bound = std::sqrt(6.0 / (6 + 4));
  CHECK(layer.weights.cwiseAbs().maxCoeff() <= bound);
  CHECK(layer.bias.norm() == 0.0);
}

TEST_CASE("param_count matches hand count and flat length") {
  const Mlp net = init_mlp({2, 3, 1}, Activation::Tanh, Activation::Identity,
                           1);
  CHECK(net.param_count() == 13);  // 2*3+3 + 3*1+1
  Eigen::VectorXd flat(net.param_count());
  net.flatten_into(flat);
  CHECK(flat.size() == 13);
}

TEST_CASE("flatten then unflatten round-trips") {
  Mlp net = init_mlp({3, 4, 2}, Activation::Sigmoid, Activation::Identity, 11);
  Eigen::VectorXd flat(net.param_count());
  net.flatten_into(flat);
  Eigen::VectorXd perturbed = flat;
  perturbed.array() += 0.5;
  net.unflatten_from(perturbed);
  Eigen::VectorXd back(net.param_count());
  net.flatten_into(back);
  CHECK((back - perturbed).norm() == 0.0);
}

TEST_CASE("layer chaining violations are rejected") {
  DenseLayer a{Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(3),
               Activation::Tanh};
  DenseLayer b{Eigen::MatrixXd::Zero(2, 4), Eigen::VectorXd::Zero(2),
               Activation::Identity};
  CHECK_THROWS_AS(Mlp({a, b}), std::invalid_argument);
  CHECK_THROWS_AS(init_mlp({2, 0, 1}, Activation::Tanh, Activation::Identity, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(init_mlp({2}, Activation::Tanh, Activation::Identity, 1),
                  std::invalid_argument);
}

TEST_CASE("forward rejects wrong input length") {
  const Mlp net = init_mlp({3, 2}, Activation::Tanh, Activation::Identity, 1);
  CHECK_THROWS_AS(net.forward(Eigen::VectorXd::Zero(4)), std::invalid_argument);
}

TEST_CASE("adam with zero gradient leaves parameters unchanged") {
  AdamState state = AdamState::fresh(3, 1e-2);
  Eigen::VectorXd params(3);
  params << 1.0, -2.0, 0.5;
  const Eigen::VectorXd before = params;
  adam_step(state, params, Eigen::VectorXd::Zero(3));
  CHECK((params - before).norm() == 0.0);
  CHECK(state.step_count == 1);
}

TEST_CASE("first adam step moves by lr in the gradient sign direction") {
  AdamState state = AdamState::fresh(2, 1e-3);
  Eigen::VectorXd params = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd grads(2);
  grads << 0.7, -1.3;
  adam_step(state, params, grads);
  // Bias-corrected first step: update = -lr * g / (|g| + ~eps).
  CHECK(params[0] == doctest::Approx(-1e-3).epsilon(1e-4));
  CHECK(params[1] == doctest::Approx(1e-3).epsilon(1e-4));
}

TEST_CASE("constant gradient update magnitude approaches lr") {
  AdamState state = AdamState::fresh(1, 1e-3);
  Eigen::VectorXd params = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd grads(1);
  grads << 0.42;
  double prev = params[0];
  double step_size = 0.0;
  for (int i = 0; i < 500; ++i) {
    adam_step(state, params, grads);
    step_size = std::abs(params[0] - prev);
    prev = params[0];
  }
  CHECK(step_size == doctest::Approx(1e-3).epsilon(1e-3));
}

TEST_CASE("adam rejects length mismatch") {
  AdamState state = AdamState::fresh(2, 1e-3);
  Eigen::VectorXd params = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(adam_step(state, params, Eigen::VectorXd::Zero(3)),
                  std::invalid_argument);
}

TEST_CASE("seed mixing separates streams") {
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
  CHECK(mix_seed(1, 0) != mix_seed(2, 0));
  CHECK(mix_seed(1, 5) == mix_seed(1, 5));
}

TEST_CASE("activation names round-trip") {
  for (Activation a : {Activation::Tanh, Activation::Relu, Activation::Sigmoid,
                       Activation::Identity})
    CHECK(activation_from_name(activation_name(a)) == a);
  CHECK_THROWS_AS(activation_from_name("swish"), std::invalid_argument);
}
