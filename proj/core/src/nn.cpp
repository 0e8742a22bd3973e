#include "belnet/nn.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace belnet::nn {

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Identity: return "identity";
    case Activation::Sine: return "sine";
  }
  return "unknown";
}

Activation activation_from_name(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "identity") return Activation::Identity;
  if (name == "sine") return Activation::Sine;
  throw std::invalid_argument("unknown activation: " + name);
}

double activate(Activation a, double pre) {
  switch (a) {
    case Activation::Tanh: return std::tanh(pre);
    case Activation::Relu: return pre > 0.0 ? pre : 0.0;
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-pre));
    case Activation::Identity: return pre;
    case Activation::Sine: return std::sin(pre);
  }
  return pre;
}

double activate_deriv(Activation a, double pre, double post) {
  switch (a) {
    case Activation::Tanh: return 1.0 - post * post;
    case Activation::Relu: return pre > 0.0 ? 1.0 : 0.0;
    case Activation::Sigmoid: return post * (1.0 - post);
    case Activation::Identity: return 1.0;
    case Activation::Sine: return std::cos(pre);
  }
  return 1.0;
}

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("Mlp: no layers");
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) {
    if (layers_[i].out_dim() != layers_[i + 1].in_dim()) {
      throw std::invalid_argument("Mlp: layer " + std::to_string(i) +
                                  " out_dim does not chain into layer " +
                                  std::to_string(i + 1));
    }
  }
  for (const auto& l : layers_) {
    if (l.bias.size() != l.weights.rows()) {
      throw std::invalid_argument("Mlp: bias length disagrees with weights");
    }
    param_count_ += l.param_count();
  }
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
  if (x.size() != in_dim()) {
    throw std::invalid_argument("mlp_forward: input length " +
                                std::to_string(x.size()) + " != in_dim " +
                                std::to_string(in_dim()) + " at layer 0");
  }
  Eigen::VectorXd h = x;
  for (const auto& l : layers_) {
    Eigen::VectorXd pre = l.weights * h + l.bias;
    h.resize(pre.size());
    for (Eigen::Index i = 0; i < pre.size(); ++i)
      h[i] = activate(l.activation, pre[i]);
  }
  return h;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x, Cache& cache) const {
  if (x.size() != in_dim()) {
    throw std::invalid_argument("mlp_forward: input length " +
                                std::to_string(x.size()) + " != in_dim " +
                                std::to_string(in_dim()) + " at layer 0");
  }
  cache.input = x;
  cache.pre.resize(layers_.size());
  cache.post.resize(layers_.size());
  const Eigen::VectorXd* h = &cache.input;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& l = layers_[k];
    cache.pre[k].noalias() = l.weights * (*h);
    cache.pre[k] += l.bias;
    cache.post[k].resize(cache.pre[k].size());
    for (Eigen::Index i = 0; i < cache.pre[k].size(); ++i)
      cache.post[k][i] = activate(l.activation, cache.pre[k][i]);
    h = &cache.post[k];
  }
  return cache.post.back();
}

Eigen::VectorXd Mlp::backward(const Cache& cache,
                              const Eigen::VectorXd& upstream,
                              Eigen::Ref<Eigen::VectorXd> grad) const {
  if (upstream.size() != out_dim()) {
    throw std::invalid_argument("mlp_backward: upstream length " +
                                std::to_string(upstream.size()) +
                                " != out_dim " + std::to_string(out_dim()));
  }
  if (grad.size() != static_cast<Eigen::Index>(param_count_)) {
    throw std::invalid_argument("mlp_backward: grad buffer length mismatch");
  }
  // Offsets of each layer's slice in the flat layout.
  std::vector<std::size_t> offset(layers_.size());
  std::size_t off = 0;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    offset[k] = off;
    off += layers_[k].param_count();
  }

  Eigen::VectorXd delta = upstream;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const auto& l = layers_[k];
    // delta through the activation.
    for (Eigen::Index i = 0; i < delta.size(); ++i)
      delta[i] *= activate_deriv(l.activation, cache.pre[k][i], cache.post[k][i]);

    const Eigen::VectorXd& in = (k == 0) ? cache.input : cache.post[k - 1];
    const Eigen::Index rows = l.weights.rows(), cols = l.weights.cols();
    double* gw = grad.data() + offset[k];
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double d = delta[r];
      double* row = gw + r * cols;
      for (Eigen::Index c = 0; c < cols; ++c) row[c] += d * in[c];
    }
    double* gb = gw + rows * cols;
    for (Eigen::Index r = 0; r < rows; ++r) gb[r] += delta[r];

    delta = l.weights.transpose() * delta;
  }
  return delta;
}

void Mlp::flatten_into(Eigen::Ref<Eigen::VectorXd> out) const {
  if (out.size() != static_cast<Eigen::Index>(param_count_)) {
    throw std::invalid_argument("flatten_into: buffer length mismatch");
  }
  std::size_t off = 0;
  for (const auto& l : layers_) {
    const Eigen::Index rows = l.weights.rows(), cols = l.weights.cols();
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) out[off++] = l.weights(r, c);
    for (Eigen::Index r = 0; r < rows; ++r) out[off++] = l.bias[r];
  }
}

void Mlp::unflatten_from(Eigen::Ref<const Eigen::VectorXd> in) {
  if (in.size() != static_cast<Eigen::Index>(param_count_)) {
    throw std::invalid_argument("unflatten_from: buffer length mismatch");
  }
  std::size_t off = 0;
  for (auto& l : layers_) {
    const Eigen::Index rows = l.weights.rows(), cols = l.weights.cols();
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) l.weights(r, c) = in[off++];
    for (Eigen::Index r = 0; r < rows; ++r) l.bias[r] = in[off++];
  }
}

Mlp init_mlp(const std::vector<int>& dims, Activation hidden_act,
             Activation output_act, std::uint64_t seed) {
  if (dims.size() < 2) throw std::invalid_argument("init_mlp: need >= 2 dims");
  for (int d : dims) {
    if (d <= 0) throw std::invalid_argument("init_mlp: non-positive dimension");
  }
  std::mt19937_64 rng(seed);
  std::vector<DenseLayer> layers;
  layers.reserve(dims.size() - 1);
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const int fan_in = dims[k], fan_out = dims[k + 1];
    const Activation act = (k + 2 == dims.size()) ? output_act : hidden_act;
    // Sine layers start with wider weights and random phases so the units
    // cover several oscillations instead of the near-linear regime.
    const double gain = act == Activation::Sine ? 8.0 : 1.0;
    const double limit = gain * std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer l;
    l.weights.resize(fan_out, fan_in);
    for (Eigen::Index r = 0; r < fan_out; ++r)
      for (Eigen::Index c = 0; c < fan_in; ++c) l.weights(r, c) = dist(rng);
    l.bias = Eigen::VectorXd::Zero(fan_out);
    if (act == Activation::Sine) {
      std::uniform_real_distribution<double> phase(-M_PI, M_PI);
      for (Eigen::Index r = 0; r < fan_out; ++r) l.bias(r) = phase(rng);
    }
    l.activation = act;
    layers.push_back(std::move(l));
  }
  return Mlp(std::move(layers));
}

AdamState AdamState::fresh(Eigen::Index n, double lr) {
  AdamState s;
  s.first_moment = Eigen::VectorXd::Zero(n);
  s.second_moment = Eigen::VectorXd::Zero(n);
  s.lr = lr;
  return s;
}

void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> params,
               const Eigen::VectorXd& grads) {
  const Eigen::Index n = params.size();
  if (grads.size() != n || state.first_moment.size() != n ||
      state.second_moment.size() != n) {
    throw std::invalid_argument("adam_step: length mismatch");
  }
  state.step_count += 1;
  const double b1 = state.beta1, b2 = state.beta2;
  state.first_moment = b1 * state.first_moment + (1.0 - b1) * grads;
  state.second_moment =
      b2 * state.second_moment + (1.0 - b2) * grads.cwiseProduct(grads);
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mhat = state.first_moment[i] / c1;
    const double vhat = state.second_moment[i] / c2;
    params[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps_hat);
  }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace belnet::nn
