#pragma once

// Dense-layer networks with exact reverse-mode gradients, Glorot-uniform
// initialization and an Adam optimizer. All arithmetic is double precision.

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace belnet::nn {

enum class Activation { Tanh, Relu, Sigmoid, Identity, Sine };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

double activate(Activation a, double pre);
// Derivative of the activation given pre-activation and activated value.
double activate_deriv(Activation a, double pre, double post);

struct DenseLayer {
  Eigen::MatrixXd weights;  // out_dim x in_dim
  Eigen::VectorXd bias;     // out_dim
  Activation activation = Activation::Identity;

  int in_dim() const { return static_cast<int>(weights.cols()); }
  int out_dim() const { return static_cast<int>(weights.rows()); }
  std::size_t param_count() const { return weights.size() + bias.size(); }
};

class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<DenseLayer> layers);

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  int in_dim() const { return layers_.front().in_dim(); }
  int out_dim() const { return layers_.back().out_dim(); }
  std::size_t param_count() const { return param_count_; }

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

  // Intermediate state needed by backward(); one entry per layer.
  struct Cache {
    Eigen::VectorXd input;
    std::vector<Eigen::VectorXd> pre;   // pre-activation per layer
    std::vector<Eigen::VectorXd> post;  // activated output per layer
  };
  Eigen::VectorXd forward(const Eigen::VectorXd& x, Cache& cache) const;

  // Accumulates d(upstream . output)/d(params) into grad (length param_count,
  // layout: per layer, row-major weights then bias) and returns the gradient
  // with respect to the input.
  Eigen::VectorXd backward(const Cache& cache, const Eigen::VectorXd& upstream,
                           Eigen::Ref<Eigen::VectorXd> grad) const;

  void flatten_into(Eigen::Ref<Eigen::VectorXd> out) const;
  void unflatten_from(Eigen::Ref<const Eigen::VectorXd> in);

 private:
  std::vector<DenseLayer> layers_;
  std::size_t param_count_ = 0;
};

// Glorot-uniform weights, zero biases; fully reproducible from the seed.
// dims = {in, hidden..., out}; hidden layers use hidden_act, the last layer
// uses output_act.
Mlp init_mlp(const std::vector<int>& dims, Activation hidden_act,
             Activation output_act, std::uint64_t seed);

struct AdamState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  long step_count = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;

  static AdamState fresh(Eigen::Index n, double lr = 1e-3);
};

// Standard bias-corrected Adam update, in place.
void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> params,
               const Eigen::VectorXd& grads);

// Deterministic stream splitting for derived seeds (splitmix64 mixing).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace belnet::nn
