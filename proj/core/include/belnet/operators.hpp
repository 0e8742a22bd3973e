#pragma once

// The three operator architectures: generalized BelNet, vanilla BelNet and
// the Chen-Chen/DeepONet branch-trunk baseline, as differentiable
// compositions over belnet::nn.

#include "belnet/nn.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <variant>
#include <vector>

namespace belnet::ops {

using nn::Activation;
using nn::Mlp;

// Input-function evaluation locations. Flattened layout is point-major,
// coordinate-minor: (y1_x, y1_y, y2_x, y2_y, ...).
struct SensorSet {
  Eigen::MatrixXd locations;  // N x d_in

  int count() const { return static_cast<int>(locations.rows()); }
  int dim() const { return static_cast<int>(locations.cols()); }
  Eigen::VectorXd flattened() const;
};

// One training triple: where the input function was sampled, its values
// there, the query coordinate and the target value.
struct OperatorSample {
  SensorSet sensors;
  Eigen::VectorXd input_values;  // length N
  Eigen::VectorXd query;         // length d
  double target = 0.0;
  int instance = 0;  // groups samples belonging to one input function
};

// Affine per-channel normalization into [-1,1], fitted on training data and
// stored with the model. Applied inside every forward pass.
struct Normalizer {
  Eigen::VectorXd coord_shift, coord_scale;  // d_in
  double value_shift = 0.0, value_scale = 1.0;
  Eigen::VectorXd query_shift, query_scale;  // d

  static Normalizer identity(int d_in, int d);
  static Normalizer fit(const std::vector<OperatorSample>& samples);

  Eigen::VectorXd map_coords(const SensorSet& s) const;  // flattened
  Eigen::VectorXd map_values(const Eigen::VectorXd& u) const;
  Eigen::VectorXd map_query(const Eigen::VectorXd& x) const;
};

struct BelNetDims {
  int N = 0;      // sensor count
  int C = 0;      // basis count (projection nets)
  int K = 0;      // trunk width (nonlinear nets)
  int I = 0;      // nonlinear-net hidden width
  int d = 1;      // query dimension
  int d_in = 1;   // sensor coordinate dimension
  int proj_hidden = 64;
};

// Generalized BelNet: C projection nets (flattened sensor coords -> R^N),
// K nonlinear nets (R^C -> R, one hidden layer of width I, linear output),
// one construction net (x -> R^K).
struct BelNetParams {
  std::vector<Mlp> projection_nets;  // C nets
  std::vector<Mlp> nonlinear_nets;   // K nets
  Mlp construction_net;
  BelNetDims dims;
};

// Vanilla BelNet: K projection nets (flattened sensor coords -> R^N) whose
// linear output layer is the trainable coupling matrix, a value activation
// a_u on u.p^k, and the same construction net.
struct VanillaBelNetParams {
  std::vector<Mlp> projection_nets;  // K nets
  Mlp construction_net;
  Activation value_activation = Activation::Tanh;
  BelNetDims dims;  // C unused
};

// Unstacked DeepONet: branch on the raw value vector, trunk on the query.
// Not discretization invariant; the branch input length is fixed.
struct DeepOnetParams {
  Mlp branch_net;  // R^N -> R^K
  Mlp trunk_net;   // R^d -> R^K
};

// construction_act is the activation of the query-side (construction/trunk)
// net; the three-argument overloads reuse the hidden-layer activation.
BelNetParams init_belnet(const BelNetDims& dims, Activation act,
                         std::uint64_t seed, Activation construction_act);
VanillaBelNetParams init_vanilla_belnet(const BelNetDims& dims, Activation act,
                                        std::uint64_t seed,
                                        Activation construction_act);
DeepOnetParams init_deeponet(int N, int K, int hidden, int d, Activation act,
                             std::uint64_t seed, Activation construction_act);

inline BelNetParams init_belnet(const BelNetDims& dims, Activation act,
                                std::uint64_t seed) {
  return init_belnet(dims, act, seed, act);
}
inline VanillaBelNetParams init_vanilla_belnet(const BelNetDims& dims,
                                               Activation act,
                                               std::uint64_t seed) {
  return init_vanilla_belnet(dims, act, seed, act);
}
inline DeepOnetParams init_deeponet(int N, int K, int hidden, int d,
                                    Activation act, std::uint64_t seed) {
  return init_deeponet(N, K, hidden, d, act, seed, act);
}

double belnet_forward(const BelNetParams& p, const Normalizer& norm,
                      const SensorSet& sensors, const Eigen::VectorXd& u_values,
                      const Eigen::VectorXd& x);
double vanilla_belnet_forward(const VanillaBelNetParams& p,
                              const Normalizer& norm, const SensorSet& sensors,
                              const Eigen::VectorXd& u_values,
                              const Eigen::VectorXd& x);
double deeponet_forward(const DeepOnetParams& p, const Normalizer& norm,
                        const Eigen::VectorXd& u_values,
                        const Eigen::VectorXd& x);

std::size_t count_params(const BelNetParams& p);
std::size_t count_params(const VanillaBelNetParams& p);
std::size_t count_params(const DeepOnetParams& p);

enum class ArchKind { BelNet, VanillaBelNet, DeepOnet };

std::string arch_name(ArchKind k);
ArchKind arch_from_name(const std::string& name);

// Uniform wrapper used by the training loop: flat parameter vector, forward
// and fused forward/backward over one sample.
class OperatorModel {
 public:
  OperatorModel() = default;
  OperatorModel(BelNetParams p, Normalizer norm);
  OperatorModel(VanillaBelNetParams p, Normalizer norm);
  OperatorModel(DeepOnetParams p, Normalizer norm);

  ArchKind kind() const { return kind_; }
  std::size_t param_count() const { return param_count_; }
  const Normalizer& normalizer() const { return norm_; }
  Normalizer& normalizer() { return norm_; }

  const BelNetParams& belnet() const { return std::get<BelNetParams>(params_); }
  const VanillaBelNetParams& vanilla() const {
    return std::get<VanillaBelNetParams>(params_);
  }
  const DeepOnetParams& deeponet() const {
    return std::get<DeepOnetParams>(params_);
  }

  double forward(const OperatorSample& s) const;

  // Intermediate state of one forward pass, reusable across samples.
  struct ForwardCache {
    std::vector<Mlp::Cache> sub_a;  // projection nets / branch net
    std::vector<Mlp::Cache> sub_b;  // nonlinear nets / (unused)
    Mlp::Cache cons;                // construction / trunk net
    Eigen::VectorXd un, ya, aux_a, aux_b, t;
    double out = 0.0;
  };

  // Forward pass recording everything backward() needs; returns the output.
  double forward_cached(const OperatorSample& s, ForwardCache& cache) const;
  // Accumulates d(upstream * output)/d(params) into grad.
  void backward(const ForwardCache& cache, double upstream,
                Eigen::Ref<Eigen::VectorXd> grad) const;

  // Convenience fusion of the two calls above.
  double forward_backward(const OperatorSample& s, double upstream,
                          Eigen::Ref<Eigen::VectorXd> grad) const;

  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& flat);

  // Text descriptor of the parameter layout; hashed into checkpoints.
  std::string layout_descriptor() const;

  // Length of the leading flat-parameter segment holding the sensor-side
  // (projection/branch) nets.
  std::size_t projection_param_count() const;

 private:
  ArchKind kind_ = ArchKind::BelNet;
  std::variant<BelNetParams, VanillaBelNetParams, DeepOnetParams> params_;
  Normalizer norm_;
  std::size_t param_count_ = 0;
};

}  // namespace belnet::ops
