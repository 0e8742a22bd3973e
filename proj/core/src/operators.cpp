#include "belnet/operators.hpp"

#include <atomic>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace belnet::ops {

namespace {

std::atomic<long> g_extrapolation_count{0};

void note_extrapolation() {
  if (g_extrapolation_count.fetch_add(1) == 0) {
    std::cerr << "warning: query point outside the normalized training domain "
                 "(extrapolating)\n";
  }
}

void check_sensor_input(int expected_flat, const SensorSet& sensors,
                        const Eigen::VectorXd& u_values) {
  if (u_values.size() != sensors.count()) {
    throw std::invalid_argument(
        "operator forward: u_values length " + std::to_string(u_values.size()) +
        " != sensor count " + std::to_string(sensors.count()));
  }
  if (sensors.count() * sensors.dim() != expected_flat) {
    throw std::invalid_argument(
        "operator forward: flattened sensor length " +
        std::to_string(sensors.count() * sensors.dim()) +
        " != projection-net input width " + std::to_string(expected_flat));
  }
}

}  // namespace

Eigen::VectorXd SensorSet::flattened() const {
  Eigen::VectorXd out(locations.size());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < locations.rows(); ++i)
    for (Eigen::Index j = 0; j < locations.cols(); ++j) out[k++] = locations(i, j);
  return out;
}

Normalizer Normalizer::identity(int d_in, int d) {
  Normalizer n;
  n.coord_shift = Eigen::VectorXd::Zero(d_in);
  n.coord_scale = Eigen::VectorXd::Ones(d_in);
  n.query_shift = Eigen::VectorXd::Zero(d);
  n.query_scale = Eigen::VectorXd::Ones(d);
  return n;
}

Normalizer Normalizer::fit(const std::vector<OperatorSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("Normalizer::fit: empty set");
  const int d_in = samples.front().sensors.dim();
  const int d = static_cast<int>(samples.front().query.size());
  Eigen::VectorXd clo = Eigen::VectorXd::Constant(d_in, 1e300);
  Eigen::VectorXd chi = Eigen::VectorXd::Constant(d_in, -1e300);
  Eigen::VectorXd qlo = Eigen::VectorXd::Constant(d, 1e300);
  Eigen::VectorXd qhi = Eigen::VectorXd::Constant(d, -1e300);
  double vlo = 1e300, vhi = -1e300;
  for (const auto& s : samples) {
    for (int i = 0; i < s.sensors.count(); ++i)
      for (int j = 0; j < d_in; ++j) {
        clo[j] = std::min(clo[j], s.sensors.locations(i, j));
        chi[j] = std::max(chi[j], s.sensors.locations(i, j));
      }
    for (int j = 0; j < d; ++j) {
      qlo[j] = std::min(qlo[j], s.query[j]);
      qhi[j] = std::max(qhi[j], s.query[j]);
    }
    vlo = std::min(vlo, s.input_values.minCoeff());
    vhi = std::max(vhi, s.input_values.maxCoeff());
  }
  auto affine = [](double lo, double hi, double& shift, double& scale) {
    shift = 0.5 * (lo + hi);
    scale = (hi - lo) > 1e-300 ? 2.0 / (hi - lo) : 1.0;
  };
  Normalizer n = Normalizer::identity(d_in, d);
  for (int j = 0; j < d_in; ++j) affine(clo[j], chi[j], n.coord_shift[j], n.coord_scale[j]);
  for (int j = 0; j < d; ++j) affine(qlo[j], qhi[j], n.query_shift[j], n.query_scale[j]);
  affine(vlo, vhi, n.value_shift, n.value_scale);
  return n;
}

Eigen::VectorXd Normalizer::map_coords(const SensorSet& s) const {
  Eigen::VectorXd out(s.locations.size());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < s.locations.rows(); ++i)
    for (Eigen::Index j = 0; j < s.locations.cols(); ++j)
      out[k++] = (s.locations(i, j) - coord_shift[j]) * coord_scale[j];
  return out;
}

Eigen::VectorXd Normalizer::map_values(const Eigen::VectorXd& u) const {
  return (u.array() - value_shift) * value_scale;
}

Eigen::VectorXd Normalizer::map_query(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(x.size());
  bool outside = false;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    out[j] = (x[j] - query_shift[j]) * query_scale[j];
    if (std::abs(out[j]) > 1.0 + 1e-9 && query_scale[j] != 1.0) outside = true;
  }
  if (outside) note_extrapolation();
  return out;
}

BelNetParams init_belnet(const BelNetDims& dims, Activation act,
                         std::uint64_t seed, Activation construction_act) {
  BelNetParams p;
  p.dims = dims;
  for (int c = 0; c < dims.C; ++c)
    p.projection_nets.push_back(nn::init_mlp(
        {dims.N * dims.d_in, dims.proj_hidden, dims.N}, act,
        Activation::Identity, nn::mix_seed(seed, 100 + c)));
  for (int k = 0; k < dims.K; ++k)
    p.nonlinear_nets.push_back(nn::init_mlp({dims.C, dims.I, 1}, act,
                                            Activation::Identity,
                                            nn::mix_seed(seed, 1000 + k)));
  // Single affine layer + activation: a_x(Qx + b_x).
  p.construction_net = nn::init_mlp({dims.d, dims.K}, construction_act,
                                    construction_act, nn::mix_seed(seed, 2000));
  return p;
}

VanillaBelNetParams init_vanilla_belnet(const BelNetDims& dims, Activation act,
                                        std::uint64_t seed,
                                        Activation construction_act) {
  VanillaBelNetParams p;
  p.dims = dims;
  p.value_activation = act;
  for (int k = 0; k < dims.K; ++k)
    p.projection_nets.push_back(nn::init_mlp(
        {dims.N * dims.d_in, dims.proj_hidden, dims.N}, act,
        Activation::Identity, nn::mix_seed(seed, 100 + k)));
  p.construction_net = nn::init_mlp({dims.d, dims.K}, construction_act,
                                    construction_act, nn::mix_seed(seed, 2000));
  return p;
}

DeepOnetParams init_deeponet(int N, int K, int hidden, int d, Activation act,
                             std::uint64_t seed, Activation construction_act) {
  DeepOnetParams p;
  p.branch_net = nn::init_mlp({N, hidden, K}, act, Activation::Identity,
                              nn::mix_seed(seed, 100));
  p.trunk_net = nn::init_mlp({d, hidden, K}, act, construction_act,
                             nn::mix_seed(seed, 200));
  return p;
}

double belnet_forward(const BelNetParams& p, const Normalizer& norm,
                      const SensorSet& sensors, const Eigen::VectorXd& u_values,
                      const Eigen::VectorXd& x) {
  check_sensor_input(p.projection_nets.front().in_dim(), sensors, u_values);
  const Eigen::VectorXd ys = norm.map_coords(sensors);
  const Eigen::VectorXd un = norm.map_values(u_values);
  const Eigen::VectorXd xn = norm.map_query(x);

  const int C = static_cast<int>(p.projection_nets.size());
  const int K = static_cast<int>(p.nonlinear_nets.size());
  // Mean instead of plain dot: keeps projection coefficients on the same
  // scale for any sensor count (Monte Carlo quadrature of the projection).
  const double inv_n = 1.0 / static_cast<double>(un.size());
  Eigen::VectorXd coeff(C);
  for (int c = 0; c < C; ++c)
    coeff[c] = inv_n * p.projection_nets[c].forward(ys).dot(un);
  Eigen::VectorXd h(K);
  for (int k = 0; k < K; ++k) h[k] = p.nonlinear_nets[k].forward(coeff)[0];
  return h.dot(p.construction_net.forward(xn));
}

double vanilla_belnet_forward(const VanillaBelNetParams& p,
                              const Normalizer& norm, const SensorSet& sensors,
                              const Eigen::VectorXd& u_values,
                              const Eigen::VectorXd& x) {
  check_sensor_input(p.projection_nets.front().in_dim(), sensors, u_values);
  const Eigen::VectorXd ys = norm.map_coords(sensors);
  const Eigen::VectorXd un = norm.map_values(u_values);
  const Eigen::VectorXd xn = norm.map_query(x);

  const int K = static_cast<int>(p.projection_nets.size());
  const double inv_n = 1.0 / static_cast<double>(un.size());
  Eigen::VectorXd w(K);
  for (int k = 0; k < K; ++k) {
    const double s = inv_n * p.projection_nets[k].forward(ys).dot(un);
    w[k] = nn::activate(p.value_activation, s);
  }
  return w.dot(p.construction_net.forward(xn));
}

double deeponet_forward(const DeepOnetParams& p, const Normalizer& norm,
                        const Eigen::VectorXd& u_values,
                        const Eigen::VectorXd& x) {
  if (u_values.size() != p.branch_net.in_dim()) {
    throw std::invalid_argument(
        "deeponet_forward: branch requires the fixed sensor count N=" +
        std::to_string(p.branch_net.in_dim()) + ", got " +
        std::to_string(u_values.size()));
  }
  const Eigen::VectorXd un = norm.map_values(u_values);
  const Eigen::VectorXd xn = norm.map_query(x);
  return p.branch_net.forward(un).dot(p.trunk_net.forward(xn));
}

std::size_t count_params(const BelNetParams& p) {
  std::size_t n = p.construction_net.param_count();
  for (const auto& m : p.projection_nets) n += m.param_count();
  for (const auto& m : p.nonlinear_nets) n += m.param_count();
  return n;
}

std::size_t count_params(const VanillaBelNetParams& p) {
  std::size_t n = p.construction_net.param_count();
  for (const auto& m : p.projection_nets) n += m.param_count();
  return n;
}

std::size_t count_params(const DeepOnetParams& p) {
  return p.branch_net.param_count() + p.trunk_net.param_count();
}

std::string arch_name(ArchKind k) {
  switch (k) {
    case ArchKind::BelNet: return "belnet";
    case ArchKind::VanillaBelNet: return "vanilla_belnet";
    case ArchKind::DeepOnet: return "deeponet";
  }
  return "unknown";
}

ArchKind arch_from_name(const std::string& name) {
  if (name == "belnet") return ArchKind::BelNet;
  if (name == "vanilla_belnet") return ArchKind::VanillaBelNet;
  if (name == "deeponet") return ArchKind::DeepOnet;
  throw std::invalid_argument("unknown architecture: " + name);
}

OperatorModel::OperatorModel(BelNetParams p, Normalizer norm)
    : kind_(ArchKind::BelNet), params_(std::move(p)), norm_(std::move(norm)) {
  param_count_ = count_params(std::get<BelNetParams>(params_));
}

OperatorModel::OperatorModel(VanillaBelNetParams p, Normalizer norm)
    : kind_(ArchKind::VanillaBelNet),
      params_(std::move(p)),
      norm_(std::move(norm)) {
  param_count_ = count_params(std::get<VanillaBelNetParams>(params_));
}

OperatorModel::OperatorModel(DeepOnetParams p, Normalizer norm)
    : kind_(ArchKind::DeepOnet), params_(std::move(p)), norm_(std::move(norm)) {
  param_count_ = count_params(std::get<DeepOnetParams>(params_));
}

double OperatorModel::forward(const OperatorSample& s) const {
  switch (kind_) {
    case ArchKind::BelNet:
      return belnet_forward(belnet(), norm_, s.sensors, s.input_values, s.query);
    case ArchKind::VanillaBelNet:
      return vanilla_belnet_forward(vanilla(), norm_, s.sensors, s.input_values,
                                    s.query);
    case ArchKind::DeepOnet:
      return deeponet_forward(deeponet(), norm_, s.input_values, s.query);
  }
  return 0.0;
}

double OperatorModel::forward_cached(const OperatorSample& s,
                                     ForwardCache& cache) const {
  if (kind_ == ArchKind::BelNet) {
    const auto& p = belnet();
    check_sensor_input(p.projection_nets.front().in_dim(), s.sensors,
                       s.input_values);
    const Eigen::VectorXd ys = norm_.map_coords(s.sensors);
    cache.un = norm_.map_values(s.input_values);
    const Eigen::VectorXd xn = norm_.map_query(s.query);
    const int C = static_cast<int>(p.projection_nets.size());
    const int K = static_cast<int>(p.nonlinear_nets.size());
    cache.sub_a.resize(C);
    cache.sub_b.resize(K);
    cache.aux_a.resize(C);
    cache.aux_b.resize(K);
    const double inv_n = 1.0 / static_cast<double>(cache.un.size());
    for (int c = 0; c < C; ++c)
      cache.aux_a[c] = inv_n *
          p.projection_nets[c].forward(ys, cache.sub_a[c]).dot(cache.un);
    for (int k = 0; k < K; ++k)
      cache.aux_b[k] = p.nonlinear_nets[k].forward(cache.aux_a, cache.sub_b[k])[0];
    cache.t = p.construction_net.forward(xn, cache.cons);
    cache.out = cache.aux_b.dot(cache.t);
    return cache.out;
  }
  if (kind_ == ArchKind::VanillaBelNet) {
    const auto& p = vanilla();
    check_sensor_input(p.projection_nets.front().in_dim(), s.sensors,
                       s.input_values);
    const Eigen::VectorXd ys = norm_.map_coords(s.sensors);
    cache.un = norm_.map_values(s.input_values);
    const Eigen::VectorXd xn = norm_.map_query(s.query);
    const int K = static_cast<int>(p.projection_nets.size());
    cache.sub_a.resize(K);
    cache.aux_a.resize(K);  // pre-activation u . p^k
    cache.aux_b.resize(K);  // a_u(u . p^k)
    const double inv_n = 1.0 / static_cast<double>(cache.un.size());
    for (int k = 0; k < K; ++k) {
      cache.aux_a[k] = inv_n *
          p.projection_nets[k].forward(ys, cache.sub_a[k]).dot(cache.un);
      cache.aux_b[k] = nn::activate(p.value_activation, cache.aux_a[k]);
    }
    cache.t = p.construction_net.forward(xn, cache.cons);
    cache.out = cache.aux_b.dot(cache.t);
    return cache.out;
  }
  const auto& p = deeponet();
  if (s.input_values.size() != p.branch_net.in_dim()) {
    throw std::invalid_argument(
        "deeponet forward: branch requires the fixed sensor count N=" +
        std::to_string(p.branch_net.in_dim()) + ", got " +
        std::to_string(s.input_values.size()));
  }
  cache.un = norm_.map_values(s.input_values);
  const Eigen::VectorXd xn = norm_.map_query(s.query);
  cache.sub_a.resize(1);
  cache.aux_a = p.branch_net.forward(cache.un, cache.sub_a[0]);
  cache.t = p.trunk_net.forward(xn, cache.cons);
  cache.out = cache.aux_a.dot(cache.t);
  return cache.out;
}

void OperatorModel::backward(const ForwardCache& cache, double upstream,
                             Eigen::Ref<Eigen::VectorXd> grad) const {
  if (grad.size() != static_cast<Eigen::Index>(param_count_)) {
    throw std::invalid_argument("backward: grad buffer length mismatch");
  }
  if (kind_ == ArchKind::BelNet) {
    const auto& p = belnet();
    const int C = static_cast<int>(p.projection_nets.size());
    const int K = static_cast<int>(p.nonlinear_nets.size());
    // Layout: projection nets, nonlinear nets, construction net.
    std::size_t off = 0;
    std::vector<std::size_t> proj_off(C);
    for (int c = 0; c < C; ++c) {
      proj_off[c] = off;
      off += p.projection_nets[c].param_count();
    }
    Eigen::VectorXd gcoeff = Eigen::VectorXd::Zero(C);
    Eigen::VectorXd up1(1);
    for (int k = 0; k < K; ++k) {
      up1[0] = upstream * cache.t[k];
      gcoeff += p.nonlinear_nets[k].backward(
          cache.sub_b[k], up1,
          grad.segment(off, p.nonlinear_nets[k].param_count()));
      off += p.nonlinear_nets[k].param_count();
    }
    p.construction_net.backward(
        cache.cons, upstream * cache.aux_b,
        grad.segment(off, p.construction_net.param_count()));
    const double inv_n = 1.0 / static_cast<double>(cache.un.size());
    for (int c = 0; c < C; ++c)
      p.projection_nets[c].backward(
          cache.sub_a[c], gcoeff[c] * inv_n * cache.un,
          grad.segment(proj_off[c], p.projection_nets[c].param_count()));
    return;
  }
  if (kind_ == ArchKind::VanillaBelNet) {
    const auto& p = vanilla();
    const int K = static_cast<int>(p.projection_nets.size());
    const double inv_n = 1.0 / static_cast<double>(cache.un.size());
    std::size_t off = 0;
    for (int k = 0; k < K; ++k) {
      const double ds = upstream * cache.t[k] *
                        nn::activate_deriv(p.value_activation, cache.aux_a[k],
                                           cache.aux_b[k]) *
                        inv_n;
      p.projection_nets[k].backward(
          cache.sub_a[k], ds * cache.un,
          grad.segment(off, p.projection_nets[k].param_count()));
      off += p.projection_nets[k].param_count();
    }
    p.construction_net.backward(
        cache.cons, upstream * cache.aux_b,
        grad.segment(off, p.construction_net.param_count()));
    return;
  }
  const auto& p = deeponet();
  std::size_t off = 0;
  p.branch_net.backward(cache.sub_a[0], upstream * cache.t,
                        grad.segment(off, p.branch_net.param_count()));
  off += p.branch_net.param_count();
  p.trunk_net.backward(cache.cons, upstream * cache.aux_a,
                       grad.segment(off, p.trunk_net.param_count()));
}

double OperatorModel::forward_backward(const OperatorSample& s, double upstream,
                                       Eigen::Ref<Eigen::VectorXd> grad) const {
  ForwardCache cache;
  const double out = forward_cached(s, cache);
  backward(cache, upstream, grad);
  return out;
}

namespace {

template <typename Fn>
void for_each_subnet(const OperatorModel& m, Fn&& fn) {
  switch (m.kind()) {
    case ArchKind::BelNet: {
      const auto& p = m.belnet();
      for (const auto& net : p.projection_nets) fn(net);
      for (const auto& net : p.nonlinear_nets) fn(net);
      fn(p.construction_net);
      break;
    }
    case ArchKind::VanillaBelNet: {
      const auto& p = m.vanilla();
      for (const auto& net : p.projection_nets) fn(net);
      fn(p.construction_net);
      break;
    }
    case ArchKind::DeepOnet: {
      const auto& p = m.deeponet();
      fn(p.branch_net);
      fn(p.trunk_net);
      break;
    }
  }
}

}  // namespace

Eigen::VectorXd OperatorModel::flatten() const {
  Eigen::VectorXd out(param_count_);
  std::size_t off = 0;
  for_each_subnet(*this, [&](const Mlp& net) {
    net.flatten_into(out.segment(off, net.param_count()));
    off += net.param_count();
  });
  return out;
}

void OperatorModel::unflatten(const Eigen::VectorXd& flat) {
  if (flat.size() != static_cast<Eigen::Index>(param_count_)) {
    throw std::invalid_argument("unflatten: length mismatch");
  }
  std::size_t off = 0;
  auto fn = [&](Mlp& net) {
    net.unflatten_from(flat.segment(off, net.param_count()));
    off += net.param_count();
  };
  switch (kind_) {
    case ArchKind::BelNet: {
      auto& p = std::get<BelNetParams>(params_);
      for (auto& net : p.projection_nets) fn(net);
      for (auto& net : p.nonlinear_nets) fn(net);
      fn(p.construction_net);
      break;
    }
    case ArchKind::VanillaBelNet: {
      auto& p = std::get<VanillaBelNetParams>(params_);
      for (auto& net : p.projection_nets) fn(net);
      fn(p.construction_net);
      break;
    }
    case ArchKind::DeepOnet: {
      auto& p = std::get<DeepOnetParams>(params_);
      fn(p.branch_net);
      fn(p.trunk_net);
      break;
    }
  }
}

std::size_t OperatorModel::projection_param_count() const {
  std::size_t total = 0;
  switch (kind_) {
    case ArchKind::BelNet:
      for (const auto& net : belnet().projection_nets)
        total += net.param_count();
      break;
    case ArchKind::VanillaBelNet:
      for (const auto& net : vanilla().projection_nets)
        total += net.param_count();
      break;
    case ArchKind::DeepOnet:
      total = deeponet().branch_net.param_count();
      break;
  }
  return total;
}

std::string OperatorModel::layout_descriptor() const {
  std::ostringstream os;
  os << arch_name(kind_);
  for_each_subnet(*this, [&](const Mlp& net) {
    os << ";";
    for (std::size_t i = 0; i < net.layers().size(); ++i) {
      const auto& l = net.layers()[i];
      if (i == 0) os << l.in_dim();
      os << "-" << l.out_dim() << nn::activation_name(l.activation)[0];
    }
  });
  return os.str();
}

}  // namespace belnet::ops
