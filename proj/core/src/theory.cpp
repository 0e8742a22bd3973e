#include "belnet/theory.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace belnet::theory {

Box Box::interval(double a, double b) {
  Box box;
  box.lo = Eigen::VectorXd::Constant(1, a);
  box.hi = Eigen::VectorXd::Constant(1, b);
  return box;
}

Box Box::square(double a, double b) {
  Box box;
  box.lo = Eigen::VectorXd::Constant(2, a);
  box.hi = Eigen::VectorXd::Constant(2, b);
  return box;
}

EtaNet uniform_eta_net(const Box& box, double eta) {
  if (eta <= 0.0) throw std::invalid_argument("uniform_eta_net: eta <= 0");
  const int dim = box.dim();
  std::vector<int> counts(dim);
  std::vector<double> steps(dim);
  long total = 1;
  for (int j = 0; j < dim; ++j) {
    const double len = box.hi[j] - box.lo[j];
    counts[j] = std::max(2, static_cast<int>(std::ceil(len / eta)) + 1);
    steps[j] = len / (counts[j] - 1);
    total *= counts[j];
  }
  EtaNet net;
  net.eta = eta;
  net.points.resize(total, dim);
  std::vector<int> idx(dim, 0);
  for (long r = 0; r < total; ++r) {
    for (int j = 0; j < dim; ++j)
      net.points(r, j) = box.lo[j] + idx[j] * steps[j];
    for (int j = dim - 1; j >= 0; --j) {
      if (++idx[j] < counts[j]) break;
      idx[j] = 0;
    }
  }
  return net;
}

bool verify_net_property(const EtaNet& net, const Box& box) {
  const int dim = box.dim();
  const double probe_step = net.eta / 10.0;
  std::vector<int> counts(dim);
  long total = 1;
  for (int j = 0; j < dim; ++j) {
    counts[j] = static_cast<int>(
                    std::ceil((box.hi[j] - box.lo[j]) / probe_step)) + 1;
    total *= counts[j];
  }
  std::vector<int> idx(dim, 0);
  Eigen::VectorXd y(dim);
  for (long r = 0; r < total; ++r) {
    for (int j = 0; j < dim; ++j)
      y[j] = std::min(box.hi[j], box.lo[j] + idx[j] * probe_step);
    double best = 1e300;
    for (int i = 0; i < net.size(); ++i)
      best = std::min(best, (net.points.row(i).transpose() - y).norm());
    if (best >= net.eta) return false;
    for (int j = dim - 1; j >= 0; --j) {
      if (++idx[j] < counts[j]) break;
      idx[j] = 0;
    }
  }
  return true;
}

double t_star(const Eigen::VectorXd& y, const Eigen::VectorXd& z_j,
              double eta) {
  if (eta <= 0.0) throw std::invalid_argument("t_star: eta <= 0");
  const double dist = (y - z_j).norm();
  return dist <= eta ? 1.0 - dist / eta : 0.0;
}

Eigen::VectorXd pou_weights(const EtaNet& net, const Eigen::VectorXd& y) {
  Eigen::VectorXd w(net.size());
  double denom = 0.0;
  for (int j = 0; j < net.size(); ++j) {
    w[j] = t_star(y, net.points.row(j).transpose(), net.eta);
    denom += w[j];
  }
  if (denom <= 0.0)
    throw std::invalid_argument("point not covered by eta-net");
  return w / denom;
}

double t_kj(const Eigen::VectorXd& y, const EtaNet& net, int j) {
  return pou_weights(net, y)[j];
}

double interpolate_uk(const Eigen::VectorXd& u_at_net, const EtaNet& net,
                      const Eigen::VectorXd& y) {
  if (u_at_net.size() != net.size())
    throw std::invalid_argument("interpolate_uk: value count != net size");
  return pou_weights(net, y).dot(u_at_net);
}

Eigen::MatrixXd pou_matrix(const EtaNet& net, const Eigen::MatrixXd& points) {
  Eigen::MatrixXd T(points.rows(), net.size());
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    T.row(i) = pou_weights(net, points.row(i).transpose()).transpose();
  return T;
}

double spectral_norm(const Eigen::MatrixXd& A) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

int numerical_rank(const Eigen::MatrixXd& A, double tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > tol * sv[0]) ++rank;
  return rank;
}

ReconstructionOperator build_reconstruction(const EtaNet& net,
                                            const Eigen::MatrixXd& y_sensors,
                                            const Eigen::MatrixXd& z_sensors,
                                            double eps_u) {
  const int N = static_cast<int>(y_sensors.rows());
  const int C_delta = net.size();
  if (N < C_delta)
    throw std::invalid_argument(
        "build_reconstruction: N < C_delta, M is singular");

  ReconstructionOperator op;
  op.eps_u = eps_u;
  op.delta = net.eta;  // interpolation error bound scale
  op.T_y = pou_matrix(net, y_sensors);
  op.T_z = pou_matrix(net, z_sensors);
  op.M = op.T_y.transpose() * op.T_y;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(op.T_y);
  const auto& sv = svd.singularValues();
  const double smin = sv[sv.size() - 1];
  op.condition = smin > 0.0 ? (sv[0] / smin) * (sv[0] / smin) : 1e300;
  if (op.condition > 1e12)
    throw std::runtime_error("y-hat outside K_y: M not invertible");

  // v = T_z M^{-1} T_y^T via LDLT with one iterative-refinement pass.
  Eigen::LDLT<Eigen::MatrixXd> ldlt(op.M);
  Eigen::MatrixXd S = ldlt.solve(op.T_y.transpose());
  S += ldlt.solve(op.T_y.transpose() - op.M * S);
  op.v = op.T_z * S;
  op.residual = (op.v * op.T_y - op.T_z).norm();
  return op;
}

KyDiagnostics check_ky_membership(const ReconstructionOperator& op, int C,
                                  double delta) {
  KyDiagnostics d;
  d.v_norm = spectral_norm(op.v);
  d.bound = op.eps_u / (2.0 * std::sqrt(C * delta * delta)) - 1.0;
  if (op.condition > 1e12) {
    d.reason = "M numerically singular";
  } else if (d.bound < 0.0) {
    d.reason = "infeasible bound (eps_u too small)";
  } else if (d.v_norm > d.bound) {
    d.reason = "||v|| exceeds bound";
  } else {
    d.member = true;
    d.reason = "ok";
  }
  return d;
}

double reconstruction_identity_check(const ReconstructionOperator& op,
                                     const Eigen::VectorXd& u_at_net) {
  const Eigen::VectorXd at_y = op.T_y * u_at_net;   // u_k(y-hat)
  const Eigen::VectorXd at_z = op.T_z * u_at_net;   // u_k(z-hat)
  return (op.v * at_y - at_z).cwiseAbs().maxCoeff();
}

namespace {

// Stratified sensor draw: per net point, `per_point` sensors uniform inside
// its eta/2 neighborhood (clamped to the box), then extras uniform over the
// box. Guarantees every column of T_y is touched.
Eigen::MatrixXd covered_sensors(const EtaNet& net, const Box& box,
                                int per_point, int extra, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int dim = box.dim();
  const int N = net.size() * per_point + extra;
  Eigen::MatrixXd Y(N, dim);
  int r = 0;
  for (int j = 0; j < net.size(); ++j)
    for (int k = 0; k < per_point; ++k) {
      for (int c = 0; c < dim; ++c) {
        double v = net.points(j, c) + (unit(rng) - 0.5) * net.eta;
        Y(r, c) = std::clamp(v, box.lo[c], box.hi[c]);
      }
      ++r;
    }
  for (int k = 0; k < extra; ++k) {
    for (int c = 0; c < dim; ++c)
      Y(r, c) = box.lo[c] + unit(rng) * (box.hi[c] - box.lo[c]);
    ++r;
  }
  return Y;
}

}  // namespace

nlohmann::json run_theory_battery(std::uint64_t seed) {
  nlohmann::json report;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // (a) Partition-of-unity sums on dense probes, 1D and 2D nets.
  {
    double worst = 0.0;
    const Box box1 = Box::interval(0.0, 1.0);
    const EtaNet net1 = uniform_eta_net(box1, 0.13);
    for (int i = 0; i < 5000; ++i) {
      Eigen::VectorXd y(1);
      y[0] = unit(rng);
      worst = std::max(worst, std::abs(pou_weights(net1, y).sum() - 1.0));
    }
    const Box box2 = Box::square(0.0, 1.0);
    const EtaNet net2 = uniform_eta_net(box2, 0.21);
    for (int i = 0; i < 5000; ++i) {
      Eigen::VectorXd y(2);
      y << unit(rng), unit(rng);
      worst = std::max(worst, std::abs(pou_weights(net2, y).sum() - 1.0));
    }
    report["partition_of_unity"] = {{"probes", 10000},
                                    {"max_abs_deviation", worst},
                                    {"pass", worst <= 1e-12}};
  }

  // (b) Reconstruction residual and identity over canonical basis inputs.
  {
    double worst_residual = 0.0, worst_identity = 0.0, worst_cond = 0.0;
    const Box box = Box::interval(0.0, 1.0);
    for (int cfg = 0; cfg < 50; ++cfg) {
      const double eta = 0.1 + 0.1 * unit(rng);
      const EtaNet net = uniform_eta_net(box, eta);
      const Eigen::MatrixXd y = covered_sensors(net, box, 2, net.size(), rng);
      const auto op = build_reconstruction(net, y, net.points, 1.0);
      worst_residual = std::max(worst_residual, op.residual);
      worst_cond = std::max(worst_cond, op.condition);
      for (int j = 0; j < net.size(); ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(net.size());
        e[j] = 1.0;
        worst_identity =
            std::max(worst_identity, reconstruction_identity_check(op, e));
      }
    }
    report["reconstruction"] = {{"configs", 50},
                                {"max_residual_fro", worst_residual},
                                {"max_identity_error", worst_identity},
                                {"max_condition", worst_cond},
                                {"pass", worst_residual < 1e-8 &&
                                             worst_identity < 1e-8}};
  }

  // (c) Block-repeat norm law and membership in the repeat family.
  {
    const Box box = Box::interval(0.0, 1.0);
    const EtaNet net = uniform_eta_net(box, 0.2);
    const Eigen::MatrixXd r_sensors = covered_sensors(net, box, 2, 2, rng);
    const Eigen::MatrixXd T_r = pou_matrix(net, r_sensors);
    const double base =
        std::sqrt(spectral_norm(((T_r.transpose() * T_r)).inverse()));
    double worst = 0.0;
    nlohmann::json rows = nlohmann::json::array();
    for (int n : {1, 2, 4, 8, 16}) {
      Eigen::MatrixXd Y(n * r_sensors.rows(), 1);
      for (int b = 0; b < n; ++b)
        Y.middleRows(b * r_sensors.rows(), r_sensors.rows()) = r_sensors;
      const Eigen::MatrixXd T_y = pou_matrix(net, Y);
      const Eigen::MatrixXd M = T_y.transpose() * T_y;
      const double norm = spectral_norm(M.inverse() * T_y.transpose());
      const double predicted = base / std::sqrt(static_cast<double>(n));
      worst = std::max(worst, std::abs(norm - predicted));
      rows.push_back({{"n", n}, {"norm", norm}, {"predicted", predicted}});
    }
    report["block_repeat"] = {{"rows", rows},
                              {"max_abs_deviation", worst},
                              {"pass", worst < 1e-10}};
  }

  // (d) Rank law on random instances, including rank-deficient ones.
  {
    bool ok = true;
    const Box box = Box::interval(0.0, 1.0);
    for (int cfg = 0; cfg < 20; ++cfg) {
      const EtaNet net = uniform_eta_net(box, 0.15 + 0.1 * unit(rng));
      const int N = net.size() + static_cast<int>(unit(rng) * net.size());
      Eigen::MatrixXd Y(N, 1);
      for (int i = 0; i < N; ++i) Y(i, 0) = unit(rng);
      const Eigen::MatrixXd T_y = pou_matrix(net, Y);
      const Eigen::MatrixXd M = T_y.transpose() * T_y;
      // Forming M = T_y^T T_y squares the singular values but also floors
      // them at roundoff level, so M gets a looser cutoff: well above the
      // eps-level noise, well below any genuine (squared) hat-weight value.
      const int rt = numerical_rank(T_y), rm = numerical_rank(M, 1e-12);
      if (rm != rt || rt > std::min(net.size(), N)) {
        ok = false;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(T_y);
        std::vector<double> sv(svd.singularValues().data(),
                               svd.singularValues().data() +
                                   svd.singularValues().size());
        report["rank_law_failure"] = {{"config", cfg},
                                      {"rank_T_y", rt},
                                      {"rank_M", rm},
                                      {"singular_values", sv}};
      }
    }
    report["rank_law"] = {{"configs", 20}, {"pass", ok}};
  }

  // Membership decision vs direct SVD inequality evaluation.
  {
    bool agree = true;
    const Box box = Box::interval(0.0, 1.0);
    const EtaNet net = uniform_eta_net(box, 0.25);
    for (double eps_u : {1e-3, 1.0, 10.0, 100.0}) {
      const Eigen::MatrixXd y = covered_sensors(net, box, 3, 4, rng);
      const auto op = build_reconstruction(net, y, net.points, eps_u);
      const auto diag = check_ky_membership(op, net.size(), net.eta);
      const double direct_norm = spectral_norm(op.v);
      const bool direct =
          direct_norm <= eps_u / (2.0 * std::sqrt(net.size() * net.eta * net.eta)) - 1.0;
      if (direct != diag.member) agree = false;
    }
    report["membership_vs_svd"] = {{"pass", agree}};
  }

  bool all = true;
  for (const char* key :
       {"partition_of_unity", "reconstruction", "block_repeat", "rank_law",
        "membership_vs_svd"})
    all = all && report[key]["pass"].get<bool>();
  report["all_pass"] = all;
  report["seed"] = seed;
  return report;
}

}  // namespace belnet::theory
