#pragma once

// Executable counterparts of the constructive proof machinery: eta-nets,
// partition-of-unity weights, interpolants, and the reconstruction operator
// mapping interpolant values at arbitrary sensors to values at canonical
// sensors. Used as oracles by the test suites.

#include <Eigen/Dense>

#include <json.hpp>

#include <cstdint>
#include <string>

namespace belnet::theory {

struct Box {
  Eigen::VectorXd lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }

  static Box interval(double a, double b);
  static Box square(double a, double b);
};

// A finite point set whose eta-balls cover the domain box.
struct EtaNet {
  Eigen::MatrixXd points;  // m x dim
  double eta = 0.0;

  int size() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
};

// Uniform tensor grid with spacing <= eta; sufficient covering for boxes.
EtaNet uniform_eta_net(const Box& box, double eta);

// Dense-probe check of the covering property at resolution eta/10.
bool verify_net_property(const EtaNet& net, const Box& box);

// Hat function: 1 - ||y - z_j|| / eta inside the eta-ball, 0 outside.
double t_star(const Eigen::VectorXd& y, const Eigen::VectorXd& z_j, double eta);

// Normalized partition-of-unity weight for net point j at y.
double t_kj(const Eigen::VectorXd& y, const EtaNet& net, int j);

// All weights at once; throws if y is not covered by the net.
Eigen::VectorXd pou_weights(const EtaNet& net, const Eigen::VectorXd& y);

// u_k(y) = sum_j u(z_j) T_{k,j}(y); reproduces constants exactly.
double interpolate_uk(const Eigen::VectorXd& u_at_net, const EtaNet& net,
                      const Eigen::VectorXd& y);

// Rows: evaluation points, columns: net points; entry (i,j) = T_{k,j}(p_i).
Eigen::MatrixXd pou_matrix(const EtaNet& net, const Eigen::MatrixXd& points);

struct ReconstructionOperator {
  Eigen::MatrixXd T_y;  // N x C_delta
  Eigen::MatrixXd T_z;  // C x C_delta
  Eigen::MatrixXd M;    // C_delta x C_delta, = T_y^T T_y
  Eigen::MatrixXd v;    // C x N, solves v T_y = T_z
  double eps_u = 0.0;
  double delta = 0.0;
  double condition = 0.0;  // condition estimate of M
  double residual = 0.0;   // ||v T_y - T_z||_F
};

// Assembles T_y, T_z, M and solves for v by a symmetric factorization of M
// with one iterative-refinement pass. Throws if N < C_delta or if M is
// numerically singular (condition > 1e12).
ReconstructionOperator build_reconstruction(const EtaNet& net,
                                            const Eigen::MatrixXd& y_sensors,
                                            const Eigen::MatrixXd& z_sensors,
                                            double eps_u);

struct KyDiagnostics {
  bool member = false;
  double v_norm = 0.0;  // operator 2-norm, by SVD
  double bound = 0.0;   // eps_u / (2 sqrt(C delta^2)) - 1
  std::string reason;
};

KyDiagnostics check_ky_membership(const ReconstructionOperator& op, int C,
                                  double delta);

// max_i |(v u_k(y))_i - u_k(z)_i| for the given net values.
double reconstruction_identity_check(const ReconstructionOperator& op,
                                     const Eigen::VectorXd& u_at_net);

// Spectral norm via SVD.
double spectral_norm(const Eigen::MatrixXd& A);

// Numerical rank by singular-value counting.
int numerical_rank(const Eigen::MatrixXd& A, double tol = 1e-10);

// Seeded battery of residual, norm-law, rank and membership checks; the
// theory-check CLI subcommand serializes this report.
nlohmann::json run_theory_battery(std::uint64_t seed);

}  // namespace belnet::theory
