#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "belnet/theory.hpp"

#include <cmath>
#include <random>

using namespace belnet::theory;

TEST_CASE("uniform nets cover their box") {
  for (double eta : {0.1, 0.23, 0.5}) {
    const EtaNet net1 = uniform_eta_net(Box::interval(0.0, 1.0), eta);
    CHECK(verify_net_property(net1, Box::interval(0.0, 1.0)));
    const EtaNet net2 = uniform_eta_net(Box::square(-1.0, 1.0), eta);
    CHECK(verify_net_property(net2, Box::square(-1.0, 1.0)));
  }
}

TEST_CASE("a sparse point set is not an eta-net for small eta") {
  EtaNet net;
  net.points.resize(2, 1);
  net.points << 0.0, 1.0;
  net.eta = 0.2;  // the middle of [0,1] is uncovered
  CHECK_FALSE(verify_net_property(net, Box::interval(0.0, 1.0)));
}

TEST_CASE("hat function values at the center and the rim") {
  Eigen::VectorXd z(1), y(1);
  z << 0.5;
  y << 0.5;
  CHECK(t_star(y, z, 0.25) == doctest::Approx(1.0));
  y << 0.75;
  CHECK(t_star(y, z, 0.25) == doctest::Approx(0.0));
  y << 0.9;
  CHECK(t_star(y, z, 0.25) == 0.0);  // outside the ball
  y << 0.625;
  CHECK(t_star(y, z, 0.25) == doctest::Approx(0.5));
}

TEST_CASE("partition-of-unity weights are nonnegative and sum to one") {
  const Box box = Box::square(0.0, 1.0);
  const EtaNet net = uniform_eta_net(box, 0.3);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd y(2);
    y << unit(rng), unit(rng);
    const Eigen::VectorXd w = pou_weights(net, y);
    CHECK(w.minCoeff() >= 0.0);
    CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("pou weights reject uncovered points") {
  EtaNet net;
  net.points.resize(1, 1);
  net.points << 0.0;
  net.eta = 0.1;
  Eigen::VectorXd y(1);
  y << 0.5;
  CHECK_THROWS_WITH_AS(pou_weights(net, y), doctest::Contains("not covered"),
                       std::invalid_argument);
}

TEST_CASE("interpolant reproduces constants exactly") {
  const Box box = Box::interval(0.0, 1.0);
  const EtaNet net = uniform_eta_net(box, 0.17);
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(net.size(), 3.25);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd y(1);
    y << unit(rng);
    CHECK(interpolate_uk(u, net, y) == doctest::Approx(3.25).epsilon(1e-12));
  }
}

TEST_CASE("interpolant is exact at net points") {
  const EtaNet net = uniform_eta_net(Box::interval(0.0, 1.0), 0.2);
  Eigen::VectorXd u(net.size());
  for (int j = 0; j < net.size(); ++j) u[j] = std::sin(2.0 * j);
  for (int j = 0; j < net.size(); ++j) {
    const Eigen::VectorXd z = net.points.row(j).transpose();
    CHECK(interpolate_uk(u, net, z) == doctest::Approx(u[j]).epsilon(1e-12));
  }
}

namespace {

Eigen::MatrixXd spread_sensors(const EtaNet& net, int per_point,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd y(net.size() * per_point, net.dim());
  int r = 0;
  for (int j = 0; j < net.size(); ++j)
    for (int k = 0; k < per_point; ++k, ++r)
      for (int c = 0; c < net.dim(); ++c)
        y(r, c) = std::clamp(
            net.points(j, c) + (unit(rng) - 0.5) * net.eta, 0.0, 1.0);
  return y;
}

}  // namespace

TEST_CASE("reconstruction maps interpolant values exactly on a basis") {
  const Box box = Box::interval(0.0, 1.0);
  const EtaNet net = uniform_eta_net(box, 0.25);
  const Eigen::MatrixXd y = spread_sensors(net, 3, 12);
  const auto op = build_reconstruction(net, y, net.points, 1.0);
  CHECK(op.residual < 1e-10);
  for (int j = 0; j < net.size(); ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(net.size());
    e[j] = 1.0;
    CHECK(reconstruction_identity_check(op, e) < 1e-8);
  }
}

TEST_CASE("reconstruction requires at least as many sensors as net points") {
  const EtaNet net = uniform_eta_net(Box::interval(0.0, 1.0), 0.25);
  Eigen::MatrixXd y(net.size() - 1, 1);
  for (int i = 0; i < y.rows(); ++i) y(i, 0) = i * 0.1;
  CHECK_THROWS_AS(build_reconstruction(net, y, net.points, 1.0),
                  std::invalid_argument);
}

TEST_CASE("degenerate sensor sets are rejected as outside K_y") {
  const EtaNet net = uniform_eta_net(Box::interval(0.0, 1.0), 0.25);
  // All sensors piled on one spot: M is singular.
  Eigen::MatrixXd y = Eigen::MatrixXd::Constant(2 * net.size(), 1, 0.5);
  CHECK_THROWS_WITH_AS(build_reconstruction(net, y, net.points, 1.0),
                       doctest::Contains("K_y"), std::runtime_error);
}

TEST_CASE("block repetition scales the operator norm by inverse sqrt n") {
  const Box box = Box::interval(0.0, 1.0);
  const EtaNet net = uniform_eta_net(box, 0.2);
  const Eigen::MatrixXd r = spread_sensors(net, 2, 77);
  const Eigen::MatrixXd T_r = pou_matrix(net, r);
  const double base =
      std::sqrt(spectral_norm((T_r.transpose() * T_r).inverse()));
  for (int n : {2, 4}) {
    Eigen::MatrixXd y(n * r.rows(), 1);
    for (int b = 0; b < n; ++b) y.middleRows(b * r.rows(), r.rows()) = r;
    const Eigen::MatrixXd T_y = pou_matrix(net, y);
    const Eigen::MatrixXd M = T_y.transpose() * T_y;
    const double norm = spectral_norm(M.inverse() * T_y.transpose());
    CHECK(norm == doctest::Approx(base / std::sqrt(n)).epsilon(1e-10));
  }
}

TEST_CASE("spectral norm and numerical rank on known matrices") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  d(0, 0) = 2.0;
  d(1, 1) = -5.0;
  d(2, 2) = 0.5;
  CHECK(spectral_norm(d) == doctest::Approx(5.0));
  CHECK(numerical_rank(d) == 3);

  Eigen::MatrixXd r(3, 2);
  r << 1, 0, 0, 1, 1, 1;
  Eigen::MatrixXd low = r * r.transpose();  // rank 2
  CHECK(numerical_rank(low) == 2);
}

TEST_CASE("membership threshold responds to eps_u") {
  const Box box = Box::interval(0.0, 1.0);
  const EtaNet net = uniform_eta_net(box, 0.25);
  const Eigen::MatrixXd y = spread_sensors(net, 3, 5);
  const auto tight = build_reconstruction(net, y, net.points, 1e-6);
  CHECK_FALSE(check_ky_membership(tight, net.size(), net.eta).member);
  const auto loose = build_reconstruction(net, y, net.points, 1e4);
  CHECK(check_ky_membership(loose, net.size(), net.eta).member);
}

TEST_CASE("theory battery passes end to end") {
  const auto report = run_theory_battery(321);
  CHECK(report["all_pass"].get<bool>());
}
