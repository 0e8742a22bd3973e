#include "belnet/pde.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace belnet::pde {

namespace {

constexpr double kPi = 3.14159265358979323846;

// 5-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                           0.5384693101056831, 0.9061798459386640};
constexpr double kGw[5] = {0.2369268850561891, 0.4786286704993665,
                           0.5688888888888889, 0.4786286704993665,
                           0.2369268850561891};

double gauss5(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 5; ++i) s += kGw[i] * f(c + hw * kGx[i]);
  return s * hw;
}

}  // namespace

void PdeConfig::validate() const {
  if (coarse_mesh >= fine_mesh)
    throw std::invalid_argument("PdeConfig: coarse_mesh must be < fine_mesh");
  double min_eps = epsilon;
  if (kind == PdeKind::Elliptic2dMultiscale) min_eps = 1.0 / 32.0;
  if (kind != PdeKind::Burgers && fine_mesh * min_eps < 10.0)
    throw std::invalid_argument(
        "PdeConfig: fine_mesh does not resolve epsilon (need >= 10 cells per "
        "period)");
}

double GridFunction1d::interpolate(double x) const {
  const double dx = grid.dx();
  if (grid.periodic) {
    double t = std::fmod(x - grid.a, grid.b - grid.a);
    if (t < 0) t += grid.b - grid.a;
    const int i = static_cast<int>(t / dx);
    const double w = t / dx - i;
    const int i1 = (i + 1) % grid.n;
    return (1.0 - w) * values[i % grid.n] + w * values[i1];
  }
  double t = std::clamp(x, grid.a, grid.b) - grid.a;
  int i = std::min(static_cast<int>(t / dx), grid.n - 1);
  const double w = t / dx - i;
  return (1.0 - w) * values[i] + w * values[i + 1];
}

double GridFunction2d::interpolate(double x, double y) const {
  const double h = grid.h();
  const double tx = std::clamp(x, 0.0, 1.0) / h;
  const double ty = std::clamp(y, 0.0, 1.0) / h;
  const int i = std::min(static_cast<int>(tx), grid.n - 1);
  const int j = std::min(static_cast<int>(ty), grid.n - 1);
  const double wx = tx - i, wy = ty - j;
  return (1.0 - wx) * (1.0 - wy) * at(i, j) + wx * (1.0 - wy) * at(i + 1, j) +
         (1.0 - wx) * wy * at(i, j + 1) + wx * wy * at(i + 1, j + 1);
}

GridFunction1d burgers_ic(double s, const Grid1d& mesh) {
  if (s < 0.0 || s > 4.0)
    throw std::invalid_argument(
        "burgers_ic: s must be in [0,4] (characteristics may cross)");
  const double t0 = 0.1;
  GridFunction1d out;
  out.grid = mesh;
  out.values.resize(mesh.node_count());
  for (int i = 0; i < mesh.node_count(); ++i) {
    const double x = mesh.x(i);
    // Solve xi + t0 s sin(xi) = x. Monotone for t0 s < 1, so Newton with a
    // bisection safeguard converges.
    double lo = x - t0 * s, hi = x + t0 * s;
    double xi = x;
    for (int it = 0; it < 100; ++it) {
      const double g = xi + t0 * s * std::sin(xi) - x;
      if (std::abs(g) < 1e-14) break;
      if (g > 0)
        hi = xi;
      else
        lo = xi;
      const double dg = 1.0 + t0 * s * std::cos(xi);
      double next = xi - g / dg;
      if (next <= lo || next >= hi) next = 0.5 * (lo + hi);
      xi = next;
    }
    out.values[i] = s * std::sin(xi);
  }
  return out;
}

std::vector<GridFunction1d> burgers_solve(const GridFunction1d& u0,
                                          double alpha, double t_end,
                                          int n_snapshots) {
  if (!u0.grid.periodic)
    throw std::invalid_argument("burgers_solve: initial condition must be periodic");
  if (alpha <= 0.0) throw std::invalid_argument("burgers_solve: alpha <= 0");
  const int n = u0.grid.n;
  const double dx = u0.grid.dx();

  std::vector<GridFunction1d> snaps;
  snaps.push_back(u0);
  Eigen::VectorXd u = u0.values;

  const double snap_dt = t_end / (n_snapshots - 1);
  for (int snap = 1; snap < n_snapshots; ++snap) {
    const double umax = std::max(u.cwiseAbs().maxCoeff(), 1e-12);
    const double dt_target =
        std::min(0.4 * dx / umax, 0.25 * dx * dx / alpha);
    if (dt_target < 1e-9)
      throw std::runtime_error("burgers_solve: CFL-limited step below floor");
    const int steps = std::max(1, static_cast<int>(std::ceil(snap_dt / dt_target)));
    const double dt = snap_dt / steps;
    // Heun (explicit RK2) on the conservative central semi-discretization:
    // both the flux difference and the Laplacian telescope over the periodic
    // ring, so mass is conserved to roundoff each step.
    Eigen::VectorXd k1(n), k2(n), ut(n);
    auto rhs = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
      for (int i = 0; i < n; ++i) {
        const double up = v[(i + 1) % n], um = v[(i + n - 1) % n];
        out[i] = -(up * up - um * um) / (4.0 * dx) +
                 alpha * (up - 2.0 * v[i] + um) / (dx * dx);
      }
    };
    for (int step = 0; step < steps; ++step) {
      rhs(u, k1);
      ut = u + dt * k1;
      rhs(ut, k2);
      u += 0.5 * dt * (k1 + k2);
    }
    GridFunction1d g;
    g.grid = u0.grid;
    g.values = u;
    snaps.push_back(std::move(g));
  }
  return snaps;
}

double kappa_elliptic1d(double x, double eps) {
  return 0.5 * std::sin(2.0 * kPi * x / eps) + 0.8;
}

double kappa_onefast(double x, double y, double eps) {
  return 2.0 + std::sin(2.0 * kPi * x / eps) * std::cos(2.0 * kPi * y / eps);
}

double kappa_multiscale(double x, double y) {
  const double e0 = 1.0 / 5.0, e1 = 1.0 / 4.0, e2 = 1.0 / 25.0, e3 = 1.0 / 16.0;
  const double e4 = 1.0 / 16.0, e5 = 1.0 / 32.0, e6 = 1.0 / 3.0, e7 = 1.0 / 9.0;
  const double term1 = std::sin(2.0 * kPi * x / e0) * std::cos(2.0 * kPi * y / e1) /
                       (2.0 + std::cos(2.0 * kPi * x / e2) * std::sin(2.0 * kPi * y / e3));
  const double term2 = std::sin(2.0 * kPi * x / e4) * std::cos(2.0 * kPi * y / e5) /
                       (2.0 + std::cos(2.0 * kPi * x / e6) * std::sin(2.0 * kPi * y / e7));
  // The raw two-scale formula dips slightly below zero on thin sets; floor
  // it so the operator stays elliptic for the fine/coarse solvers.
  return std::max(1.0 + term1 + term2, 0.05);
}

GridFunction1d elliptic1d_solve_exact(const std::function<double(double)>& kappa,
                                      const std::function<double(double)>& f,
                                      int n, int quad_sub) {
  // u(x) = int_0^x (c - F(t)) / kappa(t) dt with F(t) = int_0^t f and c such
  // that u(1) = 0.
  const int cells = n * quad_sub;
  const double h = 1.0 / cells;

  // Cumulative F at quadrature-cell boundaries.
  Eigen::VectorXd F(cells + 1);
  F[0] = 0.0;
  for (int i = 0; i < cells; ++i)
    F[i + 1] = F[i] + gauss5(f, i * h, (i + 1) * h);
  auto F_at = [&](double t) {
    const int i = std::min(static_cast<int>(t / h), cells - 1);
    return F[i] + gauss5(f, i * h, t);
  };

  // Cumulative integrals of 1/kappa and F/kappa with kappa positivity check.
  auto inv_kappa = [&](double t) {
    const double k = kappa(t);
    if (k <= 0.0)
      throw std::invalid_argument("elliptic1d: kappa <= 0 at x=" + std::to_string(t));
    return 1.0 / k;
  };
  auto F_over_kappa = [&](double t) { return F_at(t) * inv_kappa(t); };

  Eigen::VectorXd I1(cells + 1), I2(cells + 1);
  I1[0] = I2[0] = 0.0;
  for (int i = 0; i < cells; ++i) {
    I1[i + 1] = I1[i] + gauss5(inv_kappa, i * h, (i + 1) * h);
    I2[i + 1] = I2[i] + gauss5(F_over_kappa, i * h, (i + 1) * h);
  }
  const double c = I2[cells] / I1[cells];

  GridFunction1d out;
  out.grid = Grid1d{0.0, 1.0, n, false};
  out.values.resize(n + 1);
  for (int i = 0; i <= n; ++i) out.values[i] = c * I1[i * quad_sub] - I2[i * quad_sub];
  out.values[0] = 0.0;
  out.values[n] = 0.0;  // exact by construction of c; pinned against roundoff
  return out;
}

double homogenized_coefficient(const std::function<double(double)>& kappa_period) {
  double integral = 0.0;
  const int cells = 2000;
  for (int i = 0; i < cells; ++i)
    integral += gauss5([&](double y) { return 1.0 / kappa_period(y); },
                       i / static_cast<double>(cells),
                       (i + 1) / static_cast<double>(cells));
  return 1.0 / integral;
}

GridFunction1d elliptic1d_homogenized(const PdeConfig& config, int n) {
  const double kstar =
      homogenized_coefficient([](double y) { return kappa_elliptic1d(y, 1.0); });
  const double f = config.forcing;
  return elliptic1d_solve_exact([&](double) { return kstar; },
                                [&](double) { return f; }, n, 4);
}

GridFunction2d elliptic2d_solve(const std::function<double(double, double)>& kappa,
                                const std::function<double(double, double)>& f,
                                int n, double tol, int max_iter) {
  const int m = n - 1;  // interior nodes per dimension
  const double h = 1.0 / n;
  Eigen::MatrixXd k(n + 1, n + 1);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      k(i, j) = kappa(i * h, j * h);
      if (k(i, j) <= 0.0)
        throw std::invalid_argument("elliptic2d: kappa <= 0 on the grid");
    }
  auto harm = [](double a, double b) { return 2.0 * a * b / (a + b); };

  // Face coefficients around each interior node.
  Eigen::MatrixXd aE(m, m), aW(m, m), aN(m, m), aS(m, m), diag(m, m);
  for (int j = 1; j <= m; ++j)
    for (int i = 1; i <= m; ++i) {
      aE(i - 1, j - 1) = harm(k(i, j), k(i + 1, j));
      aW(i - 1, j - 1) = harm(k(i, j), k(i - 1, j));
      aN(i - 1, j - 1) = harm(k(i, j), k(i, j + 1));
      aS(i - 1, j - 1) = harm(k(i, j), k(i, j - 1));
      diag(i - 1, j - 1) = aE(i - 1, j - 1) + aW(i - 1, j - 1) +
                           aN(i - 1, j - 1) + aS(i - 1, j - 1);
    }

  auto apply = [&](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) {
        const int idx = j * m + i;
        double v = diag(i, j) * x[idx];
        if (i + 1 < m) v -= aE(i, j) * x[idx + 1];
        if (i > 0) v -= aW(i, j) * x[idx - 1];
        if (j + 1 < m) v -= aN(i, j) * x[idx + m];
        if (j > 0) v -= aS(i, j) * x[idx - m];
        out[idx] = v / (h * h);
      }
  };

  Eigen::VectorXd b(m * m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) b[j * m + i] = f((i + 1) * h, (j + 1) * h);

  // Jacobi-preconditioned CG.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m * m), r = b, z(m * m), p(m * m),
                  Ap(m * m);
  const double bnorm = b.norm();
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i)
      z[j * m + i] = r[j * m + i] * (h * h) / diag(i, j);
  p = z;
  double rz = r.dot(z);
  int it = 0;
  for (; it < max_iter; ++it) {
    if (r.norm() <= tol * bnorm) break;
    apply(p, Ap);
    const double alpha = rz / p.dot(Ap);
    x += alpha * p;
    r -= alpha * Ap;
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i)
        z[j * m + i] = r[j * m + i] * (h * h) / diag(i, j);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  if (it == max_iter && r.norm() > tol * bnorm)
    throw std::runtime_error(
        "elliptic2d_solve: CG did not converge, relative residual " +
        std::to_string(r.norm() / bnorm));

  GridFunction2d out;
  out.grid = Grid2d{n};
  out.values = Eigen::VectorXd::Zero((n + 1) * (n + 1));
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) out.at(i + 1, j + 1) = x[j * m + i];
  return out;
}

}  // namespace belnet::pde
