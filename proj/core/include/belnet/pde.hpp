#pragma once

// Reference and coarse PDE solvers: viscous Burgers with inviscid preroll
// for initial-condition generation, 1D multiscale elliptic with an
// exact-quadrature reference and homogenized coarse solution, and a 2D
// elliptic fine/coarse finite-volume solver.

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace belnet::pde {

enum class PdeKind { Burgers, Elliptic1d, Elliptic2dOneFast, Elliptic2dMultiscale };

struct PdeConfig {
  PdeKind kind = PdeKind::Burgers;
  double alpha = 0.1;        // Burgers viscosity
  double epsilon = 1.0 / 128.0;
  double forcing = 1.0;      // constant forcing (0.5 for the 1D elliptic)
  int fine_mesh = 512;       // cells per dimension
  int coarse_mesh = 16;
  double s = 1.0;            // Burgers initial-amplitude parameter

  void validate() const;     // mesh-resolution and ordering invariants
};

// Uniform 1D grid. Periodic grids carry n nodes x_i = a + i dx (x_n == x_0
// identified); non-periodic grids carry n+1 nodes including both boundaries.
struct Grid1d {
  double a = 0.0, b = 1.0;
  int n = 1;
  bool periodic = false;

  double dx() const { return (b - a) / n; }
  int node_count() const { return periodic ? n : n + 1; }
  double x(int i) const { return a + i * dx(); }
};

struct GridFunction1d {
  Grid1d grid;
  Eigen::VectorXd values;

  double interpolate(double x) const;  // linear; periodic wrap if periodic
};

// Node-centered grid on [0,1]^2 with (n+1)^2 nodes, boundary included,
// values stored row-major (j * (n+1) + i).
struct Grid2d {
  int n = 1;
  double h() const { return 1.0 / n; }
  int node_count() const { return (n + 1) * (n + 1); }
};

struct GridFunction2d {
  Grid2d grid;
  Eigen::VectorXd values;

  double at(int i, int j) const { return values[j * (grid.n + 1) + i]; }
  double& at(int i, int j) { return values[j * (grid.n + 1) + i]; }
  double interpolate(double x, double y) const;  // bilinear
};

// Inviscid preroll of s sin(x) to t = 0.1 on [0, 2pi] by the method of
// characteristics, inverted per node with safeguarded Newton.
GridFunction1d burgers_ic(double s, const Grid1d& mesh);

// Viscous Burgers with periodic boundary conditions: explicit Heun (RK2)
// steps with conservative central convection and central diffusion.
// Snapshots at uniform times {0, t_end/(n_snapshots-1), ..., t_end}.
std::vector<GridFunction1d> burgers_solve(const GridFunction1d& u0,
                                          double alpha, double t_end = 0.3,
                                          int n_snapshots = 6);

// kappa(x) = 0.5 sin(2 pi x / eps) + 0.8
double kappa_elliptic1d(double x, double eps);
// kappa(x,y) = 2 + sin(2 pi x / eps) cos(2 pi y / eps)
double kappa_onefast(double x, double y, double eps);
// Two-scale-fraction coefficient with eight scale parameters.
double kappa_multiscale(double x, double y);

// -(kappa u')' = f on [0,1], u(0)=u(1)=0, via the closed-form quadrature
// solution on the output grid (n+1 nodes). quad_sub controls subintervals
// per output interval (each integrated with 5-point Gauss).
GridFunction1d elliptic1d_solve_exact(const std::function<double(double)>& kappa,
                                      const std::function<double(double)>& f,
                                      int n, int quad_sub = 64);

// Harmonic mean of kappa over one unit period of the fast variable.
double homogenized_coefficient(const std::function<double(double)>& kappa_period);

// Constant-coefficient solve with kappa* = harmonic mean; the coarse input
// channel u_0 for the 1D experiment.
GridFunction1d elliptic1d_homogenized(const PdeConfig& config, int n);

// -div(kappa grad u) = f on [0,1]^2, u = 0 on the boundary. 5-point scheme
// with harmonic face averaging; Jacobi-preconditioned conjugate gradients to
// relative residual `tol`.
GridFunction2d elliptic2d_solve(const std::function<double(double, double)>& kappa,
                                const std::function<double(double, double)>& f,
                                int n, double tol = 1e-10, int max_iter = 50000);

}  // namespace belnet::pde
