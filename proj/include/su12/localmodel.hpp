#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "su12/errors.hpp"
#include "su12/hermlin.hpp"
#include "su12/numutil.hpp"
#include "su12/painleve.hpp"

namespace su12 {
namespace localmodel {

// Discrete theta-reduction factors for the rotationally symmetric ansatz.
// The polar stencil applied to a field H12 = c(rho) e^{-i theta} collapses to
// a radial three-point system in which every theta difference contributes a
// fixed trigonometric factor of the theta step k. analytic() is the k -> 0
// limit (the true ODE reduction); matched(k) reproduces a 2-D grid with step
// k exactly, which is what seeds the disk solver without a discretization
// mismatch.
struct phase_factors {
  double q1 = 1.0;        // centered full-step factor sin(k)/k
  double q2 = 1.0;        // staggered half-step factor (sin(k/2)/(k/2))^2
  double cos_half = 1.0;  // midpoint-average weight cos(k/2)

  static phase_factors analytic() { return {}; }
  static phase_factors matched(double theta_step);
};

struct solve_options {
  // inner grid radius; 0 selects t^{2/3} rho_min = 0.05, just below where the
  // forcing term turns on
  double rho_min = 0.0;
  int max_newton = 200;
  double lambda_step = 0.02;
  phase_factors phases = phase_factors::analytic();
};

// Radial profiles of the rank-2 model metric
//   H(rho e^{i psi}) = [ rho f1(x)      f3(x) e^{-i psi} ]
//                      [ f3(x) e^{i psi}  f2(x) / rho    ]
// sampled at x = t^{2/3} rho over a log-spaced grid of physical radii.
// f3 is kept real; see eval_M_lambda.
struct local_solution {
  double lambda = 0.0;
  double t = 1.0;
  std::vector<double> grid;  // physical radii rho_0..rho_N
  std::vector<double> f1, f2, f3;
  double c_lambda = 0.0;
  double c_lambda_err = 0.0;
  double residual_max = 0.0;
  double tol = 0.0;

  // interpolants in log x; f1, f2 are stored as logs (both stay positive)
  numutil::pchip log_f1, log_f2, f3_interp;

  double x_front() const { return x0_; }
  double x_back() const { return x1_; }
  double x0_ = 0.0, x1_ = 0.0;
};

struct asymptotic_model {
  double lambda = 0.0;
  double c_lambda = 0.0;
};

// Unscaled discrete residual of the reduced radial equation on one
// three-point window: node radii rho(center) e^{-h}, rho, rho e^{h} carry
// symmetric matrices [[a, c], [c, b]]. Returns
//   E = dbar(H^{-1} dH) - t^2 (gamma0 gamma0* H det H - det H^{-1} H^{-1} beta0* beta0)
// evaluated at the center with the staggered stencil and the given
// theta-reduction factors. Index 0/1/2 = inner/center/outer node.
Eigen::Matrix2d radial_residual_window(const double a[3], const double b[3],
                                       const double c[3], double rho,
                                       double h, double t,
                                       const phase_factors& ph);

// Solve the lambda-family boundary value problem by damped Newton with
// continuation in lambda from the Painleve-seeded lambda = 0 solution.
// Boundary rows: at rho_min the interior equation with a ghost node
// reconstructed from the parity of the profiles (diagonal even in rho,
// off-diagonal odd); at rho_max the profile values of the power-law family,
// whose amplitude is an explicit unknown. residual_max and tol refer to the
// scaled residual, each interior row measured relative to the size of the
// terms it balances; see pde_residual for the unscaled field.
local_solution solve_local_model(double t, double lambda, double rho_max,
                                 int n_nodes, double tol,
                                 const solve_options& opt = {});
local_solution solve_local_model(double t, double lambda, double rho_max,
                                 int n_nodes, double tol,
                                 const painleve::solution& psi,
                                 const solve_options& opt = {});

// Metric value at a point of the plane; continuous extension at zeta = 0.
// Beyond the grid the exponentially matched power laws continue each entry.
hermlin::herm2 eval_H_t_lambda(const local_solution& sol,
                               std::complex<double> zeta);

// Radial symmetric-frame transform at the t = 1 radius x:
//   M(x) = (1/2x) [ f1+f2-2 f3   f1-f2      ]
//                 [ f1-f2        f1+f2+2 f3 ]
hermlin::herm2 eval_M_lambda(const local_solution& sol, double rho);

// Pure power-law tail diag(rho^{-1} mu^2, rho^{-1} mu^{-1}),
// mu = 4 c_lambda^{-1} rho^{-2 lambda}.
hermlin::herm2 M_infty_lambda(const asymptotic_model& model, double rho);

// Extrapolated tail extraction of c_lambda from 4 M22(x) x^{1-2 lambda};
// the spread of the raw tail samples feeds the error estimate.
double extract_c_lambda(const local_solution& sol, double* err_out = nullptr);

// Painleve closed form of the lambda = 0 metric,
// diag(rho e^{2p}, rho^{-1} e^{-2p}) with p = psi((4/3) t rho^{3/2}).
hermlin::herm2 lambda0_oracle(const painleve::solution& psi, double t,
                              double rho);

// Max entry modulus of the discrete equation residual at the grid nodes
// nearest to the sampled radii (unscaled; see radial_residual_window).
double pde_residual(const local_solution& sol,
                    const std::vector<std::complex<double>>& samples);

struct c_lambda_row {
  double lambda = 0.0;
  double c_lambda = 0.0;
  double err = 0.0;
  bool ok = false;
  std::string message;
};

// Per-row independent solves; failures are recorded in the row, the table is
// still produced. jobs > 1 runs rows on a small thread pool, output keeps
// input order.
std::vector<c_lambda_row> c_lambda_table(const std::vector<double>& lambda_grid,
                                         double t, double rho_max, int n_nodes,
                                         double tol, int jobs = 1);

}  // namespace localmodel
}  // namespace su12
