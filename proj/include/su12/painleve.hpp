#pragma once

#include <vector>

#include "su12/errors.hpp"
#include "su12/numutil.hpp"

namespace su12 {
namespace painleve {

// Discrete solution of the radial sinh-Gordon problem
//   (x d/dx)^2 psi = (x^2/2) sinh(2 psi)
// with x psi'(x) -> -1/3 as x -> 0 and exponential decay at infinity,
// represented on a log-spaced grid.
struct solution {
  std::vector<double> grid;      // strictly increasing positive abscissae
  std::vector<double> psi;       // psi per node, positive decreasing
  std::vector<double> dpsi;      // d psi / dx per node
  std::vector<double> residual;  // per-row residual of the converged system
  double residual_max = 0.0;
  double tol = 0.0;

  // interpolants in y = log x, built once at construction
  numutil::pchip psi_interp;
  numutil::pchip dpsi_interp;
};

struct solve_options {
  double x_min = 1e-3;
  double x_max = 25.0;
  int n_nodes = 2048;
  double tol = 1e-10;
  int max_newton = 80;
};

solution solve_painleve(const solve_options& opt = {});
solution solve_painleve(double x_min, double x_max, int n_nodes, double tol);

// Branch tags for evaluation outside the solved window.
enum class branch { series = -1, grid = 0, decay = 1 };

struct psi_eval {
  double psi = 0.0;
  double dpsi = 0.0;
  branch br = branch::grid;
};

// Total evaluation on x > 0: logarithmic series below the grid, monotone
// cubic interpolation inside, K0-shaped decay above.
psi_eval eval_psi(const solution& sol, double x);

// eta(x) = (1 + 3 x psi'(x)) / 8; eta(0) = 0 by the small-x limit.
double eta(const solution& sol, double x);

// psi evaluated at the cusp scaling argument (8/3) t rho^{3/2}.
double psi_P(const solution& sol, double t, double rho, branch* br = nullptr);

}  // namespace painleve
}  // namespace su12
