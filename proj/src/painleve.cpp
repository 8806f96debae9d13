#include "su12/painleve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "su12/errors.hpp"
#include "su12/specfun.hpp"

namespace su12 {
namespace painleve {

namespace {

struct system_eval {
  std::vector<double> f;  // folded residual rows
  double norm_inf = 0.0;
};

// Rows: interior i use the second difference in y = log x of psi minus the
// sinh source. Row 0 enforces psi_y(x_min) = -1/3, row N-1 the Robin decay
// condition psi_y = -x K1(x)/K0(x) psi. Both one-sided second-order stencils
// reach two nodes in; adding (h/2) times the adjacent interior row removes
// the third unknown, keeping the system tridiagonal without changing its
// solution set.
system_eval eval_system(const std::vector<double>& x, const std::vector<double>& psi,
                        double h, double robin) {
  size_t n = x.size();
  system_eval se;
  se.f.resize(n);
  for (size_t i = 1; i + 1 < n; ++i) {
    se.f[i] = (psi[i - 1] - 2.0 * psi[i] + psi[i + 1]) / (h * h) -
              0.5 * x[i] * x[i] * std::sinh(2.0 * psi[i]);
  }
  double f0 = (-3.0 * psi[0] + 4.0 * psi[1] - psi[2]) / (2.0 * h) + 1.0 / 3.0;
  double fn = (3.0 * psi[n - 1] - 4.0 * psi[n - 2] + psi[n - 3]) / (2.0 * h) +
              robin * psi[n - 1];
  se.f[0] = f0 + 0.5 * h * se.f[1];
  se.f[n - 1] = fn - 0.5 * h * se.f[n - 2];
  for (double v : se.f) se.norm_inf = std::max(se.norm_inf, std::fabs(v));
  return se;
}

void fill_jacobian(const std::vector<double>& x, const std::vector<double>& psi,
                   double h, double robin, std::vector<double>& sub,
                   std::vector<double>& diag, std::vector<double>& sup) {
  size_t n = x.size();
  sub.assign(n - 1, 0.0);
  diag.assign(n, 0.0);
  sup.assign(n - 1, 0.0);
  auto source_d = [&](size_t i) { return -x[i] * x[i] * std::cosh(2.0 * psi[i]); };
  for (size_t i = 1; i + 1 < n; ++i) {
    sub[i - 1] = 1.0 / (h * h);
    diag[i] = -2.0 / (h * h) + source_d(i);
    sup[i] = 1.0 / (h * h);
  }
  diag[0] = -1.0 / h;
  sup[0] = 1.0 / h + 0.5 * h * source_d(1);
  diag[n - 1] = 1.0 / h + robin;
  sub[n - 2] = -1.0 / h - 0.5 * h * source_d(n - 2);
  return;
}

solution build_solution(std::vector<double> x, std::vector<double> psi, double h,
                        double robin, double tol) {
  size_t n = x.size();
  solution sol;
  sol.tol = tol;
  system_eval se = eval_system(x, psi, h, robin);
  sol.residual = se.f;
  sol.residual_max = se.norm_inf;

  sol.dpsi.resize(n);
  std::vector<double> psiy(n);
  for (size_t i = 1; i + 1 < n; ++i) psiy[i] = (psi[i + 1] - psi[i - 1]) / (2.0 * h);
  psiy[0] = (-3.0 * psi[0] + 4.0 * psi[1] - psi[2]) / (2.0 * h);
  psiy[n - 1] = (3.0 * psi[n - 1] - 4.0 * psi[n - 2] + psi[n - 3]) / (2.0 * h);
  for (size_t i = 0; i < n; ++i) sol.dpsi[i] = psiy[i] / x[i];

  std::vector<double> y(n);
  for (size_t i = 0; i < n; ++i) y[i] = std::log(x[i]);
  sol.psi_interp = numutil::pchip::fit(y, psi);
  sol.dpsi_interp = numutil::pchip::fit(y, sol.dpsi);
  sol.grid = std::move(x);
  sol.psi = std::move(psi);
  return sol;
}

std::vector<double> log_grid(double x_min, double x_max, int n) {
  std::vector<double> x(n);
  double lo = std::log(x_min), hi = std::log(x_max);
  for (int i = 0; i < n; ++i) x[i] = std::exp(lo + (hi - lo) * i / (n - 1));
  x[0] = x_min;
  x[n - 1] = x_max;
  return x;
}

// Damped Newton on the tridiagonal system; returns empty on divergence.
bool newton_drive(const std::vector<double>& x, std::vector<double>& psi, double h,
                  double robin, double tol, int max_newton, std::string* trace) {
  std::vector<double> sub, diag, sup;
  system_eval se = eval_system(x, psi, h, robin);
  for (int it = 0; it < max_newton; ++it) {
    if (se.norm_inf <= tol) return true;
    fill_jacobian(x, psi, h, robin, sub, diag, sup);
    std::vector<double> step = numutil::solve_tridiag(sub, diag, sup, se.f);
    double s = 1.0;
    bool accepted = false;
    for (int k = 0; k < 40; ++k) {
      std::vector<double> cand(psi.size());
      bool positive = true;
      for (size_t i = 0; i < psi.size(); ++i) {
        cand[i] = psi[i] - s * step[i];
        if (!(cand[i] > 0.0)) positive = false;
      }
      if (positive) {
        system_eval cand_se = eval_system(x, cand, h, robin);
        if (cand_se.norm_inf < se.norm_inf) {
          psi = std::move(cand);
          se = std::move(cand_se);
          accepted = true;
          break;
        }
      }
      s *= 0.5;
    }
    if (trace) {
      std::ostringstream os;
      os << "iter " << it << " residual " << se.norm_inf << " step " << s << "\n";
      *trace += os.str();
    }
    if (!accepted) return false;
  }
  return se.norm_inf <= tol;
}

}  // namespace

solution solve_painleve(double x_min, double x_max, int n_nodes, double tol) {
  solve_options opt;
  opt.x_min = x_min;
  opt.x_max = x_max;
  opt.n_nodes = n_nodes;
  opt.tol = tol;
  return solve_painleve(opt);
}

solution solve_painleve(const solve_options& opt) {
  if (!(opt.x_min > 0.0) || !(opt.x_min < 1.0) || !(opt.x_max > 1.0)) {
    throw domain_error("solve_painleve: need 0 < x_min < 1 < x_max");
  }
  if (opt.n_nodes < 64) throw domain_error("solve_painleve: need n_nodes >= 64");
  if (!(opt.tol > 0.0)) throw domain_error("solve_painleve: tol must be positive");

  std::vector<double> x = log_grid(opt.x_min, opt.x_max, opt.n_nodes);
  double h = (std::log(opt.x_max) - std::log(opt.x_min)) / (opt.n_nodes - 1);
  double robin = opt.x_max * specfun::bessel_k1_scaled(opt.x_max) /
                 specfun::bessel_k0_scaled(opt.x_max);

  std::vector<double> psi(x.size());
  for (size_t i = 0; i < x.size(); ++i) psi[i] = std::log1p(std::pow(x[i], -1.0 / 3.0));

  std::string trace;
  if (newton_drive(x, psi, h, robin, opt.tol, opt.max_newton, &trace)) {
    return build_solution(std::move(x), std::move(psi), h, robin, opt.tol);
  }

  // Continuation fallback: converge on a short window first, then extend the
  // initial guess by the matched decay tail and retry on the full grid.
  double x_mid = std::min(opt.x_max, 6.0);
  if (x_mid < opt.x_max) {
    solve_options inner = opt;
    inner.x_max = x_mid;
    inner.n_nodes = std::max(64, int(opt.n_nodes * std::log(x_mid / opt.x_min) /
                                     std::log(opt.x_max / opt.x_min)));
    solution short_sol = solve_painleve(inner);
    for (size_t i = 0; i < x.size(); ++i) {
      psi[i] = eval_psi(short_sol, x[i]).psi;
      psi[i] = std::max(psi[i], 1e-14);
    }
    trace.clear();
    if (newton_drive(x, psi, h, robin, opt.tol, opt.max_newton, &trace)) {
      return build_solution(std::move(x), std::move(psi), h, robin, opt.tol);
    }
  }
  throw solver_error("solve_painleve: Newton did not converge\n" + trace);
}

psi_eval eval_psi(const solution& sol, double x) {
  if (!(x > 0.0)) throw domain_error("eval_psi: x must be positive");
  psi_eval out;
  double x0 = sol.grid.front(), x1 = sol.grid.back();
  if (x < x0) {
    double c0 = sol.psi.front() + std::log(x0) / 3.0;
    out.psi = -std::log(x) / 3.0 + c0;
    out.dpsi = -1.0 / (3.0 * x);
    out.br = branch::series;
  } else if (x > x1) {
    double k0_ratio = specfun::bessel_k0_scaled(x) / specfun::bessel_k0_scaled(x1);
    double k1_ratio = specfun::bessel_k1_scaled(x) / specfun::bessel_k0_scaled(x1);
    double damp = std::exp(-(x - x1));
    out.psi = sol.psi.back() * k0_ratio * damp;
    out.dpsi = -sol.psi.back() * k1_ratio * damp;
    out.br = branch::decay;
  } else {
    double y = std::log(x);
    out.psi = sol.psi_interp.value(y);
    out.dpsi = sol.dpsi_interp.value(y);
    out.br = branch::grid;
  }
  return out;
}

double eta(const solution& sol, double x) {
  if (x < 0.0) throw domain_error("eta: x must be nonnegative");
  if (x == 0.0) return 0.0;
  psi_eval pe = eval_psi(sol, x);
  return (1.0 + 3.0 * x * pe.dpsi) / 8.0;
}

double psi_P(const solution& sol, double t, double rho, branch* br) {
  if (!(t > 0.0) || rho < 0.0) throw domain_error("psi_P: need t > 0 and rho >= 0");
  if (rho == 0.0) {
    if (br) *br = branch::series;
    return std::numeric_limits<double>::infinity();
  }
  double x = (8.0 / 3.0) * t * std::pow(rho, 1.5);
  psi_eval pe = eval_psi(sol, x);
  if (br) *br = pe.br;
  return pe.psi;
}

}  // namespace painleve
}  // namespace su12
