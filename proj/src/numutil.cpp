#include "su12/numutil.hpp"

#include <algorithm>
#include <cmath>

#include "su12/errors.hpp"

namespace su12 {
namespace numutil {

pchip pchip::fit(std::vector<double> x, std::vector<double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw domain_error("pchip: need at least two matching nodes");
  }
  for (size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) throw domain_error("pchip: nodes must increase");
  }
  size_t n = x.size();
  std::vector<double> h(n - 1), s(n - 1), d(n);
  for (size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    s[i] = (y[i + 1] - y[i]) / h[i];
  }
  if (n == 2) {
    d[0] = d[1] = s[0];
  } else {
    for (size_t i = 1; i + 1 < n; ++i) {
      if (s[i - 1] * s[i] <= 0.0) {
        d[i] = 0.0;
      } else {
        double w1 = 2.0 * h[i] + h[i - 1];
        double w2 = h[i] + 2.0 * h[i - 1];
        d[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
      }
    }
    auto edge = [](double h0, double h1, double s0, double s1) {
      double d0 = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
      if (d0 * s0 <= 0.0) return 0.0;
      if (s0 * s1 < 0.0 && std::fabs(d0) > 3.0 * std::fabs(s0)) return 3.0 * s0;
      return d0;
    };
    d[0] = edge(h[0], h[1], s[0], s[1]);
    d[n - 1] = edge(h[n - 2], h[n - 3], s[n - 2], s[n - 3]);
  }
  pchip p;
  p.x_ = std::move(x);
  p.y_ = std::move(y);
  p.d_ = std::move(d);
  return p;
}

int pchip::interval(double xq) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), xq);
  int i = int(it - x_.begin()) - 1;
  return std::clamp(i, 0, int(x_.size()) - 2);
}

double pchip::value(double xq) const {
  int i = interval(xq);
  double h = x_[i + 1] - x_[i];
  double u = (xq - x_[i]) / h;
  double h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
  double h10 = u * (1.0 - u) * (1.0 - u);
  double h01 = u * u * (3.0 - 2.0 * u);
  double h11 = u * u * (u - 1.0);
  return h00 * y_[i] + h * h10 * d_[i] + h01 * y_[i + 1] + h * h11 * d_[i + 1];
}

double pchip::deriv(double xq) const {
  int i = interval(xq);
  double h = x_[i + 1] - x_[i];
  double u = (xq - x_[i]) / h;
  double g00 = 6.0 * u * (u - 1.0);
  double g10 = (1.0 - u) * (1.0 - 3.0 * u);
  double g01 = -g00;
  double g11 = u * (3.0 * u - 2.0);
  return (g00 * y_[i] / h) + g10 * d_[i] + (g01 * y_[i + 1] / h) + g11 * d_[i + 1];
}

linfit_result linfit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw domain_error("linfit: need at least two matching samples");
  }
  double n = double(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw domain_error("linfit: degenerate abscissae");
  linfit_result r;
  r.slope = (n * sxy - sx * sy) / denom;
  r.intercept = (sy - r.slope * sx) / n;
  double ss_res = 0.0, ss_tot = 0.0;
  double ymean = sy / n;
  for (size_t i = 0; i < x.size(); ++i) {
    double fit = r.slope * x[i] + r.intercept;
    ss_res += (y[i] - fit) * (y[i] - fit);
    ss_tot += (y[i] - ymean) * (y[i] - ymean);
  }
  r.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return r;
}

double aitken(double r0, double r1, double r2) {
  double d1 = r1 - r0, d2 = r2 - r1;
  double dd = d2 - d1;
  if (std::fabs(dd) < 1e-3 * std::fabs(d2) || dd == 0.0) return r2;
  return r2 - d2 * d2 / dd;
}

std::vector<double> solve_tridiag(std::vector<double> sub, std::vector<double> diag,
                                  std::vector<double> sup, std::vector<double> rhs) {
  size_t n = diag.size();
  if (sub.size() != n - 1 || sup.size() != n - 1 || rhs.size() != n) {
    throw domain_error("solve_tridiag: inconsistent sizes");
  }
  for (size_t i = 1; i < n; ++i) {
    double w = sub[i - 1] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (size_t i = n - 1; i-- > 0;) {
    x[i] = (rhs[i] - sup[i] * x[i + 1]) / diag[i];
  }
  return x;
}

std::vector<Eigen::Vector3d> solve_block_tridiag(std::vector<Eigen::Matrix3d> sub,
                                                 std::vector<Eigen::Matrix3d> diag,
                                                 std::vector<Eigen::Matrix3d> sup,
                                                 std::vector<Eigen::Vector3d> rhs) {
  size_t n = diag.size();
  if (sub.size() != n - 1 || sup.size() != n - 1 || rhs.size() != n) {
    throw domain_error("solve_block_tridiag: inconsistent sizes");
  }
  for (size_t i = 1; i < n; ++i) {
    Eigen::Matrix3d w = sub[i - 1] * diag[i - 1].partialPivLu().inverse();
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<Eigen::Vector3d> x(n);
  x[n - 1] = diag[n - 1].partialPivLu().solve(rhs[n - 1]);
  for (size_t i = n - 1; i-- > 0;) {
    x[i] = diag[i].partialPivLu().solve(rhs[i] - sup[i] * x[i + 1]);
  }
  return x;
}

double bisect(const std::function<double(double)>& f, double lo, double hi,
              double xtol, int max_iter) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (flo * fhi > 0.0) throw domain_error("bisect: endpoints do not bracket a root");
  for (int it = 0; it < max_iter && (hi - lo) > xtol; ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (fm == 0.0) return mid;
    if (flo * fm < 0.0) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace numutil
}  // namespace su12
