#pragma once

#include <functional>
#include <vector>
#include <Eigen/Dense>

#include "su12/errors.hpp"

namespace su12 {
namespace numutil {

// Shape-preserving cubic interpolant (Fritsch-Carlson slopes). Evaluation
// outside the node range continues the end cubics; callers that need a
// different tail policy handle it themselves.
class pchip {
 public:
  pchip() = default;
  static pchip fit(std::vector<double> x, std::vector<double> y);

  double value(double xq) const;
  double deriv(double xq) const;

  double x_front() const { return x_.front(); }
  double x_back() const { return x_.back(); }
  const std::vector<double>& nodes() const { return x_; }
  const std::vector<double>& values() const { return y_; }

 private:
  std::vector<double> x_, y_, d_;
  int interval(double xq) const;
};

struct linfit_result {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

linfit_result linfit(const std::vector<double>& x, const std::vector<double>& y);

// Aitken delta-squared extrapolation of three successive samples.
double aitken(double r0, double r1, double r2);

// Tridiagonal solve (Thomas), destroys inputs. diag/rhs size n, sub/sup n-1.
std::vector<double> solve_tridiag(std::vector<double> sub, std::vector<double> diag,
                                  std::vector<double> sup, std::vector<double> rhs);

// Block-tridiagonal solve with 3x3 real blocks via block LU sweep.
std::vector<Eigen::Vector3d> solve_block_tridiag(std::vector<Eigen::Matrix3d> sub,
                                                 std::vector<Eigen::Matrix3d> diag,
                                                 std::vector<Eigen::Matrix3d> sup,
                                                 std::vector<Eigen::Vector3d> rhs);

// Bisection on a bracketing interval; requires f(lo) f(hi) <= 0.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double xtol, int max_iter = 200);

}  // namespace numutil
}  // namespace su12
