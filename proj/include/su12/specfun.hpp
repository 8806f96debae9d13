#pragma once

namespace su12 {
namespace specfun {

// Cylinder functions of order 0 and 1, power series for small argument and
// Hankel-type asymptotic expansions for large argument. Accuracy target
// 1e-10 relative (absolute near zeros) over the positive axis.

double bessel_j0(double x);
double bessel_j1(double x);
double bessel_y0(double x);  // x > 0
double bessel_y1(double x);  // x > 0

double bessel_i0(double x);
double bessel_i1(double x);
double bessel_k0(double x);  // x > 0
double bessel_k1(double x);  // x > 0

// Exponentially scaled variants: i*_scaled = e^{-|x|} I*, k*_scaled = e^{x} K*.
double bessel_i0_scaled(double x);
double bessel_i1_scaled(double x);
double bessel_k0_scaled(double x);
double bessel_k1_scaled(double x);

}  // namespace specfun
}  // namespace su12
