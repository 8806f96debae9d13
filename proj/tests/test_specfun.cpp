#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "su12/numutil.hpp"
#include "su12/specfun.hpp"

using namespace su12::specfun;

namespace {

// log-spaced probe points covering series, switchover and asymptotic branches
std::vector<double> probe_points(double lo, double hi, int n) {
  std::vector<double> xs;
  double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i <= n; ++i) xs.push_back(std::exp(llo + (lhi - llo) * i / n));
  return xs;
}

void check_against(double (*mine)(double), double nu, bool modified_second,
                   double lo, double hi) {
  for (double x : probe_points(lo, hi, 400)) {
    double ref;
    if (modified_second) {
      ref = std::cyl_bessel_k(nu, x);
    } else if (nu < 0.0) {
      ref = std::cyl_neumann(-nu - 1.0, x);
    } else if (nu < 2.0) {
      ref = std::cyl_bessel_j(nu, x);
    } else {
      ref = std::cyl_bessel_i(nu - 2.0, x);
    }
    double got = mine(x);
    double tol = 1e-10 * std::max(1.0, std::fabs(ref));
    CHECK(std::fabs(got - ref) <= tol);
  }
}

}  // namespace

TEST_CASE("J0 J1 against reference") {
  check_against(&bessel_j0, 0.0, false, 1e-4, 300.0);
  check_against(&bessel_j1, 1.0, false, 1e-4, 300.0);
}

TEST_CASE("Y0 Y1 against reference") {
  // encode nu = -1 -> neumann order 0, nu = -2 -> neumann order 1
  check_against(&bessel_y0, -1.0, false, 1e-4, 300.0);
  check_against(&bessel_y1, -2.0, false, 1e-4, 300.0);
}

TEST_CASE("I0 I1 against reference") {
  check_against(&bessel_i0, 2.0, false, 1e-4, 80.0);
  check_against(&bessel_i1, 3.0, false, 1e-4, 80.0);
}

TEST_CASE("K0 K1 against reference") {
  check_against(&bessel_k0, 0.0, true, 1e-4, 80.0);
  check_against(&bessel_k1, 1.0, true, 1e-4, 80.0);
}

TEST_CASE("cylinder Wronskian") {
  for (double x : probe_points(1e-2, 200.0, 300)) {
    double w = bessel_j1(x) * bessel_y0(x) - bessel_j0(x) * bessel_y1(x);
    double want = 2.0 / (M_PI * x);
    CHECK(std::fabs(w - want) <= 1e-10 * std::fabs(want) + 1e-14);
  }
}

TEST_CASE("modified Wronskian") {
  for (double x : probe_points(1e-2, 60.0, 300)) {
    double w = bessel_i0(x) * bessel_k1(x) + bessel_i1(x) * bessel_k0(x);
    double want = 1.0 / x;
    CHECK(std::fabs(w - want) <= 1e-10 * std::fabs(want));
  }
}

TEST_CASE("scaled variants") {
  for (double x : probe_points(1e-2, 30.0, 100)) {
    CHECK(bessel_i0_scaled(x) == doctest::Approx(std::exp(-x) * bessel_i0(x)).epsilon(1e-12));
    CHECK(bessel_k0_scaled(x) == doctest::Approx(std::exp(x) * bessel_k0(x)).epsilon(1e-12));
  }
  // no overflow or underflow far out on the axis
  double big = 700.0;
  CHECK(bessel_i0_scaled(big) > 0.0);
  CHECK(bessel_i0_scaled(big) < 1.0);
  CHECK(bessel_k0_scaled(big) > 0.0);
  CHECK(bessel_k1_scaled(big) > bessel_k0_scaled(big));
}

TEST_CASE("first zero of J0") {
  double z = su12::numutil::bisect([](double x) { return bessel_j0(x); }, 2.0, 3.0, 1e-14);
  CHECK(std::fabs(z - 2.404825557695773) <= 1e-12);
}
