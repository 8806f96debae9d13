#include "su12/hermlin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace su12 {
namespace hermlin {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Scale-relative degeneracy threshold: det(sA) = s^2 det(A), so compare
// against eps * max(1, |A|^2). Degenerate metrics are rejected, not patched.
void require_posdef(const herm2& h, const char* who) {
  double scale = std::max(1.0, matabs(h) * matabs(h));
  if (!(h.a11 > 0.0) || !(h.det() > kEps * scale)) {
    throw domain_error(std::string(who) + ": matrix is not positive definite");
  }
}

}  // namespace

herm2 herm2::from_matrix(const mat2& m) {
  herm2 r;
  r.a11 = m(0, 0).real();
  r.a22 = m(1, 1).real();
  r.a12 = 0.5 * (m(0, 1) + std::conj(m(1, 0)));
  return r;
}

mat2 herm2::matrix() const {
  mat2 m;
  m(0, 0) = a11;
  m(0, 1) = a12;
  m(1, 0) = std::conj(a12);
  m(1, 1) = a22;
  return m;
}

herm2 herm2::inverse() const {
  double d = det();
  if (d == 0.0) throw domain_error("herm2::inverse: singular matrix");
  return herm2(a22 / d, a11 / d, -a12 / d);
}

herm2 operator+(const herm2& x, const herm2& y) {
  return herm2(x.a11 + y.a11, x.a22 + y.a22, x.a12 + y.a12);
}

herm2 operator-(const herm2& x, const herm2& y) {
  return herm2(x.a11 - y.a11, x.a22 - y.a22, x.a12 - y.a12);
}

double matabs(const mat2& m) {
  double r = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r = std::max(r, std::abs(m(i, j)));
  return r;
}

double matabs(const herm2& m) { return matabs(m.matrix()); }

double matabs(const mat3& m) {
  double r = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r = std::max(r, std::abs(m(i, j)));
  return r;
}

double hnorm(const mat2& a, const herm2& h) {
  require_posdef(h, "hnorm");
  mat2 hm = h.matrix();
  mat2 hinv = h.inverse().matrix();
  cplx tr = (a * hinv * a.adjoint() * hm).trace();
  return std::sqrt(std::max(0.0, tr.real()));
}

double hnorm(const mat3& a, const mat3& h) {
  Eigen::SelfAdjointEigenSolver<mat3> es(h);
  if (es.eigenvalues().minCoeff() <= kEps * std::max(1.0, matabs(h))) {
    throw domain_error("hnorm: 3x3 metric is not positive definite");
  }
  cplx tr = (a * h.inverse() * a.adjoint() * h).trace();
  return std::sqrt(std::max(0.0, tr.real()));
}

herm2 psd_sqrt(const herm2& a) {
  require_posdef(a, "psd_sqrt");
  double sd = std::sqrt(a.det());
  double denom = std::sqrt(a.trace() + 2.0 * sd);
  return herm2((a.a11 + sd) / denom, (a.a22 + sd) / denom, a.a12 / denom);
}

eigpair eig2(const herm2& h) {
  require_posdef(h, "eig2");
  double mean = 0.5 * h.trace();
  double gap = std::hypot(0.5 * (h.a11 - h.a22), std::abs(h.a12));
  eigpair e;
  // Subtraction mean - gap cancels for ill-conditioned h; recover the small
  // eigenvalue from the determinant instead.
  e.hi = mean + gap;
  e.lo = h.det() / e.hi;
  return e;
}

double comparison_constant(const herm2& h1, const herm2& h2) {
  require_posdef(h1, "comparison_constant");
  require_posdef(h2, "comparison_constant");
  // Generalized eigenvalues of the pencil (H1, H2) are the eigenvalues of
  // H2^{-1} H1, real and positive. C = max(lam_max, 1/lam_min).
  mat2 p = h2.inverse().matrix() * h1.matrix();
  cplx tr = p.trace();
  cplx d = p.determinant();
  double m = 0.5 * tr.real();
  double disc = std::sqrt(std::max(0.0, m * m - d.real()));
  double hi = m + disc;
  double lo = d.real() / hi;
  return std::max(hi, 1.0 / lo);
}

mat2 sigma(int k) {
  mat2 m = mat2::Zero();
  const cplx i(0.0, 1.0);
  switch (k) {
    case 0:
      m(0, 0) = 2.0;
      m(1, 1) = -1.0;
      break;
    case 1:
      m(0, 1) = 1.0;
      m(1, 0) = 1.0;
      break;
    case 2:
      m(0, 1) = -i;
      m(1, 0) = i;
      break;
    case 3:
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      break;
    default:
      throw domain_error("sigma: index out of range");
  }
  return m;
}

pauli_coeffs pauli_decompose(const herm2& u) {
  pauli_coeffs c;
  c.u0 = u.trace();
  c.u3 = u.a11 - 2.0 * c.u0;
  c.u1 = u.a12.real();
  c.u2 = -u.a12.imag();
  return c;
}

herm2 pauli_compose(const pauli_coeffs& c) {
  return herm2(2.0 * c.u0 + c.u3, -c.u0 - c.u3, cplx(c.u1, -c.u2));
}

herm3 herm3::from_matrix(const mat3& a) {
  herm3 r;
  r.m = 0.5 * (a + a.adjoint());
  return r;
}

herm3 herm3::block_form(const herm2& k) {
  double d = k.det();
  if (d == 0.0) throw domain_error("herm3::block_form: singular block");
  herm3 r;
  r.m = mat3::Zero();
  r.m(0, 0) = 1.0 / d;
  r.m.block<2, 2>(1, 1) = k.matrix();
  return r;
}

}  // namespace hermlin
}  // namespace su12
