#pragma once

#include <complex>
#include <Eigen/Dense>

#include "su12/errors.hpp"

namespace su12 {
namespace hermlin {

using cplx = std::complex<double>;
using mat2 = Eigen::Matrix2cd;
using mat3 = Eigen::Matrix3cd;

// 2x2 Hermitian matrix, stored as two real diagonal entries plus the upper
// off-diagonal entry. a21 is always conj(a12).
struct herm2 {
  double a11 = 0.0;
  double a22 = 0.0;
  cplx a12 = 0.0;

  herm2() = default;
  herm2(double d11, double d22, cplx off) : a11(d11), a22(d22), a12(off) {}

  static herm2 identity() { return herm2(1.0, 1.0, 0.0); }
  static herm2 diag(double d11, double d22) { return herm2(d11, d22, 0.0); }

  // Hermitizes the input: (M + M*)/2.
  static herm2 from_matrix(const mat2& m);

  double trace() const { return a11 + a22; }
  double det() const { return a11 * a22 - std::norm(a12); }
  bool is_posdef() const { return a11 > 0.0 && det() > 0.0; }

  mat2 matrix() const;
  herm2 inverse() const;
  herm2 scaled(double s) const { return herm2(s * a11, s * a22, s * a12); }
};

herm2 operator+(const herm2& x, const herm2& y);
herm2 operator-(const herm2& x, const herm2& y);

// Max entry modulus.
double matabs(const mat2& m);
double matabs(const herm2& m);
double matabs(const mat3& m);

// Frobenius norm weighted by a positive metric: sqrt(tr(A H^{-1} A* H)).
double hnorm(const mat2& a, const herm2& h);
double hnorm(const mat3& a, const mat3& h);

// Principal square root of a positive definite 2x2 Hermitian matrix,
// B = (A + sqrt(det A) I) / sqrt(tr A + 2 sqrt(det A)).
herm2 psd_sqrt(const herm2& a);

// Eigenvalues of a posdef herm2, ascending.
struct eigpair {
  double lo = 0.0;
  double hi = 0.0;
};
eigpair eig2(const herm2& h);

// Smallest C >= 1 with H1 <= C H2 and H2 <= C H1 in the quadratic-form order.
double comparison_constant(const herm2& h1, const herm2& h2);

// Coefficients of u = u0 s0 + u1 s1 + u2 s2 + u3 s3 in the basis below.
struct pauli_coeffs {
  double u0 = 0.0, u1 = 0.0, u2 = 0.0, u3 = 0.0;
};

// s0 = [[2,0],[0,-1]], s1 = [[0,1],[1,0]], s2 = [[0,-i],[i,0]], s3 = [[1,0],[0,-1]].
// s1..s3 span the traceless Hermitian matrices; tr u = u0.
mat2 sigma(int k);
pauli_coeffs pauli_decompose(const herm2& u);
herm2 pauli_compose(const pauli_coeffs& c);

// 3x3 Hermitian wrapper; only what the block form diag(det K^{-1}, K) needs.
struct herm3 {
  mat3 m = mat3::Zero();

  static herm3 from_matrix(const mat3& a);
  static herm3 block_form(const herm2& k);

  double det() const { return m.determinant().real(); }
};

}  // namespace hermlin
}  // namespace su12
