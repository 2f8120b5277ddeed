#pragma once

// Overflow-safe evaluation of the orthonormal polynomials phi_n(z), phi*_n(z),
// the diagonal CD kernel K_n(z,z), monic norms ||Phi_n||, and the 2x2 transfer
// matrices of the recursion. All exponential growth lives in explicit log
// scales; mantissas are kept in a fixed window so no quantity overflows for
// any run length.

#include <complex>
#include <cstdint>

#include "opuc/coeffs.hpp"
#include "opuc/scaled.hpp"

namespace opuc {

// State of the coupled recursion
//   phi_{n+1}  = rho_n^{-1} (z phi_n - conj(alpha_n) phi*_n)
//   phi*_{n+1} = rho_n^{-1} (phi*_n - alpha_n z phi_n)
// with phi_0 = phi*_0 = 1 and rho_n = (1 - |alpha_n|^2)^{1/2}.
//
// phi_n = u * e^{su}, phi*_n = v * e^{sv}. On the unit circle |phi_n| =
// |phi*_n|, so a single rescale factor keeps su == sv exactly; off the circle
// the two exponents evolve independently.
//
// K_n(z,z) = sum_{j<=n} |phi_j(z)|^2 carries its own scale (k_mant * e^{k_scale})
// because it stays bounded in the pure-point regime while |phi_n| decays; tying
// it to e^{2su} would overflow there even though both values are tame.
struct ScaledPolyState {
  cplx u{1.0, 0.0};   // mantissa of phi_n(z)
  cplx v{1.0, 0.0};   // mantissa of phi*_n(z)
  double su = 0.0;    // phi_n  = u * e^su
  double sv = 0.0;    // phi*_n = v * e^sv; sv == su whenever |z| = 1
  std::int64_t n = 0;
  cplx z{1.0, 0.0};
  bool on_circle = true;
  double k_mant = 1.0;   // K_n(z,z) = k_mant * e^{k_scale}; K_0 = |phi_0|^2 = 1
  double k_scale = 0.0;
  double lognorm = 0.0;  // log ||Phi_n|| = sum_{j<n} log rho_j

  static ScaledPolyState initial(cplx z);

  // Shared exponent on the unit circle (su == sv there).
  double s() const { return su; }
  // K_n(z,z) mantissa in the e^{2s} scale; may overflow off the growth regime,
  // which is exactly why storage is decoupled. Prefer kernel_diag().
  double k_acc() const;

  ScaledComplex phi() const { return {u, su}; }
  ScaledComplex phi_star() const { return {v, sv}; }
  ScaledComplex kernel_diag() const { return {cplx{k_mant, 0.0}, k_scale}; }
  double log_abs_phi() const { return ScaledComplex{u, su}.log_abs(); }
};

// One recursion step; rescales mantissas into the window max(|u|,|v|) in
// [1/2, 2] and accumulates K and lognorm. Throws AdmissibilityError if
// |alpha_n| >= 1.
ScaledPolyState szego_step(const ScaledPolyState& state, cplx alpha_n);

// State after n steps from phi_0 = phi*_0 = 1.
ScaledPolyState evaluate(const CoefficientSequence& seq, cplx z, std::int64_t n);

// K_n(z, zeta) = sum_{j=0}^{n} conj(phi_j(zeta)) phi_j(z), accumulated in the
// scale of its largest term.
ScaledComplex cd_kernel(const CoefficientSequence& seq, cplx z, cplx zeta,
                        std::int64_t n);

// Row-major 2x2 complex matrix; the recursion step is
// (phi_{n+1}, phi*_{n+1})^T = A(alpha_n, z) (phi_n, phi*_n)^T.
struct TransferMatrix2 {
  cplx a{1.0, 0.0}, b{0.0, 0.0}, c{0.0, 0.0}, d{1.0, 0.0};

  cplx det() const { return a * d - b * c; }
  cplx trace() const { return a + d; }
  TransferMatrix2 inverse() const;  // throws DegenerateError if det == 0

  friend TransferMatrix2 operator*(const TransferMatrix2& lhs, const TransferMatrix2& rhs) {
    return {lhs.a * rhs.a + lhs.b * rhs.c, lhs.a * rhs.b + lhs.b * rhs.d,
            lhs.c * rhs.a + lhs.d * rhs.c, lhs.c * rhs.b + lhs.d * rhs.d};
  }
  // Matrix-vector product on (x, y)^T.
  void apply(cplx& x, cplx& y) const {
    cplx x2 = a * x + b * y;
    cplx y2 = c * x + d * y;
    x = x2;
    y = y2;
  }
};

// A(alpha, z) = rho^{-1} [[z, -conj(alpha)], [-z alpha, 1]]; det = z.
TransferMatrix2 transfer_matrix(cplx alpha, cplx z);

}  // namespace opuc
