#pragma once

// Gap/band geometry on the unit circle, 2x2 eigensystems of transfer
// matrices, and the closed-form perturbation limits for the constant-
// background case.

#include <array>
#include <complex>
#include <vector>

#include "opuc/szego.hpp"

namespace opuc {

// Angular gap structure. An arc is an open interval (lo, hi) with
// lo in (-pi, pi] and lo < hi; membership is understood mod 2pi, so a gap
// straddling theta = 0 is reported e.g. as (-pi/3, pi/3).
struct GapGeometry {
  struct Arc {
    double lo = 0.0;
    double hi = 0.0;
  };
  std::vector<Arc> arcs;  // open arcs OUTSIDE the essential spectrum
  int band_count = 1;     // number of maximal band arcs detected (<= p)

  bool contains(double theta) const;  // true iff theta lies in some gap arc
};

// Canonical representative of theta in (-pi, pi].
double canonical_angle(double theta);

// True iff |Tr T_p(e^{i theta})| > 2 (strictly; band endpoints where
// |Tr| = 2 within 1e-12 count as inside the closed bands, hence false).
bool in_gap(cplx L, double theta);
bool in_gap(const std::vector<cplx>& beta, double theta);

// Samples |Tr T_p| - 2 on `grid` points, bisects each sign change to within
// `tol`, and returns the complement arcs. Throws ResolutionError if the grid
// is too coarse (fewer than 16p samples, or the crossing count changes when
// the grid is doubled).
GapGeometry compute_bands(const std::vector<cplx>& beta, int grid = 4096,
                          double tol = 1e-10);

struct EigenPair {
  cplx lambda1{0.0, 0.0};  // |lambda1| >= |lambda2|
  cplx lambda2{0.0, 0.0};
  std::array<cplx, 2> vec1{};  // eigenvector for lambda1
  std::array<cplx, 2> vec2{};  // eigenvector for lambda2
};

// Quadratic-formula eigenvalues ordered by modulus descending, eigenvectors
// normalized to first component 1 where possible (fallback: second component
// 1). Throws DegenerateError if |lambda1| - |lambda2| < 1e-10: in-gap points
// are hyperbolic, so degeneracy means the caller is outside the gap.
EigenPair eigen_pair(const TransferMatrix2& M);

// Limit of the coefficient shift Delta_n(zeta) for a constant background L,
// zeta = e^{i theta} strictly inside the gap:
//   Delta_inf = conj(h^{1/2}) ((zeta - 1) - h^{1/2}) / (2 conj(L)),
// with h = (zeta-1)^2 + 4 zeta |L|^2 = 4 zeta (|L|^2 - sin^2(theta/2)) and the
// branch h^{1/2} = 2 e^{i theta/2} sqrt(|L|^2 - sin^2(theta/2)) (positive real
// root), which is continuous across the gap and equals 2|L| at theta = 0.
// Throws OutOfGapError if sin^2(theta/2) >= |L|^2 (or L = 0).
cplx delta_infinity(cplx L, double theta);

// Limit of the perturbed coefficients themselves: L * e^{i omega} with
//   cos omega = (2 sin^2(theta/2) - |L|^2) / |L|^2,
//   sin omega = 2 sin(theta/2) sqrt(|L|^2 - sin^2(theta/2)) / |L|^2.
// Equals L + delta_infinity(L, theta); |result| = |L|.
cplx limit_phase(cplx L, double theta);

}  // namespace opuc
