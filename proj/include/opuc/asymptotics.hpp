#pragma once

// Limit-extraction machinery: eigen-tracked (Kooman-style) solutions of the
// transfer recursion, Cesàro–Stolz quotient estimation, bounded-variation
// diagnostics, periodic block products, and the end-to-end drivers for the
// twisted and rate-of-convergence experiments.

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "opuc/coeffs.hpp"
#include "opuc/pointmass.hpp"
#include "opuc/scaled.hpp"
#include "opuc/szego.hpp"

namespace opuc {

enum class LimitMethod { tail_value, cesaro_stolz };

struct LimitReport {
  cplx estimate{0.0, 0.0};
  LimitMethod method = LimitMethod::tail_value;
  double err_indicator = 0.0;  // last-increment magnitude or tail spread
  double bv_partial = 0.0;     // sum |x_{n+1} - x_n| up to the horizon
  std::int64_t n_used = 0;
  // Kernel growth looked bounded at the horizon (mass-at-zeta regime): the
  // denominator of the quotient does not diverge and the estimate is not a
  // limit of anything — treat as "Delta_n -> 0" territory.
  bool divergence_warning = false;
  // Periodic driver only: zeta sits inside the essential-spectrum bands where
  // the residue limits are all zero; reported with zeros instead of erroring.
  bool bands_interior = false;
};

// ---------------------------------------------------------------------------
// Eigen-tracked transfer recursion.

struct KoomanTrack {
  std::int64_t n_start = 0;
  std::int64_t n = 0;
  TransferMatrix2 G;                  // eigenvector matrix at n (columns g1, g2)
  cplx lambda1{0.0, 0.0};             // eigenvalues of A_n, |lambda1| > |lambda2|
  cplx lambda2{0.0, 0.0};
  double log_p_abs = 0.0;             // log |P_n|, P_n = prod_{k>n_start}^{n} lambda_{1,k}
  double p_phase = 0.0;               // arg P_n (mod 2*pi)
  cplx f1{0.0, 0.0};                  // diagonal-frame coordinates of the solution
  cplx f2{0.0, 0.0};
  ScaledComplex w1, w2;               // initial w = D G^{-1} (phi, phi*)^T at n_start
  ScaledComplex recon_phi;            // G_n * w(n), first component  (= phi_{n+1})
  ScaledComplex recon_phi_star;       // second component             (= phi*_{n+1})

  cplx r() const;  // f2 / f1, the decaying-mode admixture
};

// First index from which 10 consecutive step matrices are hyperbolic with
// margin |Tr| > 2 + 1e-6. Throws HyperbolicityError if none exists below
// search_limit.
std::int64_t hyperbolic_start(const CoefficientSequence& seq, cplx zeta,
                              std::int64_t search_limit = 100000);

// Track the solution (phi_n, phi*_n) through per-step eigenbases from n_start
// to n inclusive. Columns are matched to the previous step by maximal overlap
// so the diagonalization stays continuous. Throws HyperbolicityError if any
// step matrix in range fails |Tr| > 2 or is numerically defective.
KoomanTrack kooman_track(const CoefficientSequence& seq, cplx zeta,
                         std::int64_t n_start, std::int64_t n);

// ---------------------------------------------------------------------------
// Limit estimation.

// Difference-quotient limit of numer[n]/denom[n]: averages
// (numer[n]-numer[n-1])/(denom[n]-denom[n-1]) over the last decade of the
// horizon; err_indicator is the spread over that window. denom must be
// strictly increasing (MonotonicityError otherwise); if its growth stalls
// (denom[H]/denom[H/2] < 1 + 1e-8) the report carries divergence_warning.
LimitReport cesaro_stolz_limit(const std::vector<cplx>& numer,
                               const std::vector<double>& denom);

// [Delta_0, ..., Delta_n_max] in one recursion pass.
std::vector<cplx> delta_sequence(const CoefficientSequence& seq,
                                 const PointMassSpec& spec, std::int64_t n_max);

// Tail-value report over an explicit sequence: estimate = last element,
// bv_partial = sum |x_{k+stride} - x_k|, err_indicator = last stride increment.
LimitReport bv_report(const std::vector<cplx>& x, int stride);

// Difference-quotient estimate of lim Delta_n(zeta) computed in mantissa
// space (the raw quotient numerators/denominators overflow doubles in a gap
// long before useful horizons; the exponents cancel symbolically here).
// bv_partial is the stride-1 partial sum of the Delta sequence itself.
LimitReport theorem1_limit(const CoefficientSequence& seq, const PointMassSpec& spec,
                           std::int64_t horizon);

// ---------------------------------------------------------------------------
// Twisted sequences (alpha_n = L conj(zeta)^n).

struct TwistedReport {
  LimitReport report;        // estimate of lim zeta^n Delta_n via quotients
  cplx direct_tail{0.0, 0.0};  // zeta^H Delta_H at the horizon
  // max over 1 <= n <= min(horizon, 100) of the relative residual of the
  // exact step identity zeta^{n-1}(rho_n phi*_{n+1} - rho_{n-1} phi*_{n-1})
  //   = -(zeta^n alpha_n + zeta^{n-1} alpha_{n-1}) phi_n.
  double identity_residual_max = 0.0;
};

// Driver for the twisted family evaluated at the twist point itself.
// spec.omega must agree with arg(zeta) (ConfigError otherwise).
TwistedReport twisted_limit_check(cplx L, cplx zeta, const PointMassSpec& spec,
                                  std::int64_t n_max);

// ---------------------------------------------------------------------------
// Rate of convergence at zeta = 1 for alpha_n = L + c_n, L negative real.

struct Corollary1Report {
  LimitReport report;  // estimate = (Delta_n(1) + 2L)/c_n at the horizon
  // (n, ratio) at n = 10, 100, ... up to the horizon, plus the horizon itself.
  std::vector<std::pair<std::int64_t, double>> decade_ratios;
  double aux_ratio = 0.0;  // K_{n-1}(1,1)/phi_n(1)^2 at the horizon
};

// spec.omega must be 0; L must be real negative; decay amplitude real.
Corollary1Report corollary1_rate(double L, const DecaySpec& decay,
                                 const PointMassSpec& spec, std::int64_t n_max);

// ---------------------------------------------------------------------------
// Periodic background.

// Ordered block product A(alpha_{(k+1)p-1}) ... A(alpha_{kp}) at zeta.
TransferMatrix2 periodic_block(const CoefficientSequence& seq, int p,
                               std::int64_t k, cplx zeta);

// Per-residue limits of Delta_{kp+j}(zeta), j = 0..p-1, for an asymptotically
// p-periodic sequence. In a spectral gap each report carries the tail
// estimate and the stride-p bv partial sum of that residue subsequence; if
// zeta lies inside the bands all estimates are zero with bands_interior set
// and err_indicator holding the tail magnitude max |Delta| (which should be
// small there).
std::vector<LimitReport> periodic_residue_limits(const CoefficientSequence& seq,
                                                 int p, const PointMassSpec& spec,
                                                 std::int64_t k_max);

// ---------------------------------------------------------------------------
// Least squares and the high-precision two-stage probe.

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LineFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys);

struct PurePointProbe {
  std::vector<double> log_abs_delta;  // log |Delta_n| of the second stage
  LineFit tail_fit;                   // fit of log|Delta_n| over [fit_lo, fit_hi]
  double kernel_growth_ratio = 0.0;   // K(n_max)/K(n_max/2) in the second stage
  bool kernel_bounded = false;        // ratio < 1 + 1e-8 (mass detected)
  int precision_bits = 0;             // working precision chosen for the run
};

// Add a mass at `first`, materialize the perturbed coefficients, then perturb
// again at `second` and record the second-stage Delta magnitudes. The decay
// of Delta_n below a mass point outruns double precision almost immediately,
// so both stages run in multiprecision floats sized from the transfer-matrix
// growth bound (1+|alpha|)/rho; not thread-safe against concurrent probes
// (the big-float working precision is process-global).
PurePointProbe pure_point_probe(const CoefficientSequence& base,
                                const PointMassSpec& first,
                                const PointMassSpec& second, std::int64_t n_max,
                                std::int64_t fit_lo, std::int64_t fit_hi);

}  // namespace opuc
