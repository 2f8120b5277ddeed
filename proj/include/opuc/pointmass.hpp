#pragma once

// Point-mass (Uvarov) perturbation dnu = (1-gamma) dmu + gamma delta_omega.
// Three independent-as-implemented routes to the perturbed Verblunsky
// coefficients alpha_n(dnu):
//   * delta_n        — the coefficient-shift formula (single recursion pass),
//   * geronimus_alpha — the monic perturbed polynomial evaluated at z = 0,
//   * simon_alpha     — the norm-weighted kernel sum,
// plus a Toeplitz/Levinson moment oracle for the Lebesgue base that is
// independent of the Szegő recursion entirely.

#include <complex>
#include <cstdint>
#include <vector>

#include "opuc/coeffs.hpp"
#include "opuc/scaled.hpp"
#include "opuc/szego.hpp"

namespace opuc {

struct PointMassSpec {
  double omega = 0.0;  // angle of the mass, [0, 2pi)
  double gamma = 0.5;  // weight, open interval (0, 1)

  PointMassSpec(double omega_, double gamma_);
  cplx zeta() const { return std::polar(1.0, omega); }
  // (1 - gamma)/gamma, the constant term of the denominator Theta_n.
  double offset() const { return (1.0 - gamma) / gamma; }
};

enum class PerturbationMethod { geronimus, simon, delta_formula, moment_oracle };

struct PerturbationResult {
  std::int64_t n = 0;
  cplx alpha_nu{0.0, 0.0};  // alpha_n(dnu)
  cplx delta{0.0, 0.0};     // Delta_n(zeta) = alpha_n(dnu) - alpha_n(dmu)
  PerturbationMethod method = PerturbationMethod::delta_formula;
};

// Single forward pass producing Delta_n(zeta) for n = 0, 1, 2, ... in O(1)
// amortized work per index. Keeps the last three polynomial states so the
// Cesàro–Stolz difference quotients (plain and zeta^n-twisted) come out of
// the same pass with all exponents cancelled symbolically.
class DeltaScan {
 public:
  DeltaScan(const CoefficientSequence& seq, const PointMassSpec& spec);

  // Step to the next index; after the k-th call n() == k-1 and delta() is
  // Delta_{k-1}. Propagates AdmissibilityError from the sequence.
  void advance();

  std::int64_t n() const { return n_; }

  // Delta_n = rho_n conj(phi_{n+1}) phi*_n / ((1-gamma)/gamma + K_n);
  // numerator and denominator exponents subtracted before exponentiation.
  ScaledComplex delta() const;

  // Difference quotient [rho_n G_n - rho_{n-1} G_{n-1}] / (Theta_n - Theta_{n-1})
  // with G_n = conj(phi_{n+1}(zeta)) phi*_n(zeta); requires n >= 1. Its tail
  // average estimates lim Delta_n.
  cplx cs_quotient() const;
  // Same with the numerator terms twisted by zeta^n and zeta^{n-1}; its tail
  // estimates lim zeta^n Delta_n.
  cplx cs_quotient_twisted() const;

  double log_kernel() const;  // log K_n(zeta, zeta)

  // States at n-1, n, n+1 (valid per current n; state_nm1 needs n >= 1).
  const ScaledPolyState& state_nm1() const { return prev2_; }
  const ScaledPolyState& state_n() const { return prev1_; }
  const ScaledPolyState& state_np1() const { return cur_; }
  double rho_n() const { return rho_n_; }
  double rho_nm1() const { return rho_nm1_; }
  cplx alpha_n() const { return alpha_n_; }

 private:
  const CoefficientSequence* seq_;
  double offset_;
  double omega_;
  std::int64_t n_ = -1;
  ScaledPolyState prev2_;  // state at n-1
  ScaledPolyState prev1_;  // state at n
  ScaledPolyState cur_;    // state at n+1
  cplx alpha_n_{0.0, 0.0};
  cplx alpha_nm1_{0.0, 0.0};
  double rho_n_ = 1.0;
  double rho_nm1_ = 1.0;
};

// Delta_n(zeta) as a plain complex (underflows to 0 in deep pure-point decay;
// use DeltaScan::delta() for log-magnitude diagnostics).
cplx delta_n(const CoefficientSequence& seq, const PointMassSpec& spec, std::int64_t n);

// alpha_{n-1}(dnu) from the perturbed monic polynomial at z = 0 (n >= 1):
// alpha_{n-1}(dnu) = alpha_{n-1} + conj(phi_n(0) K_{n-1}(0, zeta)) / ((1-gamma)/gamma
// + K_{n-1}(zeta, zeta)), with phi_n(0) = -conj(alpha_{n-1}) e^{-lognorm_n}
// in closed form. All growth balanced in log scale before exponentiation.
cplx geronimus_alpha(const CoefficientSequence& seq, const PointMassSpec& spec,
                     std::int64_t n);

// alpha_n(dnu) from the norm-weighted kernel sum
//   alpha_n - q_n^{-1} gamma conj(phi_{n+1}(zeta))
//     * sum_{j=0}^{n} alpha_{j-1} (||Phi_{n+1}||/||Phi_j||) phi_j(zeta),
// q_n = (1-gamma) + gamma K_n(zeta,zeta), alpha_{-1} = -1. O(n) per call.
cplx simon_alpha(const CoefficientSequence& seq, const PointMassSpec& spec,
                 std::int64_t n);

// Base measures with exactly known moments for the Levinson oracle.
enum class OracleBase { lebesgue };

// Levinson recursion on the (n+2)x(n+2) Toeplitz moment matrix of
// dnu = (1-gamma) dtheta/2pi + gamma delta_omega, whose moments are
// m_k = integral e^{ik theta} dnu = (1-gamma)[k=0] + gamma e^{ik omega}.
// The reflection coefficients it produces ARE alpha_0(dnu)..alpha_n(dnu).
// Throws NumericalBreakdown if a reflection coefficient reaches modulus
// >= 1 - 1e-12. O(n^2) time.
std::vector<cplx> moment_oracle_alpha(OracleBase base, const PointMassSpec& spec,
                                      std::int64_t n);

// alpha_0(dnu)..alpha_{n_max}(dnu) materialized in one pass via delta_n;
// feed to CoefficientSequence::custom for sequential multi-point composition.
std::vector<cplx> perturbed_alphas(const CoefficientSequence& seq,
                                   const PointMassSpec& spec, std::int64_t n_max);

// Convenience dispatcher used by the CLI equivalence scenario.
PerturbationResult perturbation_result(const CoefficientSequence& seq,
                                       const PointMassSpec& spec, std::int64_t n,
                                       PerturbationMethod method);

}  // namespace opuc
