#include "opuc/szego.hpp"

#include <cmath>
#include <string>

#include "opuc/errors.hpp"

namespace opuc {

namespace {

// Mantissa normalization window; arbitrary but fixed for reproducibility.
constexpr double kWindowLo = 0.5;
constexpr double kWindowHi = 2.0;

bool near_unit_circle(cplx z) { return std::abs(std::abs(z) - 1.0) < 1e-12; }

}  // namespace

ScaledPolyState ScaledPolyState::initial(cplx z) {
  ScaledPolyState st;
  st.z = z;
  st.on_circle = near_unit_circle(z);
  return st;
}

double ScaledPolyState::k_acc() const { return k_mant * std::exp(k_scale - 2.0 * su); }

ScaledPolyState szego_step(const ScaledPolyState& state, cplx alpha_n) {
  const double norm_a = std::norm(alpha_n);
  if (!(norm_a < 1.0)) {
    throw AdmissibilityError("szego_step: |alpha_" + std::to_string(state.n) +
                             "| >= 1");
  }
  const double rho = std::sqrt(1.0 - norm_a);

  ScaledPolyState next = state;

  // Bring both mantissas to a common working exponent (no-op on the circle,
  // where su == sv by construction).
  double w = state.su;
  cplx ut = state.u;
  cplx vt = state.v;
  if (state.su != state.sv) {
    w = std::max(state.su, state.sv);
    ut *= std::exp(state.su - w);
    vt *= std::exp(state.sv - w);
  }

  cplx u1 = (state.z * ut - std::conj(alpha_n) * vt) / rho;
  cplx v1 = (vt - alpha_n * state.z * ut) / rho;

  // K_{n+1} = K_n + |phi_{n+1}|^2, with the new term rebased onto K's scale.
  // In the growth regime 2w - k_scale stays O(1); in the decay regime the
  // factor underflows to 0, which is the correct negligible contribution.
  next.k_mant = state.k_mant + std::norm(u1) * std::exp(2.0 * w - state.k_scale);
  next.k_scale = state.k_scale;
  if (next.k_mant < kWindowLo || next.k_mant > kWindowHi) {
    next.k_scale += std::log(next.k_mant);
    next.k_mant = 1.0;
  }

  if (state.on_circle) {
    double m = std::max(std::abs(u1), std::abs(v1));
    if (m > 0.0 && (m < kWindowLo || m > kWindowHi)) {
      u1 /= m;
      v1 /= m;
      w += std::log(m);
    }
    next.su = next.sv = w;
  } else {
    double mu = std::abs(u1);
    next.su = w;
    if (mu > 0.0 && (mu < kWindowLo || mu > kWindowHi)) {
      u1 /= mu;
      next.su = w + std::log(mu);
    }
    double mv = std::abs(v1);
    next.sv = w;
    if (mv > 0.0 && (mv < kWindowLo || mv > kWindowHi)) {
      v1 /= mv;
      next.sv = w + std::log(mv);
    }
  }
  next.u = u1;
  next.v = v1;
  next.lognorm = state.lognorm + std::log(rho);
  next.n = state.n + 1;
  return next;
}

ScaledPolyState evaluate(const CoefficientSequence& seq, cplx z, std::int64_t n) {
  ScaledPolyState st = ScaledPolyState::initial(z);
  for (std::int64_t j = 0; j < n; ++j) {
    st = szego_step(st, seq.at(j));
  }
  return st;
}

ScaledComplex cd_kernel(const CoefficientSequence& seq, cplx z, cplx zeta,
                        std::int64_t n) {
  ScaledPolyState at_z = ScaledPolyState::initial(z);
  ScaledPolyState at_zeta = ScaledPolyState::initial(zeta);
  ScaledComplex acc;
  scaled_add(acc, std::conj(at_zeta.u) * at_z.u, at_zeta.su + at_z.su);
  for (std::int64_t j = 0; j < n; ++j) {
    cplx alpha = seq.at(j);
    at_z = szego_step(at_z, alpha);
    at_zeta = szego_step(at_zeta, alpha);
    scaled_add(acc, std::conj(at_zeta.u) * at_z.u, at_zeta.su + at_z.su);
  }
  return acc.normalized();
}

TransferMatrix2 TransferMatrix2::inverse() const {
  cplx dt = det();
  if (dt == cplx{0.0, 0.0}) {
    throw DegenerateError("TransferMatrix2::inverse: singular matrix");
  }
  return {d / dt, -b / dt, -c / dt, a / dt};
}

TransferMatrix2 transfer_matrix(cplx alpha, cplx z) {
  const double norm_a = std::norm(alpha);
  if (!(norm_a < 1.0)) {
    throw AdmissibilityError("transfer_matrix: |alpha| >= 1");
  }
  const double inv_rho = 1.0 / std::sqrt(1.0 - norm_a);
  return {z * inv_rho, -std::conj(alpha) * inv_rho, -z * alpha * inv_rho, inv_rho};
}

}  // namespace opuc
