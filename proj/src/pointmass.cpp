#include "opuc/pointmass.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "opuc/errors.hpp"

namespace opuc {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// e^{i n theta} without accumulating the argument past 2*pi.
cplx unit_power(double theta, std::int64_t n) {
  return std::polar(1.0, std::fmod(static_cast<double>(n) * theta, kTwoPi));
}

}  // namespace

PointMassSpec::PointMassSpec(double omega_, double gamma_) : omega(omega_), gamma(gamma_) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw AdmissibilityError("point mass weight gamma must lie in (0, 1)");
  }
  if (!std::isfinite(omega)) {
    throw AdmissibilityError("point mass angle must be finite");
  }
  omega = std::fmod(omega, kTwoPi);
  if (omega < 0.0) omega += kTwoPi;
}

DeltaScan::DeltaScan(const CoefficientSequence& seq, const PointMassSpec& spec)
    : seq_(&seq), offset_(spec.offset()), omega_(spec.omega) {
  prev1_ = ScaledPolyState::initial(spec.zeta());
  cur_ = prev1_;
}

void DeltaScan::advance() {
  if (n_ < 0) {
    alpha_n_ = (*seq_)(0);
    rho_n_ = seq_->rho(0);
    cur_ = szego_step(prev1_, alpha_n_);
    n_ = 0;
    return;
  }
  prev2_ = prev1_;
  prev1_ = cur_;
  alpha_nm1_ = alpha_n_;
  rho_nm1_ = rho_n_;
  alpha_n_ = (*seq_)(n_ + 1);
  rho_n_ = seq_->rho(n_ + 1);
  cur_ = szego_step(prev1_, alpha_n_);
  ++n_;
}

ScaledComplex DeltaScan::delta() const {
  if (n_ < 0) throw std::logic_error("DeltaScan::delta before first advance");
  // Numerator rho_n conj(phi_{n+1}) phi*_n; denominator offset + K_n with the
  // kernel's own exponent. K_n >= 1 keeps k_scale bounded below, so the
  // rebased offset term cannot overflow.
  const cplx num_mant = rho_n_ * std::conj(cur_.u) * prev1_.v;
  const double num_scale = cur_.su + prev1_.sv;
  const double den_mant = prev1_.k_mant + offset_ * std::exp(-prev1_.k_scale);
  const double den_scale = prev1_.k_scale;
  ScaledComplex out{num_mant / den_mant, num_scale - den_scale};
  return out.normalized();
}

cplx DeltaScan::cs_quotient() const {
  if (n_ < 1) throw std::logic_error("DeltaScan::cs_quotient needs n >= 1");
  const double sref = 2.0 * prev1_.su;
  const cplx t_new = rho_n_ * std::conj(cur_.u) * prev1_.v *
                     std::exp(cur_.su + prev1_.sv - sref);
  const cplx t_old = rho_nm1_ * std::conj(prev1_.u) * prev2_.v *
                     std::exp(prev1_.su + prev2_.sv - sref);
  return (t_new - t_old) / std::norm(prev1_.u);
}

cplx DeltaScan::cs_quotient_twisted() const {
  if (n_ < 1) throw std::logic_error("DeltaScan::cs_quotient_twisted needs n >= 1");
  const double sref = 2.0 * prev1_.su;
  const cplx t_new = unit_power(omega_, n_) * rho_n_ * std::conj(cur_.u) * prev1_.v *
                     std::exp(cur_.su + prev1_.sv - sref);
  const cplx t_old = unit_power(omega_, n_ - 1) * rho_nm1_ * std::conj(prev1_.u) *
                     prev2_.v * std::exp(prev1_.su + prev2_.sv - sref);
  return (t_new - t_old) / std::norm(prev1_.u);
}

double DeltaScan::log_kernel() const {
  if (n_ < 0) throw std::logic_error("DeltaScan::log_kernel before first advance");
  return std::log(prev1_.k_mant) + prev1_.k_scale;
}

cplx delta_n(const CoefficientSequence& seq, const PointMassSpec& spec, std::int64_t n) {
  if (n < 0) throw std::out_of_range("delta_n: n must be >= 0");
  DeltaScan scan(seq, spec);
  while (scan.n() < n) scan.advance();
  return scan.delta().value();
}

cplx geronimus_alpha(const CoefficientSequence& seq, const PointMassSpec& spec,
                     std::int64_t n) {
  if (n < 1) throw std::out_of_range("geronimus_alpha: n must be >= 1");
  const cplx zeta = spec.zeta();
  ScaledPolyState st = ScaledPolyState::initial(zeta);

  // S = K_{n-1}(0, zeta) = sum_{j<n} conj(phi_j(zeta)) phi_j(0) with
  // phi_j(0) = -conj(alpha_{j-1}) e^{-lognorm_j} and phi_0(0) = 1.
  ScaledComplex S;
  scaled_add(S, std::conj(st.u), st.su - st.lognorm);
  for (std::int64_t j = 1; j < n; ++j) {
    const cplx a = seq(j - 1);
    st = szego_step(st, a);
    scaled_add(S, std::conj(st.u) * (-std::conj(a)), st.su - st.lognorm);
  }

  // st now holds index n-1: record K_{n-1}(zeta,zeta) before the last step.
  const double k_mant = st.k_mant;
  const double k_scale = st.k_scale;
  const cplx alpha_last = seq(n - 1);
  st = szego_step(st, alpha_last);  // index n: phi_n(zeta), lognorm_n

  // Monic value at the mass point: Phi_n(zeta) = phi_n(zeta) e^{lognorm_n}.
  const cplx num_mant = st.u * S.mantissa;
  const double num_scale = st.su + st.lognorm + S.logscale;
  const double den_mant = k_mant + spec.offset() * std::exp(-k_scale);
  const cplx correction =
      std::conj(scaled_ratio(num_mant, num_scale, cplx(den_mant, 0.0), k_scale));
  return alpha_last + correction;
}

cplx simon_alpha(const CoefficientSequence& seq, const PointMassSpec& spec,
                 std::int64_t n) {
  if (n < 0) throw std::out_of_range("simon_alpha: n must be >= 0");
  const cplx zeta = spec.zeta();
  ScaledPolyState st = ScaledPolyState::initial(zeta);

  // T = sum_{j=0}^{n} alpha_{j-1} e^{-lognorm_j} phi_j(zeta), alpha_{-1} = -1.
  ScaledComplex T;
  scaled_add(T, -st.u, st.su - st.lognorm);
  for (std::int64_t j = 1; j <= n; ++j) {
    const cplx a_prev = seq(j - 1);
    st = szego_step(st, a_prev);
    scaled_add(T, a_prev * st.u, st.su - st.lognorm);
  }

  const double k_mant = st.k_mant;  // K_n(zeta, zeta)
  const double k_scale = st.k_scale;
  const cplx alpha_n = seq(n);
  st = szego_step(st, alpha_n);  // index n+1

  const cplx num_mant = std::conj(st.u) * T.mantissa;
  const double num_scale = st.su + st.lognorm + T.logscale;
  const double den_mant = k_mant + spec.offset() * std::exp(-k_scale);
  const cplx correction =
      scaled_ratio(num_mant, num_scale, cplx(den_mant, 0.0), k_scale);
  return alpha_n - correction;
}

std::vector<cplx> moment_oracle_alpha(OracleBase base, const PointMassSpec& spec,
                                      std::int64_t n) {
  if (base != OracleBase::lebesgue) {
    throw ConfigError("moment oracle: unsupported base measure");
  }
  if (n < 0) throw std::out_of_range("moment_oracle_alpha: n must be >= 0");

  // Trigonometric moments m_k = (1-gamma)[k=0] + gamma e^{ik omega}, k = 0..n+1.
  std::vector<cplx> m(static_cast<std::size_t>(n) + 2);
  for (std::size_t k = 0; k < m.size(); ++k) {
    m[k] = spec.gamma * unit_power(spec.omega, static_cast<std::int64_t>(k));
  }
  m[0] += 1.0 - spec.gamma;

  // Levinson: carry the coefficients of the monic Phi_k (ascending powers).
  std::vector<cplx> c{cplx(1.0, 0.0)};
  std::vector<cplx> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  for (std::int64_t k = 0; k <= n; ++k) {
    const auto deg = static_cast<std::size_t>(k);
    // <1, z Phi_k> and <1, Phi_k^*> against the moment functional; the monic
    // orthogonality <1, Phi_{k+1}> = 0 fixes the reflection coefficient.
    cplx inner{0.0, 0.0};
    cplx norm2{0.0, 0.0};
    for (std::size_t i = 0; i <= deg; ++i) {
      inner += c[i] * m[i + 1];
      norm2 += std::conj(c[deg - i]) * m[i];
    }
    const cplx alpha = std::conj(inner / norm2);
    if (std::abs(alpha) >= 1.0 - 1e-12) {
      throw NumericalBreakdown(
          "moment oracle: reflection coefficient reached the unit circle at index " +
          std::to_string(k));
    }
    out.push_back(alpha);
    // Phi_{k+1} = z Phi_k - conj(alpha) Phi_k^*, with (Phi_k^*)_i = conj(c_{deg-i}).
    std::vector<cplx> next(deg + 2, cplx(0.0, 0.0));
    for (std::size_t i = 0; i <= deg; ++i) {
      next[i + 1] += c[i];
      next[i] -= std::conj(alpha) * std::conj(c[deg - i]);
    }
    c = std::move(next);
  }
  return out;
}

std::vector<cplx> perturbed_alphas(const CoefficientSequence& seq,
                                   const PointMassSpec& spec, std::int64_t n_max) {
  if (n_max < 0) throw std::out_of_range("perturbed_alphas: n_max must be >= 0");
  std::vector<cplx> out;
  out.reserve(static_cast<std::size_t>(n_max) + 1);
  DeltaScan scan(seq, spec);
  for (std::int64_t k = 0; k <= n_max; ++k) {
    scan.advance();
    out.push_back(scan.alpha_n() + scan.delta().value());
  }
  return out;
}

PerturbationResult perturbation_result(const CoefficientSequence& seq,
                                       const PointMassSpec& spec, std::int64_t n,
                                       PerturbationMethod method) {
  PerturbationResult res;
  res.n = n;
  res.method = method;
  const cplx base_alpha = seq(n);
  switch (method) {
    case PerturbationMethod::delta_formula:
      res.delta = delta_n(seq, spec, n);
      res.alpha_nu = base_alpha + res.delta;
      break;
    case PerturbationMethod::geronimus:
      res.alpha_nu = geronimus_alpha(seq, spec, n + 1);
      res.delta = res.alpha_nu - base_alpha;
      break;
    case PerturbationMethod::simon:
      res.alpha_nu = simon_alpha(seq, spec, n);
      res.delta = res.alpha_nu - base_alpha;
      break;
    case PerturbationMethod::moment_oracle: {
      if (seq.kind() != CoefficientSequence::Kind::constant ||
          std::abs(seq.base()) != 0.0) {
        throw ConfigError("moment oracle requires the zero base sequence");
      }
      const auto alphas = moment_oracle_alpha(OracleBase::lebesgue, spec, n);
      res.alpha_nu = alphas.back();
      res.delta = res.alpha_nu - base_alpha;
      break;
    }
  }
  return res;
}

}  // namespace opuc
