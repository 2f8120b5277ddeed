#include "opuc/coeffs.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace opuc {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_in_disk(cplx value, const char* what) {
  if (!(std::abs(value) < 1.0)) {
    throw AdmissibilityError(std::string(what) + " has modulus >= 1");
  }
}

// e^{i n theta} evaluated through a range-reduced angle; avoids the phase
// drift of repeated multiplication when n is large.
cplx unit_power(double theta, std::int64_t n) {
  double angle = std::fmod(static_cast<double>(n) * theta, 2.0 * kPi);
  return std::polar(1.0, angle);
}

}  // namespace

DecaySpec DecaySpec::geometric(double ratio, cplx amplitude) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw AdmissibilityError("geometric decay ratio must lie in (0,1)");
  }
  return DecaySpec{Form::geometric, ratio, amplitude};
}

DecaySpec DecaySpec::power_law(double exponent, cplx amplitude) {
  if (!(exponent > 0.0)) {
    throw AdmissibilityError("power-law decay exponent must be positive");
  }
  return DecaySpec{Form::power_law, exponent, amplitude};
}

DecaySpec DecaySpec::harmonic(cplx amplitude) {
  return DecaySpec{Form::harmonic, 0.0, amplitude};
}

cplx DecaySpec::at(std::int64_t n) const {
  switch (form) {
    case Form::geometric:
      return amplitude * std::pow(rate, static_cast<double>(n));
    case Form::power_law:
      if (n == 0) return {0.0, 0.0};
      return amplitude * std::pow(static_cast<double>(n), -rate);
    case Form::harmonic:
      if (n == 0) return {0.0, 0.0};
      return amplitude / static_cast<double>(n);
  }
  return {0.0, 0.0};
}

CoefficientSequence CoefficientSequence::constant(cplx L) {
  require_in_disk(L, "constant coefficient L");
  CoefficientSequence s;
  s.kind_ = Kind::constant;
  s.base_ = L;
  return s;
}

CoefficientSequence CoefficientSequence::constant_plus_decay(cplx L, DecaySpec decay) {
  require_in_disk(L, "constant coefficient L");
  CoefficientSequence s;
  s.kind_ = Kind::constant_plus_decay;
  s.base_ = L;
  s.decay_ = decay;
  s.has_decay_ = true;
  s.is_bv_ = decay.is_bv();
  return s;
}

CoefficientSequence CoefficientSequence::periodic(std::vector<cplx> beta) {
  if (beta.empty()) throw AdmissibilityError("periodic sequence needs p >= 1 values");
  for (const cplx& b : beta) require_in_disk(b, "periodic coefficient beta_j");
  CoefficientSequence s;
  s.kind_ = Kind::periodic;
  s.beta_ = std::move(beta);
  s.period_ = static_cast<int>(s.beta_.size());
  return s;
}

CoefficientSequence CoefficientSequence::periodic_plus_decay(std::vector<cplx> beta,
                                                             DecaySpec decay) {
  CoefficientSequence s = periodic(std::move(beta));
  s.kind_ = Kind::periodic_plus_decay;
  s.decay_ = decay;
  s.has_decay_ = true;
  s.is_bv_ = decay.is_bv();
  return s;
}

CoefficientSequence CoefficientSequence::twisted(cplx L, cplx zeta) {
  require_in_disk(L, "twisted coefficient L");
  if (std::abs(std::abs(zeta) - 1.0) > 1e-12) {
    throw AdmissibilityError("twist zeta must lie on the unit circle");
  }
  CoefficientSequence s;
  s.kind_ = Kind::twisted;
  s.base_ = L;
  s.zeta_ = zeta / std::abs(zeta);
  s.twist_angle_ = std::arg(s.zeta_);
  // |alpha_{n+1} - alpha_n| = |L||zeta - 1| is a nonzero constant unless
  // zeta = 1, so the twisted kind is not BV (stride 1) in general.
  s.is_bv_ = (s.zeta_ == cplx{1.0, 0.0}) || L == cplx{0.0, 0.0};
  return s;
}

CoefficientSequence CoefficientSequence::custom(std::vector<cplx> table) {
  CoefficientSequence s;
  s.kind_ = Kind::custom;
  s.table_ = std::move(table);
  s.is_bv_ = false;  // unknown; classified conservatively
  return s;
}

cplx CoefficientSequence::at(std::int64_t n) const {
  if (n < 0) throw std::out_of_range("coefficient index must be >= 0");
  cplx value;
  switch (kind_) {
    case Kind::constant:
      value = base_;
      break;
    case Kind::constant_plus_decay:
      value = base_ + decay_.at(n);
      break;
    case Kind::periodic:
      value = beta_[static_cast<std::size_t>(n % period_)];
      break;
    case Kind::periodic_plus_decay:
      value = beta_[static_cast<std::size_t>(n % period_)] + decay_.at(n);
      break;
    case Kind::twisted:
      // L * conj(zeta)^n
      value = base_ * unit_power(-twist_angle_, n);
      break;
    case Kind::custom:
      if (n >= table_size()) {
        throw std::out_of_range("custom coefficient table exhausted at n = " +
                                std::to_string(n));
      }
      value = table_[static_cast<std::size_t>(n)];
      break;
  }
  if (!(std::abs(value) < 1.0)) {
    throw AdmissibilityError("alpha_" + std::to_string(n) + " has modulus >= 1");
  }
  return value;
}

double CoefficientSequence::rho(std::int64_t n) const {
  cplx a = at(n);
  return std::sqrt(1.0 - std::norm(a));
}

CoefficientSequence make_sequence(const SequenceSpec& spec) {
  using Kind = CoefficientSequence::Kind;
  switch (spec.kind) {
    case Kind::constant:
      return CoefficientSequence::constant(spec.base);
    case Kind::constant_plus_decay:
      if (!spec.decay) throw ConfigError("constant_plus_decay needs a decay spec");
      return CoefficientSequence::constant_plus_decay(spec.base, *spec.decay);
    case Kind::periodic:
      return CoefficientSequence::periodic(spec.betas);
    case Kind::periodic_plus_decay:
      if (!spec.decay) throw ConfigError("periodic_plus_decay needs a decay spec");
      return CoefficientSequence::periodic_plus_decay(spec.betas, *spec.decay);
    case Kind::twisted:
      return CoefficientSequence::twisted(spec.base, spec.twist);
    case Kind::custom:
      return CoefficientSequence::custom(spec.table);
  }
  throw ConfigError("unknown sequence kind");
}

double bv_partial_sum(const CoefficientSequence& seq, int stride, std::int64_t n_max) {
  if (stride < 1) throw std::invalid_argument("bv stride must be >= 1");
  double sum = 0.0;
  for (std::int64_t n = 0; n <= n_max; ++n) {
    sum += std::abs(seq.at(n + stride) - seq.at(n));
  }
  return sum;
}

double bv_partial_sum(const std::vector<cplx>& x, int stride) {
  if (stride < 1) throw std::invalid_argument("bv stride must be >= 1");
  const std::size_t p = static_cast<std::size_t>(stride);
  double sum = 0.0;
  for (std::size_t n = 0; n + p < x.size(); ++n) {
    sum += std::abs(x[n + p] - x[n]);
  }
  return sum;
}

}  // namespace opuc
