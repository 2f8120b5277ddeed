#pragma once

// Verblunsky coefficient sequences: the families of alpha_n used by every
// driver in the library. Sequences are pure functions of n (no streaming
// state) so runs are reproducible and safely shared across threads.

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "opuc/errors.hpp"

namespace opuc {

using cplx = std::complex<double>;

// Additive decay term c_n attached to a constant or periodic background.
struct DecaySpec {
  enum class Form { geometric, power_law, harmonic };

  Form form = Form::geometric;
  double rate = 0.5;        // geometric ratio r in (0,1), or power-law exponent q > 0
  cplx amplitude{1.0, 0.0};

  static DecaySpec geometric(double ratio, cplx amplitude = {1.0, 0.0});
  static DecaySpec power_law(double exponent, cplx amplitude = {1.0, 0.0});
  static DecaySpec harmonic(cplx amplitude = {1.0, 0.0});

  // c_n. The power-law and harmonic forms define c_0 = 0 (the n = 0 value is
  // immaterial for asymptotics and 1/0 must not appear).
  cplx at(std::int64_t n) const;

  // True iff sum |c_{n+1} - c_n| < inf. All three supported forms qualify
  // (geometric ratio < 1; power-law and harmonic are monotone -> 0).
  bool is_bv() const { return true; }
};

class CoefficientSequence {
 public:
  enum class Kind {
    constant,
    constant_plus_decay,
    periodic,
    periodic_plus_decay,
    twisted,
    custom,
  };

  static CoefficientSequence constant(cplx L);
  static CoefficientSequence constant_plus_decay(cplx L, DecaySpec decay);
  static CoefficientSequence periodic(std::vector<cplx> beta);
  static CoefficientSequence periodic_plus_decay(std::vector<cplx> beta, DecaySpec decay);
  // alpha_n = L * conj(zeta)^n with |zeta| = 1, so that zeta^n * alpha_n = L exactly.
  static CoefficientSequence twisted(cplx L, cplx zeta);
  // Finite table; evaluation beyond the stored length throws std::out_of_range
  // rather than extrapolating (silent extrapolation would corrupt diagnostics).
  static CoefficientSequence custom(std::vector<cplx> table);

  // alpha_n; throws AdmissibilityError if the parameters force |alpha_n| >= 1.
  cplx at(std::int64_t n) const;
  cplx operator()(std::int64_t n) const { return at(n); }

  // rho_n = sqrt(1 - |alpha_n|^2), the Szegő normalization factor.
  double rho(std::int64_t n) const;

  Kind kind() const { return kind_; }
  // Natural comparison stride: the period p for periodic kinds, else 1.
  int period() const { return period_; }
  // Bounded-variation classification at the natural stride.
  bool is_bv() const { return is_bv_; }

  // Background parameters (meaningful per kind; see factories).
  cplx base() const { return base_; }                      // L for constant/decay/twisted kinds
  const std::vector<cplx>& betas() const { return beta_; } // periodic background
  cplx twist() const { return zeta_; }                     // zeta for the twisted kind
  const std::vector<cplx>& table() const { return table_; }
  std::int64_t table_size() const { return static_cast<std::int64_t>(table_.size()); }

 private:
  CoefficientSequence() = default;

  Kind kind_ = Kind::constant;
  cplx base_{0.0, 0.0};
  std::vector<cplx> beta_;
  DecaySpec decay_;
  bool has_decay_ = false;
  cplx zeta_{1.0, 0.0};
  double twist_angle_ = 0.0;  // arg(zeta), cached for stable conj(zeta)^n
  std::vector<cplx> table_;
  int period_ = 1;
  bool is_bv_ = true;
};

// Plain-data descriptor for a coefficient sequence; fields are read per kind
// (base for constant/decay/twisted, betas for periodic kinds, twist for
// twisted, table for custom). This is the form the CLI config deserializes to.
struct SequenceSpec {
  CoefficientSequence::Kind kind = CoefficientSequence::Kind::constant;
  cplx base{0.0, 0.0};
  std::vector<cplx> betas;
  std::optional<DecaySpec> decay;
  cplx twist{1.0, 0.0};
  std::vector<cplx> table;
};

// Build the sequence a descriptor names. Throws ConfigError when a field the
// kind requires is missing, AdmissibilityError when parameter values are
// inadmissible (|L| >= 1 etc.).
CoefficientSequence make_sequence(const SequenceSpec& spec);

// sum_{n=0}^{N} |alpha_{n+p} - alpha_n|; nondecreasing in N.
double bv_partial_sum(const CoefficientSequence& seq, int stride, std::int64_t n_max);

// Same partial sum over an explicit value table (used for Delta_n diagnostics).
double bv_partial_sum(const std::vector<cplx>& x, int stride);

}  // namespace opuc
