#pragma once

// Mantissa + log-scale representation for complex quantities whose magnitude
// grows or shrinks exponentially with the recursion index. A value x is stored
// as x = mantissa * e^{logscale}; sums and ratios are formed by aligning or
// subtracting exponents before any call to std::exp, so intermediate results
// never overflow even when the represented value would.

#include <cmath>
#include <complex>
#include <limits>

namespace opuc {

using cplx = std::complex<double>;

struct ScaledComplex {
  cplx mantissa{0.0, 0.0};
  double logscale = 0.0;  // value = mantissa * e^logscale

  // Plain double view; overflows/underflows to inf/0 outside double range.
  cplx value() const { return mantissa * std::exp(logscale); }

  // log|value|; -inf for an exact zero.
  double log_abs() const {
    if (mantissa == cplx{0.0, 0.0}) return -std::numeric_limits<double>::infinity();
    return std::log(std::abs(mantissa)) + logscale;
  }

  bool is_zero() const { return mantissa == cplx{0.0, 0.0}; }

  // Push the whole magnitude into logscale so |mantissa| = 1 (zero stays zero).
  ScaledComplex normalized() const {
    double m = std::abs(mantissa);
    if (m == 0.0) return {cplx{0.0, 0.0}, 0.0};
    return {mantissa / m, logscale + std::log(m)};
  }
};

// acc += term, where term = mant * e^{scale}. The accumulator is rebased onto
// the larger exponent; far-underscale contributions vanish harmlessly.
inline void scaled_add(ScaledComplex& acc, cplx mant, double scale) {
  if (mant == cplx{0.0, 0.0}) return;
  if (acc.is_zero()) {
    acc = ScaledComplex{mant, scale};
    return;
  }
  if (scale > acc.logscale) {
    acc.mantissa = acc.mantissa * std::exp(acc.logscale - scale) + mant;
    acc.logscale = scale;
  } else {
    acc.mantissa += mant * std::exp(scale - acc.logscale);
  }
}

// Ratio (a_mant e^{a_scale}) / (b_mant e^{b_scale}) with symbolic exponent
// subtraction; safe whenever the *result* is representable.
inline cplx scaled_ratio(cplx a_mant, double a_scale, cplx b_mant, double b_scale) {
  return a_mant / b_mant * std::exp(a_scale - b_scale);
}

}  // namespace opuc
