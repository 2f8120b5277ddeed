#pragma once

// Bridge from scaled Jacobi (real-line) recurrence coefficients to sieved
// Verblunsky coefficients on the circle: the forward recursion
//   alpha_n = (y/2)^2 a_{n+1}^2 / (1 - alpha_{n-1}) - 1,  alpha_{-1} = -1,
// its interleaved (angle-doubled) circle sequence, and the bounded-variation
// propagation diagnostics.

#include <cstdint>
#include <functional>
#include <vector>

#include "opuc/asymptotics.hpp"
#include "opuc/coeffs.hpp"

namespace opuc {

struct JacobiSpec {
  // Off-diagonal entries a_n for n >= 1; must be positive and nondecreasing
  // to 1. Diagonal entries b_n must be identically zero (the angle-doubling
  // correspondence requires a measure symmetric about 0).
  std::function<double(std::int64_t)> a;
  std::function<double(std::int64_t)> b = [](std::int64_t) { return 0.0; };
  double y = 1.0;  // scaling parameter in (0, 2]

  static JacobiSpec constant_one(double y);
  // a_n = 1 - (n+1)^{-exponent}
  static JacobiSpec power_approach(double exponent, double y);
  // a_n = 1 - 2^{-n}
  static JacobiSpec geometric_approach(double y);

  // The expected coefficient limit -a_y = -sqrt(1 - (y/2)^2).
  double limit_alpha() const;
};

// alpha_0..alpha_n_max of the sieved measure by the forward recursion above.
// Throws AdmissibilityError if the a-table drives any alpha out of (-1, 1)
// or violates the positivity/zero-diagonal requirements.
std::vector<double> sieved_alphas(const JacobiSpec& spec, std::int64_t n_max);

// [0, x_0, 0, x_1, ...]: the circle sequence with zeros at even indices.
std::vector<cplx> interleave_opuc(const std::vector<double>& alphas);

struct BvPropagationReport {
  LimitReport report;        // tail/bv report of the sieved alpha sequence
  // Worst residual of the exact difference identity
  //   alpha_n - alpha_{n-1} = c(a_{n+1}^2 - a_n^2)/(1-alpha_{n-1})
  //                         + c a_n^2 (alpha_{n-1} - alpha_{n-2}) /
  //                           ((1-alpha_{n-1})(1-alpha_{n-2})),
  // c = (y/2)^2, alpha_{-1} = alpha_{-2} = -1 where indices go negative.
  double max_residual = 0.0;
};

BvPropagationReport bv_propagation_check(const JacobiSpec& spec, std::int64_t n_max);

// sum_{n=1}^{n_max} (a_n - 1)^2 — the square-summability diagnostic deciding
// whether the approach to 1 is fast enough for a Szegő-class measure.
double sum_sq_deviation(const JacobiSpec& spec, std::int64_t n_max);

}  // namespace opuc
