// Two-stage point-mass probe in multiprecision arithmetic. Below a pure
// point the Delta magnitudes decay like |lambda_1|^{-2n}, far past what
// double precision can represent across the fit window, so both stages run
// in mpfr floats sized from the transfer-matrix growth bound.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/mpfr.hpp>

#include "opuc/asymptotics.hpp"
#include "opuc/errors.hpp"

namespace opuc {
namespace {

using big = boost::multiprecision::mpfr_float;

struct BigCplx {
  big re{0};
  big im{0};
};

BigCplx operator+(const BigCplx& a, const BigCplx& b) { return {a.re + b.re, a.im + b.im}; }
BigCplx operator-(const BigCplx& a, const BigCplx& b) { return {a.re - b.re, a.im - b.im}; }
BigCplx operator*(const BigCplx& a, const BigCplx& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
BigCplx operator*(const big& s, const BigCplx& a) { return {s * a.re, s * a.im}; }
BigCplx operator/(const BigCplx& a, const big& s) { return {a.re / s, a.im / s}; }
BigCplx big_conj(const BigCplx& a) { return {a.re, -a.im}; }
big big_norm(const BigCplx& a) { return a.re * a.re + a.im * a.im; }

BigCplx to_big(const cplx& z) {
  return {big(z.real()), big(z.imag())};
}

BigCplx unit_from_angle(double omega) {
  const big w(omega);
  return {cos(w), sin(w)};
}

// One stage of the perturbation: run the polynomial recursion at zeta for the
// given coefficients, emitting Delta_n = rho_n conj(phi_{n+1}) phi*_n /
// ((1-gamma)/gamma + K_n) for n = 0..n_max.
template <class AlphaFn, class Emit>
void run_stage(const AlphaFn& alpha, const BigCplx& zeta, const big& offset,
               std::int64_t n_max, const Emit& emit) {
  BigCplx phi{big(1), big(0)};
  BigCplx phi_star{big(1), big(0)};
  big K(1);  // K_0 at loop entry for n = 0
  for (std::int64_t n = 0; n <= n_max; ++n) {
    const BigCplx a = alpha(n);
    const big rho = sqrt(big(1) - big_norm(a));
    const BigCplx phi_next = (zeta * phi - big_conj(a) * phi_star) / rho;
    const BigCplx phi_star_next = (phi_star - a * (zeta * phi)) / rho;
    const BigCplx delta = (rho * (big_conj(phi_next) * phi_star)) / (offset + K);
    emit(n, a, delta, K);
    phi = phi_next;
    phi_star = phi_star_next;
    K += big_norm(phi_next);
  }
}

double growth_bound(const cplx& a) {
  const double m = std::abs(a);
  return (1.0 + m) / std::sqrt(1.0 - m * m);
}

}  // namespace

PurePointProbe pure_point_probe(const CoefficientSequence& base,
                                const PointMassSpec& first,
                                const PointMassSpec& second, std::int64_t n_max,
                                std::int64_t fit_lo, std::int64_t fit_hi) {
  if (n_max < 10) throw std::invalid_argument("pure_point_probe: n_max too small");
  if (!(0 <= fit_lo && fit_lo < fit_hi && fit_hi <= n_max)) {
    throw std::invalid_argument("pure_point_probe: bad fit window");
  }

  // Size the working precision from the fastest possible transfer growth of
  // either stage; the double-precision pilot of stage one is accurate enough
  // for a bound even where its small values lose relative accuracy.
  const std::vector<cplx> pilot = perturbed_alphas(base, first, n_max);
  double lambda_bound = 1.0 + 1e-3;
  for (std::int64_t n = 0; n <= n_max; ++n) {
    lambda_bound = std::max(lambda_bound, growth_bound(base(n)));
    lambda_bound = std::max(lambda_bound, growth_bound(pilot[static_cast<std::size_t>(n)]));
  }
  const double bits =
      2.4 * static_cast<double>(n_max) * std::log2(lambda_bound) + 192.0;
  const int digits10 = std::max(50, static_cast<int>(bits * 0.30103) + 4);
  big::default_precision(static_cast<unsigned>(digits10));

  PurePointProbe out;
  out.precision_bits = static_cast<int>(bits);

  const BigCplx zeta1 = unit_from_angle(first.omega);
  const BigCplx zeta2 = unit_from_angle(second.omega);
  const big offset1 = (big(1) - big(first.gamma)) / big(first.gamma);
  const big offset2 = (big(1) - big(second.gamma)) / big(second.gamma);

  // Stage one: materialize the perturbed coefficients in full precision.
  std::vector<BigCplx> table(static_cast<std::size_t>(n_max) + 1);
  run_stage([&base](std::int64_t n) { return to_big(base(n)); }, zeta1, offset1,
            n_max,
            [&table](std::int64_t n, const BigCplx& a, const BigCplx& delta,
                     const big&) { table[static_cast<std::size_t>(n)] = a + delta; });

  // Stage two: perturb the perturbed measure and record the decay profile.
  out.log_abs_delta.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  big log_k_half(0);
  big log_k_end(0);
  run_stage(
      [&table](std::int64_t n) { return table[static_cast<std::size_t>(n)]; },
      zeta2, offset2, n_max,
      [&](std::int64_t n, const BigCplx&, const BigCplx& delta, const big& K) {
        out.log_abs_delta[static_cast<std::size_t>(n)] =
            static_cast<double>(log(big_norm(delta)) / 2);
        if (n == n_max / 2) log_k_half = log(K);
        if (n == n_max) log_k_end = log(K);
      });

  out.kernel_growth_ratio = static_cast<double>(exp(log_k_end - log_k_half));
  out.kernel_bounded = out.kernel_growth_ratio < 1.0 + 1e-8;

  std::vector<double> xs, ys;
  xs.reserve(static_cast<std::size_t>(fit_hi - fit_lo) + 1);
  ys.reserve(xs.capacity());
  for (std::int64_t n = fit_lo; n <= fit_hi; ++n) {
    xs.push_back(static_cast<double>(n));
    ys.push_back(out.log_abs_delta[static_cast<std::size_t>(n)]);
  }
  out.tail_fit = linear_fit(xs, ys);
  return out;
}

}  // namespace opuc
