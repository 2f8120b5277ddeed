#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "opuc/coeffs.hpp"
#include "opuc/errors.hpp"
#include "opuc/jacobi_bridge.hpp"
#include "opuc/spectral.hpp"
#include "support/test_helpers.hpp"

using opuc::JacobiSpec;
using testutil::check_close;

namespace {
constexpr double kPi = 3.14159265358979323846;
const double kRoot3Half = std::sqrt(3.0) / 2.0;
}

TEST_CASE("y = 2 with unit off-diagonals gives the exact rational sequence") {
  // c = 1, a_n = 1: the recursion x_n = 1/(1 - x_{n-1}) - 1 from x_{-1} = -1
  // telescopes to x_n = -1/(n+2).
  const auto x = opuc::sieved_alphas(JacobiSpec::constant_one(2.0), 20);
  for (std::size_t n = 0; n <= 20; ++n) {
    check_close(x[n], -1.0 / (static_cast<double>(n) + 2.0), 1e-15);
  }
  CHECK(JacobiSpec::constant_one(2.0).limit_alpha() == doctest::Approx(0.0));
}

TEST_CASE("y = 1 with unit off-diagonals converges to the fixed point -sqrt(3)/2") {
  const JacobiSpec spec = JacobiSpec::constant_one(1.0);
  CHECK(spec.limit_alpha() == doctest::Approx(-kRoot3Half).epsilon(1e-15));
  const auto x = opuc::sieved_alphas(spec, 60);
  CHECK(std::abs(x[50] - spec.limit_alpha()) < 1e-14);
  // contraction factor at the fixed point is c/(1+a_y)^2, far below 1
  CHECK(std::abs(x[10] - spec.limit_alpha()) < 1e-10);
}

TEST_CASE("geometric approach reaches the limit to machine precision") {
  const auto x = opuc::sieved_alphas(JacobiSpec::geometric_approach(1.0), 60);
  CHECK(std::abs(x[60] + kRoot3Half) < 1e-12);
}

TEST_CASE("power-law approach: deviation inherits the same power law") {
  const JacobiSpec spec = JacobiSpec::power_approach(0.6, 1.0);
  const auto x = opuc::sieved_alphas(spec, 10000);
  const double dev = std::abs(x[10000] + kRoot3Half);
  // deviation ~ 0.288 (n+1)^{-0.6}: two orders slower than the 1e-4 scale
  check_close(dev, 0.0011460584148857977, 1e-12);
  CHECK(dev * std::pow(10001.0, 0.6) > 0.26);
  CHECK(dev * std::pow(10001.0, 0.6) < 0.31);
  double lo = 0.0, hi = -1.0;
  for (double v : x) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo > -1.0);
  CHECK(hi < 0.0);
}

TEST_CASE("defining and interleaving identities hold to machine precision") {
  const JacobiSpec spec = JacobiSpec::power_approach(0.6, 1.0);
  const auto x = opuc::sieved_alphas(spec, 500);
  const double c = 0.25;  // (y/2)^2
  double worst = 0.0;
  for (std::int64_t n = 0; n <= 500; ++n) {
    const double prev = n == 0 ? -1.0 : x[static_cast<std::size_t>(n - 1)];
    const double lhs = c * spec.a(n + 1) * spec.a(n + 1);
    const double rhs = (1.0 - prev) * (1.0 + x[static_cast<std::size_t>(n)]);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  CHECK(worst < 1e-14);

  const opuc::BvPropagationReport bp = opuc::bv_propagation_check(spec, 2000);
  CHECK(bp.max_residual < 1e-12);
  CHECK(bp.report.bv_partial > 0.0);
  CHECK(std::isfinite(bp.report.bv_partial));
}

TEST_CASE("interleaved circle sequence alternates zeros and the sieved values") {
  const auto x = opuc::sieved_alphas(JacobiSpec::constant_one(1.0), 10);
  const auto circle = opuc::interleave_opuc(x);
  REQUIRE(circle.size() == 22);
  for (std::size_t k = 0; k < circle.size(); ++k) {
    if (k % 2 == 0) {
      check_close(circle[k], {0.0, 0.0}, 1e-18);
    } else {
      check_close(circle[k], {x[k / 2], 0.0}, 1e-18);
    }
  }
  // the interleaved table is admissible as a coefficient sequence
  CHECK_NOTHROW(opuc::CoefficientSequence::custom(circle)(21));
}

TEST_CASE("square-summability diagnostic") {
  CHECK(opuc::sum_sq_deviation(JacobiSpec::constant_one(1.0), 1000) == 0.0);
  // exponent 0.6: sum (n+1)^{-1.2} converges; frozen partial sum at 1e6
  check_close(opuc::sum_sq_deviation(JacobiSpec::power_approach(0.6, 1.0), 1000000),
              4.2761038635811115, 1e-6);
  // exponent 0.3: sum (n+1)^{-0.6} diverges like n^{0.4}
  CHECK(opuc::sum_sq_deviation(JacobiSpec::power_approach(0.3, 1.0), 100000) > 100.0);
}

TEST_CASE("gap endpoint of the limiting background matches 2 arccos(y/2)") {
  // a_y = sqrt(3)/2 for y = 1; the constant background -a_y opens a gap
  // (-2 arcsin a_y, 2 arcsin a_y) and 2 arcsin a_y == 2 arccos(y/2) = 2 pi/3.
  const opuc::GapGeometry g = opuc::compute_bands({{-kRoot3Half, 0.0}});
  REQUIRE(g.arcs.size() == 1);
  check_close(g.arcs[0].hi, 2.0 * kPi / 3.0, 1e-8);
  check_close(g.arcs[0].hi, 2.0 * std::acos(0.5), 1e-8);
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(opuc::sieved_alphas(JacobiSpec::constant_one(2.5), 5),
                  opuc::AdmissibilityError);
  CHECK_THROWS_AS(opuc::sieved_alphas(JacobiSpec::constant_one(0.0), 5),
                  opuc::AdmissibilityError);
  CHECK_THROWS_AS(JacobiSpec::power_approach(-0.2, 1.0), opuc::AdmissibilityError);

  // At y = 2 a constant a = 1.2 drives the recursion out of (-1, 1) by n = 3
  // (alpha_3 = 3.06...); at y = 1 the same table settles at -0.8 and is legal.
  JacobiSpec big = JacobiSpec::constant_one(2.0);
  big.a = [](std::int64_t) { return 1.2; };
  CHECK_THROWS_AS(opuc::sieved_alphas(big, 5), opuc::AdmissibilityError);
  JacobiSpec big_but_ok = JacobiSpec::constant_one(1.0);
  big_but_ok.a = [](std::int64_t) { return 1.2; };
  CHECK_NOTHROW(opuc::sieved_alphas(big_but_ok, 5));

  JacobiSpec negative = JacobiSpec::constant_one(1.0);
  negative.a = [](std::int64_t n) { return n == 3 ? -0.5 : 0.9; };
  CHECK_THROWS_AS(opuc::sieved_alphas(negative, 10), opuc::AdmissibilityError);

  JacobiSpec diag = JacobiSpec::constant_one(1.0);
  diag.b = [](std::int64_t) { return 0.1; };
  CHECK_THROWS_AS(opuc::sieved_alphas(diag, 5), opuc::AdmissibilityError);
}
