#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "opuc/asymptotics.hpp"
#include "opuc/coeffs.hpp"
#include "opuc/errors.hpp"
#include "opuc/pointmass.hpp"
#include "support/test_helpers.hpp"

using opuc::CoefficientSequence;
using opuc::DeltaScan;
using opuc::PointMassSpec;
using opuc::cplx;
using testutil::check_close;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("mass weight must lie strictly inside (0, 1)") {
  CHECK_THROWS_AS(PointMassSpec(0.2, 0.0), opuc::AdmissibilityError);
  CHECK_THROWS_AS(PointMassSpec(0.2, 1.0), opuc::AdmissibilityError);
  CHECK_THROWS_AS(PointMassSpec(0.2, -0.3), opuc::AdmissibilityError);
  CHECK_NOTHROW(PointMassSpec(0.2, 0.5));
}

TEST_CASE("scan indexing and first shifts in closed form") {
  const auto seq = CoefficientSequence::constant({-0.5, 0.0});
  DeltaScan scan(seq, PointMassSpec(0.0, 0.5));
  CHECK(scan.n() == -1);
  CHECK_THROWS_AS(scan.delta(), std::logic_error);
  scan.advance();
  CHECK(scan.n() == 0);
  // Delta_0 = rho conj(phi_1) phi*_0 / ((1-g)/g + 1); phi_1 = 1.5/rho at z=1.
  check_close(scan.delta().value(), {0.75, 0.0}, 1e-15);

  // Free background: Delta_0 = gamma conj(zeta), the first moment of the mass.
  const auto free_seq = CoefficientSequence::constant({0.0, 0.0});
  DeltaScan f(free_seq, PointMassSpec(0.7, 0.3));
  f.advance();
  check_close(f.delta().value(), 0.3 * std::polar(1.0, -0.7), 1e-15);
}

TEST_CASE("shift values match the 200-bit plain-arithmetic recursion") {
  const auto seq = CoefficientSequence::constant({-0.5, 0.0});
  const PointMassSpec spec(kPi / 6.0, 0.3);
  const std::vector<cplx> d = opuc::delta_sequence(seq, spec, 50);
  check_close(d[10], {0.7320611935478457212054711, -0.4428839123254889071699182},
              1e-14);
  check_close(d[50], {0.7320508075688772935339113, -0.4428909828689582618667628},
              1e-14);
}

TEST_CASE("all four coefficient routes agree on random BV sequences") {
  for (unsigned seed : {1u, 2u, 3u}) {
    const auto seq = CoefficientSequence::custom(testutil::random_bv_table(seed, 62));
    const PointMassSpec spec(0.4 + 0.1 * seed, 0.25 + 0.15 * seed);
    const std::vector<cplx> ger = opuc::perturbed_alphas(seq, spec, 60);
    const std::vector<cplx> del = opuc::delta_sequence(seq, spec, 60);
    double worst = 0.0;
    for (std::int64_t n = 0; n <= 60; ++n) {
      const cplx g = ger[static_cast<std::size_t>(n)];
      const cplx s = opuc::simon_alpha(seq, spec, n);
      const cplx d = seq(n) + del[static_cast<std::size_t>(n)];
      worst = std::max(worst, std::abs(g - s));
      worst = std::max(worst, std::abs(g - d));
      worst = std::max(worst, std::abs(s - d));
    }
    CAPTURE(seed);
    CHECK(worst < 1e-11);
  }
}

TEST_CASE("geronimus route equals the scan route index by index") {
  const auto seq = CoefficientSequence::constant_plus_decay(
      {-0.5, 0.0}, opuc::DecaySpec::geometric(0.9, {0.2, 0.1}));
  const PointMassSpec spec(0.2, 0.3);
  const std::vector<cplx> ger = opuc::perturbed_alphas(seq, spec, 40);
  for (std::int64_t n = 0; n <= 40; ++n) {
    check_close(opuc::geronimus_alpha(seq, spec, n + 1) - seq(n),
                ger[static_cast<std::size_t>(n)] - seq(n), 1e-12);
    check_close(opuc::delta_n(seq, spec, n),
                ger[static_cast<std::size_t>(n)] - seq(n), 1e-12);
  }
}

TEST_CASE("moment oracle agrees with the recursion routes on the free base") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> wgt(0.05, 0.95);
  const auto base = CoefficientSequence::constant({0.0, 0.0});
  for (int trial = 0; trial < 5; ++trial) {
    const PointMassSpec spec(ang(rng), wgt(rng));
    const auto mom = opuc::moment_oracle_alpha(opuc::OracleBase::lebesgue, spec, 30);
    const auto ger = opuc::perturbed_alphas(base, spec, 30);
    double worst = 0.0;
    for (std::size_t n = 0; n <= 30; ++n) worst = std::max(worst, std::abs(mom[n] - ger[n]));
    CAPTURE(spec.omega);
    CAPTURE(spec.gamma);
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("free base with a mass at omega = 0 has the known closed form") {
  // dnu = (1-g) dLebesgue + g delta_1: alpha_n(dnu) = g / (1 + g n) exactly
  // (Toeplitz determinants of the rank-one perturbation are linear in n).
  const PointMassSpec spec(0.0, 0.4);
  const auto mom = opuc::moment_oracle_alpha(opuc::OracleBase::lebesgue, spec, 25);
  for (std::size_t n = 0; n <= 25; ++n) {
    check_close(mom[n], {0.4 / (1.0 + 0.4 * n), 0.0}, 1e-12);
  }
}

TEST_CASE("kernel accumulation: free base gives K_n = n + 1") {
  const auto seq = CoefficientSequence::constant({0.0, 0.0});
  DeltaScan scan(seq, PointMassSpec(1.1, 0.5));
  for (int k = 0; k < 200; ++k) scan.advance();
  CHECK(scan.log_kernel() == doctest::Approx(std::log(200.0)).epsilon(1e-12));
}

TEST_CASE("scan states are consistent with direct evaluation") {
  const auto seq = CoefficientSequence::custom(testutil::random_bv_table(9, 32));
  const PointMassSpec spec(0.5, 0.5);
  DeltaScan scan(seq, spec);
  for (int k = 0; k <= 20; ++k) scan.advance();
  CHECK(scan.n() == 20);
  const auto direct = opuc::evaluate(seq, std::polar(1.0, 0.5), 21);
  const double rel = std::abs(scan.state_np1().phi().value() - direct.phi().value()) /
                     std::abs(direct.phi().value());
  CHECK(rel < 1e-12);
}

TEST_CASE("quotient accessors need history") {
  const auto seq = CoefficientSequence::constant({-0.5, 0.0});
  DeltaScan scan(seq, PointMassSpec(0.0, 0.5));
  scan.advance();
  CHECK_THROWS_AS(scan.cs_quotient(), std::logic_error);
  scan.advance();
  CHECK(std::isfinite(scan.cs_quotient().real()));
  CHECK(std::isfinite(scan.cs_quotient_twisted().real()));
}
