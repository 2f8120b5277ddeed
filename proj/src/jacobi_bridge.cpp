#include "opuc/jacobi_bridge.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "opuc/errors.hpp"

namespace opuc {
namespace {

void validate(const JacobiSpec& spec) {
  if (!spec.a) throw AdmissibilityError("jacobi spec: missing a-sequence");
  if (!(spec.y > 0.0 && spec.y <= 2.0)) {
    throw AdmissibilityError("jacobi spec: y must lie in (0, 2]");
  }
}

double a_at(const JacobiSpec& spec, std::int64_t n) {
  const double v = spec.a(n);
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw AdmissibilityError("jacobi spec: a_" + std::to_string(n) +
                             " must be positive and finite");
  }
  if (spec.b && spec.b(n) != 0.0) {
    throw AdmissibilityError("jacobi spec: diagonal b_" + std::to_string(n) +
                             " must be zero");
  }
  return v;
}

}  // namespace

JacobiSpec JacobiSpec::constant_one(double y) {
  JacobiSpec s;
  s.a = [](std::int64_t) { return 1.0; };
  s.y = y;
  return s;
}

JacobiSpec JacobiSpec::power_approach(double exponent, double y) {
  if (!(exponent > 0.0)) {
    throw AdmissibilityError("jacobi spec: power approach needs a positive exponent");
  }
  JacobiSpec s;
  s.a = [exponent](std::int64_t n) {
    return 1.0 - std::pow(static_cast<double>(n) + 1.0, -exponent);
  };
  s.y = y;
  return s;
}

JacobiSpec JacobiSpec::geometric_approach(double y) {
  JacobiSpec s;
  s.a = [](std::int64_t n) { return 1.0 - std::pow(2.0, -static_cast<double>(n)); };
  s.y = y;
  return s;
}

double JacobiSpec::limit_alpha() const {
  const double half = y / 2.0;
  return -std::sqrt(std::max(0.0, 1.0 - half * half));
}

std::vector<double> sieved_alphas(const JacobiSpec& spec, std::int64_t n_max) {
  validate(spec);
  if (n_max < 0) throw std::out_of_range("sieved_alphas: n_max must be >= 0");
  const double c = (spec.y / 2.0) * (spec.y / 2.0);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_max) + 1);
  double prev = -1.0;  // alpha_{-1}
  for (std::int64_t n = 0; n <= n_max; ++n) {
    const double an1 = a_at(spec, n + 1);
    const double alpha = c * an1 * an1 / (1.0 - prev) - 1.0;
    if (!(alpha > -1.0 && alpha < 1.0)) {
      throw AdmissibilityError("sieved alpha_" + std::to_string(n) +
                               " left (-1, 1); a-table inadmissible for y = " +
                               std::to_string(spec.y));
    }
    out.push_back(alpha);
    prev = alpha;
  }
  return out;
}

std::vector<cplx> interleave_opuc(const std::vector<double>& alphas) {
  std::vector<cplx> out;
  out.reserve(2 * alphas.size());
  for (double x : alphas) {
    out.emplace_back(0.0, 0.0);
    out.emplace_back(x, 0.0);
  }
  return out;
}

BvPropagationReport bv_propagation_check(const JacobiSpec& spec, std::int64_t n_max) {
  validate(spec);
  if (n_max < 2) throw std::out_of_range("bv_propagation_check: n_max must be >= 2");
  const std::vector<double> alphas = sieved_alphas(spec, n_max);
  const double c = (spec.y / 2.0) * (spec.y / 2.0);

  BvPropagationReport out;
  std::vector<cplx> as_complex(alphas.begin(), alphas.end());
  out.report = bv_report(as_complex, 1);

  auto alpha_at = [&alphas](std::int64_t n) {
    return n < 0 ? -1.0 : alphas[static_cast<std::size_t>(n)];
  };
  for (std::int64_t n = 1; n <= n_max; ++n) {
    const double an = a_at(spec, n);
    const double an1 = a_at(spec, n + 1);
    const double am1 = alpha_at(n - 1);
    const double am2 = alpha_at(n - 2);
    const double lhs = alpha_at(n) - am1;
    const double rhs = c * (an1 * an1 - an * an) / (1.0 - am1) +
                       c * an * an * (am1 - am2) / ((1.0 - am1) * (1.0 - am2));
    out.max_residual = std::max(out.max_residual, std::abs(lhs - rhs));
  }
  return out;
}

double sum_sq_deviation(const JacobiSpec& spec, std::int64_t n_max) {
  validate(spec);
  double sum = 0.0;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    const double d = a_at(spec, n) - 1.0;
    sum += d * d;
  }
  return sum;
}

}  // namespace opuc
