#include "opuc/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "opuc/errors.hpp"
#include "opuc/spectral.hpp"

namespace opuc {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

cplx unit_power(double theta, std::int64_t n) {
  return std::polar(1.0, std::fmod(static_cast<double>(n) * theta, kTwoPi));
}

struct TailStats {
  cplx mean{0.0, 0.0};
  double spread = 0.0;
};

TailStats tail_stats(const std::vector<cplx>& window) {
  TailStats st;
  if (window.empty()) return st;
  for (const cplx& q : window) st.mean += q;
  st.mean /= static_cast<double>(window.size());
  for (const cplx& q : window) st.spread = std::max(st.spread, std::abs(q - st.mean));
  return st;
}

EigenPair hyperbolic_pair(const CoefficientSequence& seq, std::int64_t k, cplx zeta) {
  TransferMatrix2 A = transfer_matrix(seq(k), zeta);
  if (!(std::abs(A.trace()) > 2.0)) {
    throw HyperbolicityError("step matrix not hyperbolic at n = " + std::to_string(k));
  }
  try {
    return eigen_pair(A);
  } catch (const DegenerateError&) {
    throw HyperbolicityError("step matrix numerically defective at n = " +
                             std::to_string(k));
  }
}

double vec_overlap(const std::array<cplx, 2>& a, const std::array<cplx, 2>& b) {
  const double na = std::sqrt(std::norm(a[0]) + std::norm(a[1]));
  const double nb = std::sqrt(std::norm(b[0]) + std::norm(b[1]));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::abs(std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1]) / (na * nb);
}

TransferMatrix2 column_matrix(const std::array<cplx, 2>& g1, const std::array<cplx, 2>& g2) {
  TransferMatrix2 G;
  G.a = g1[0];
  G.b = g2[0];
  G.c = g1[1];
  G.d = g2[1];
  return G;
}

}  // namespace

cplx KoomanTrack::r() const {
  if (f1 == cplx{0.0, 0.0}) throw DegenerateError("KoomanTrack: f1 vanished");
  return f2 / f1;
}

std::int64_t hyperbolic_start(const CoefficientSequence& seq, cplx zeta,
                              std::int64_t search_limit) {
  constexpr double kMargin = 1e-6;
  constexpr int kNeeded = 10;
  int run = 0;
  std::int64_t first = 0;
  for (std::int64_t k = 0; k < search_limit; ++k) {
    TransferMatrix2 A = transfer_matrix(seq(k), zeta);
    if (std::abs(A.trace()) > 2.0 + kMargin) {
      if (run == 0) first = k;
      if (++run >= kNeeded) return first;
    } else {
      run = 0;
    }
  }
  throw HyperbolicityError("no run of 10 hyperbolic step matrices found below n = " +
                           std::to_string(search_limit));
}

KoomanTrack kooman_track(const CoefficientSequence& seq, cplx zeta,
                         std::int64_t n_start, std::int64_t n) {
  if (std::abs(std::abs(zeta) - 1.0) > 1e-12) {
    throw Error("kooman_track: zeta must lie on the unit circle");
  }
  if (n_start < 0 || n < n_start) {
    throw std::invalid_argument("kooman_track: need 0 <= n_start <= n");
  }

  ScaledPolyState st = evaluate(seq, zeta, n_start);
  EigenPair ep = hyperbolic_pair(seq, n_start, zeta);
  TransferMatrix2 G = column_matrix(ep.vec1, ep.vec2);

  // w(n_start) = D G^{-1} (phi, phi*)^T, carried as mantissas + shared scale.
  cplx x = st.u;
  cplx y = st.v;
  G.inverse().apply(x, y);
  cplx wm1 = ep.lambda1 * x;
  cplx wm2 = ep.lambda2 * y;
  double sigma = st.su;

  KoomanTrack out;
  out.n_start = n_start;
  out.w1 = ScaledComplex{wm1, sigma}.normalized();
  out.w2 = ScaledComplex{wm2, sigma}.normalized();
  if (out.w1.is_zero()) {
    throw DegenerateError("kooman_track: initial w has zero dominant component");
  }

  double log_p_abs = 0.0;
  double p_phase = 0.0;
  std::array<cplx, 2> prev1 = ep.vec1;
  std::array<cplx, 2> prev2 = ep.vec2;
  cplx lambda1 = ep.lambda1;
  cplx lambda2 = ep.lambda2;

  for (std::int64_t k = n_start + 1; k <= n; ++k) {
    EigenPair cand = hyperbolic_pair(seq, k, zeta);
    // Continuity: keep the column assignment that overlaps the previous basis
    // most, instead of re-sorting by modulus each step.
    const double keep = vec_overlap(cand.vec1, prev1) + vec_overlap(cand.vec2, prev2);
    const double swap = vec_overlap(cand.vec1, prev2) + vec_overlap(cand.vec2, prev1);
    if (swap > keep) {
      std::swap(cand.vec1, cand.vec2);
      std::swap(cand.lambda1, cand.lambda2);
    }
    TransferMatrix2 G_new = column_matrix(cand.vec1, cand.vec2);
    // w(k) = D_k G_k^{-1} G_{k-1} w(k-1)
    TransferMatrix2 M = G_new.inverse() * G;
    M.apply(wm1, wm2);
    wm1 *= cand.lambda1;
    wm2 *= cand.lambda2;
    log_p_abs += std::log(std::abs(cand.lambda1));
    p_phase = std::fmod(p_phase + std::arg(cand.lambda1), kTwoPi);

    const double m = std::max(std::abs(wm1), std::abs(wm2));
    if (m > 2.0 || m < 0.5) {
      wm1 /= m;
      wm2 /= m;
      sigma += std::log(m);
    }

    G = G_new;
    prev1 = cand.vec1;
    prev2 = cand.vec2;
    lambda1 = cand.lambda1;
    lambda2 = cand.lambda2;
  }

  out.n = n;
  out.G = G;
  out.lambda1 = lambda1;
  out.lambda2 = lambda2;
  out.log_p_abs = log_p_abs;
  out.p_phase = p_phase;

  // f_i = w_i(n) / (P_n w_i(n_start)); exponents combined before exp().
  const cplx phase = std::polar(1.0, -p_phase);
  out.f1 = (wm1 / out.w1.mantissa) * phase *
           std::exp(sigma - out.w1.logscale - log_p_abs);
  if (out.w2.is_zero()) {
    out.f2 = {0.0, 0.0};
  } else {
    out.f2 = (wm2 / out.w2.mantissa) * phase *
             std::exp(sigma - out.w2.logscale - log_p_abs);
  }

  out.recon_phi = ScaledComplex{G.a * wm1 + G.b * wm2, sigma}.normalized();
  out.recon_phi_star = ScaledComplex{G.c * wm1 + G.d * wm2, sigma}.normalized();
  return out;
}

LimitReport cesaro_stolz_limit(const std::vector<cplx>& numer,
                               const std::vector<double>& denom) {
  if (numer.size() != denom.size()) {
    throw std::invalid_argument("cesaro_stolz_limit: size mismatch");
  }
  if (numer.size() < 3) {
    throw std::invalid_argument("cesaro_stolz_limit: need at least 3 samples");
  }
  const std::int64_t H = static_cast<std::int64_t>(numer.size()) - 1;
  for (std::int64_t i = 1; i <= H; ++i) {
    if (!(denom[static_cast<std::size_t>(i)] > denom[static_cast<std::size_t>(i - 1)])) {
      throw MonotonicityError("cesaro_stolz_limit: denominator not strictly increasing at i = " +
                              std::to_string(i));
    }
  }

  LimitReport rep;
  rep.method = LimitMethod::cesaro_stolz;
  rep.n_used = H;
  rep.divergence_warning =
      denom[static_cast<std::size_t>(H)] <
      (1.0 + 1e-8) * denom[static_cast<std::size_t>(H / 2)];

  const std::int64_t lo = std::max<std::int64_t>(1, H / 10);
  std::vector<cplx> qs;
  qs.reserve(static_cast<std::size_t>(H - lo + 1));
  for (std::int64_t i = lo; i <= H; ++i) {
    const auto u = static_cast<std::size_t>(i);
    qs.push_back((numer[u] - numer[u - 1]) / (denom[u] - denom[u - 1]));
  }
  const TailStats st = tail_stats(qs);
  rep.estimate = st.mean;
  rep.err_indicator = st.spread;
  for (std::size_t i = 0; i + 1 < qs.size(); ++i) {
    rep.bv_partial += std::abs(qs[i + 1] - qs[i]);
  }
  return rep;
}

std::vector<cplx> delta_sequence(const CoefficientSequence& seq,
                                 const PointMassSpec& spec, std::int64_t n_max) {
  if (n_max < 0) throw std::out_of_range("delta_sequence: n_max must be >= 0");
  std::vector<cplx> out;
  out.reserve(static_cast<std::size_t>(n_max) + 1);
  DeltaScan scan(seq, spec);
  for (std::int64_t k = 0; k <= n_max; ++k) {
    scan.advance();
    out.push_back(scan.delta().value());
  }
  return out;
}

LimitReport bv_report(const std::vector<cplx>& x, int stride) {
  if (stride < 1) throw std::invalid_argument("bv_report: stride must be >= 1");
  if (x.size() < 2 * static_cast<std::size_t>(stride)) {
    throw std::invalid_argument("bv_report: need at least 2*stride samples");
  }
  LimitReport rep;
  rep.method = LimitMethod::tail_value;
  rep.estimate = x.back();
  rep.bv_partial = bv_partial_sum(x, stride);
  rep.err_indicator = std::abs(x[x.size() - 1] - x[x.size() - 1 - static_cast<std::size_t>(stride)]);
  rep.n_used = static_cast<std::int64_t>(x.size()) - 1;
  return rep;
}

LimitReport theorem1_limit(const CoefficientSequence& seq, const PointMassSpec& spec,
                           std::int64_t horizon) {
  if (horizon < 10) throw std::invalid_argument("theorem1_limit: horizon too small");
  LimitReport rep;
  rep.method = LimitMethod::cesaro_stolz;
  rep.n_used = horizon;

  DeltaScan scan(seq, spec);
  scan.advance();
  cplx prev_delta = scan.delta().value();
  double log_k_half = 0.0;
  const std::int64_t lo = std::max<std::int64_t>(1, horizon / 10);
  std::vector<cplx> qs;
  qs.reserve(static_cast<std::size_t>(horizon - lo + 1));
  for (std::int64_t k = 1; k <= horizon; ++k) {
    scan.advance();
    if (k >= lo) qs.push_back(scan.cs_quotient());
    const cplx cur = scan.delta().value();
    rep.bv_partial += std::abs(cur - prev_delta);
    prev_delta = cur;
    if (k == horizon / 2) log_k_half = scan.log_kernel();
  }
  rep.divergence_warning = (scan.log_kernel() - log_k_half) < std::log1p(1e-8);

  const TailStats st = tail_stats(qs);
  rep.estimate = st.mean;
  rep.err_indicator = st.spread;
  return rep;
}

TwistedReport twisted_limit_check(cplx L, cplx zeta, const PointMassSpec& spec,
                                  std::int64_t n_max) {
  if (std::abs(std::abs(zeta) - 1.0) > 1e-12) {
    throw ConfigError("twisted_limit_check: zeta must lie on the unit circle");
  }
  if (std::abs(spec.zeta() - zeta / std::abs(zeta)) > 1e-9) {
    throw ConfigError("twisted_limit_check: spec.omega must match arg(zeta)");
  }
  if (n_max < 10) throw std::invalid_argument("twisted_limit_check: n_max too small");

  const CoefficientSequence seq = CoefficientSequence::twisted(L, zeta);
  const double omega = spec.omega;

  TwistedReport out;
  out.report.method = LimitMethod::cesaro_stolz;
  out.report.n_used = n_max;

  DeltaScan scan(seq, spec);
  scan.advance();
  cplx prev_twisted = scan.delta().value();  // zeta^0 Delta_0
  const std::int64_t lo = std::max<std::int64_t>(1, n_max / 10);
  const std::int64_t id_max = std::min<std::int64_t>(n_max, 100);
  std::vector<cplx> qs;
  double log_k_half = 0.0;
  for (std::int64_t k = 1; k <= n_max; ++k) {
    scan.advance();
    if (k >= lo) qs.push_back(scan.cs_quotient_twisted());
    const cplx cur = unit_power(omega, k) * scan.delta().value();
    out.report.bv_partial += std::abs(cur - prev_twisted);
    prev_twisted = cur;
    if (k == n_max / 2) log_k_half = scan.log_kernel();

    if (k <= id_max) {
      // Exact step identity: zeta^{k-1}(rho_k phi*_{k+1} - rho_{k-1} phi*_{k-1})
      //                        = -(zeta^k alpha_k + zeta^{k-1} alpha_{k-1}) phi_k.
      const ScaledPolyState& sm1 = scan.state_nm1();
      const ScaledPolyState& s0 = scan.state_n();
      const ScaledPolyState& sp1 = scan.state_np1();
      const cplx lhs = unit_power(omega, k - 1) *
                       (scan.rho_n() * sp1.v * std::exp(sp1.sv - s0.su) -
                        scan.rho_nm1() * sm1.v * std::exp(sm1.sv - s0.su)) /
                       s0.u;
      const cplx rhs = -(unit_power(omega, k) * scan.alpha_n() +
                         unit_power(omega, k - 1) * seq(k - 1));
      const double resid = std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
      out.identity_residual_max = std::max(out.identity_residual_max, resid);
    }
  }
  out.report.divergence_warning = (scan.log_kernel() - log_k_half) < std::log1p(1e-8);
  out.direct_tail = prev_twisted;

  const TailStats st = tail_stats(qs);
  out.report.estimate = st.mean;
  out.report.err_indicator = st.spread;
  return out;
}

Corollary1Report corollary1_rate(double L, const DecaySpec& decay,
                                 const PointMassSpec& spec, std::int64_t n_max) {
  if (!(L < 0.0)) throw ConfigError("corollary1_rate: L must be negative real");
  if (std::abs(spec.omega) > 1e-12) {
    throw ConfigError("corollary1_rate: the mass point must sit at omega = 0");
  }
  if (decay.amplitude.imag() != 0.0) {
    throw ConfigError("corollary1_rate: decay amplitude must be real");
  }
  if (n_max < 10) throw std::invalid_argument("corollary1_rate: n_max too small");

  const CoefficientSequence seq =
      CoefficientSequence::constant_plus_decay(cplx(L, 0.0), decay);
  DeltaScan scan(seq, spec);

  Corollary1Report out;
  double ratio = 0.0;
  double prev_ratio = 0.0;
  bool have_prev = false;
  std::int64_t next_decade = 10;
  for (std::int64_t k = 0; k <= n_max; ++k) {
    scan.advance();
    const double c = decay.at(k).real();
    if (c != 0.0) {
      ratio = ((scan.delta().value() + cplx(2.0 * L, 0.0)) / c).real();
      if (have_prev) {
        out.report.bv_partial += std::abs(ratio - prev_ratio);
        out.report.err_indicator = std::abs(ratio - prev_ratio);
      }
      prev_ratio = ratio;
      have_prev = true;
    }
    if (k == next_decade) {
      out.decade_ratios.emplace_back(k, ratio);
      next_decade *= 10;
    }
  }
  if (out.decade_ratios.empty() || out.decade_ratios.back().first != n_max) {
    out.decade_ratios.emplace_back(n_max, ratio);
  }

  out.report.estimate = cplx(ratio, 0.0);
  out.report.method = LimitMethod::tail_value;
  out.report.n_used = n_max;

  // K_{n-1}(1,1)/phi_n(1)^2 at the horizon, exponents cancelled symbolically.
  const ScaledPolyState& sm1 = scan.state_nm1();  // index n_max - 1
  const ScaledPolyState& s0 = scan.state_n();     // index n_max
  const cplx aux = sm1.k_mant *
                   std::exp(sm1.k_scale - 2.0 * s0.su) / (s0.u * s0.u);
  out.aux_ratio = aux.real();
  return out;
}

TransferMatrix2 periodic_block(const CoefficientSequence& seq, int p,
                               std::int64_t k, cplx zeta) {
  if (p < 1) throw std::invalid_argument("periodic_block: p must be >= 1");
  if (k < 0) throw std::invalid_argument("periodic_block: k must be >= 0");
  TransferMatrix2 M = transfer_matrix(seq(k * p), zeta);
  for (int j = 1; j < p; ++j) {
    M = transfer_matrix(seq(k * p + j), zeta) * M;
  }
  return M;
}

std::vector<LimitReport> periodic_residue_limits(const CoefficientSequence& seq,
                                                 int p, const PointMassSpec& spec,
                                                 std::int64_t k_max) {
  if (p < 1) throw std::invalid_argument("periodic_residue_limits: p must be >= 1");
  if (k_max < 10) throw std::invalid_argument("periodic_residue_limits: k_max too small");

  std::vector<cplx> background;
  switch (seq.kind()) {
    case CoefficientSequence::Kind::periodic:
    case CoefficientSequence::Kind::periodic_plus_decay:
      background = seq.betas();
      break;
    case CoefficientSequence::Kind::constant:
    case CoefficientSequence::Kind::constant_plus_decay:
      background.assign(1, seq.base());
      break;
    default:
      throw ConfigError("periodic_residue_limits: sequence has no periodic background");
  }

  const cplx zeta = spec.zeta();
  TransferMatrix2 limit_block =
      transfer_matrix(background[0], zeta);
  for (int j = 1; j < p; ++j) {
    limit_block =
        transfer_matrix(background[static_cast<std::size_t>(j) % background.size()], zeta) *
        limit_block;
  }
  const bool interior = !(std::abs(limit_block.trace()) > 2.0);

  // One pass, demultiplexed by residue.
  std::vector<std::vector<cplx>> residue(static_cast<std::size_t>(p));
  for (auto& v : residue) v.reserve(static_cast<std::size_t>(k_max) + 1);
  DeltaScan scan(seq, spec);
  const std::int64_t n_max = (k_max + 1) * p - 1;
  for (std::int64_t n = 0; n <= n_max; ++n) {
    scan.advance();
    residue[static_cast<std::size_t>(n % p)].push_back(scan.delta().value());
  }

  std::vector<LimitReport> out(static_cast<std::size_t>(p));
  const std::int64_t lo = std::max<std::int64_t>(0, (9 * k_max) / 10);
  for (int j = 0; j < p; ++j) {
    const auto& x = residue[static_cast<std::size_t>(j)];
    LimitReport& rep = out[static_cast<std::size_t>(j)];
    rep.method = LimitMethod::tail_value;
    rep.n_used = k_max * p + j;
    rep.bv_partial = bv_partial_sum(x, 1);
    rep.bands_interior = interior;
    if (interior) {
      rep.estimate = {0.0, 0.0};
      double tail_mag = 0.0;
      for (std::int64_t k = lo; k <= k_max; ++k) {
        tail_mag = std::max(tail_mag, std::abs(x[static_cast<std::size_t>(k)]));
      }
      rep.err_indicator = tail_mag;
    } else {
      std::vector<cplx> window(x.begin() + lo, x.end());
      const TailStats st = tail_stats(window);
      rep.estimate = st.mean;
      rep.err_indicator = std::abs(x[x.size() - 1] - x[x.size() - 2]);
    }
  }
  return out;
}

LineFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw std::invalid_argument("linear_fit: need two equal-length samples");
  }
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("linear_fit: degenerate abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

}  // namespace opuc
