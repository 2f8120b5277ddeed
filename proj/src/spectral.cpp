#include "opuc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "opuc/errors.hpp"

namespace opuc {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// |Tr T_p(e^{i theta})| for the periodic block built from beta.
double block_abs_trace(const std::vector<cplx>& beta, double theta) {
  cplx z = std::polar(1.0, theta);
  TransferMatrix2 T = transfer_matrix(beta[0], z);
  for (std::size_t j = 1; j < beta.size(); ++j) {
    T = transfer_matrix(beta[j], z) * T;  // highest index leftmost
  }
  return std::abs(T.trace());
}

bool gap_predicate(const std::vector<cplx>& beta, double theta) {
  double t = block_abs_trace(beta, theta);
  if (std::abs(t - 2.0) < 1e-12) return false;  // bands are closed
  return t > 2.0;
}

// Count predicate sign changes around the circle on an n-point uniform grid.
int count_crossings(const std::vector<cplx>& beta, int n) {
  int crossings = 0;
  bool prev = gap_predicate(beta, 0.0);
  for (int i = 1; i <= n; ++i) {
    bool cur = gap_predicate(beta, kTwoPi * i / n);
    if (cur != prev) ++crossings;
    prev = cur;
  }
  return crossings;
}

}  // namespace

double canonical_angle(double theta) {
  double t = std::remainder(theta, kTwoPi);  // in [-pi, pi]
  if (t <= -kPi) t += kTwoPi;                // map -pi to +pi
  return t;
}

bool GapGeometry::contains(double theta) const {
  for (const Arc& arc : arcs) {
    // Shift theta into [arc.lo, arc.lo + 2pi) and test against the width.
    double rel = theta - arc.lo;
    rel -= kTwoPi * std::floor(rel / kTwoPi);
    if (rel > 0.0 && rel < arc.hi - arc.lo) return true;
  }
  return false;
}

bool in_gap(cplx L, double theta) { return in_gap(std::vector<cplx>{L}, theta); }

bool in_gap(const std::vector<cplx>& beta, double theta) {
  return gap_predicate(beta, canonical_angle(theta));
}

GapGeometry compute_bands(const std::vector<cplx>& beta, int grid, double tol) {
  const int p = static_cast<int>(beta.size());
  if (p < 1) throw ResolutionError("compute_bands: empty period block");
  if (grid < 16 * p) {
    throw ResolutionError("compute_bands: grid must have at least 16p samples");
  }
  if (!(tol > 0.0)) throw ResolutionError("compute_bands: tol must be positive");

  // A doubled grid must see the same crossing structure, otherwise at least
  // one cell of the requested grid hides more than one crossing.
  if (count_crossings(beta, grid) != count_crossings(beta, 2 * grid)) {
    throw ResolutionError("compute_bands: crossing count unstable under grid doubling");
  }

  // Locate every predicate flip by bisection to width tol.
  std::vector<double> edges;
  bool prev = gap_predicate(beta, 0.0);
  for (int i = 1; i <= grid; ++i) {
    double lo = kTwoPi * (i - 1) / grid;
    double hi = kTwoPi * i / grid;
    bool cur = gap_predicate(beta, hi);
    if (cur != prev) {
      bool lo_state = prev;
      double a = lo, b = hi;
      while (b - a > tol) {
        double mid = 0.5 * (a + b);
        if (gap_predicate(beta, mid) == lo_state) {
          a = mid;
        } else {
          b = mid;
        }
      }
      edges.push_back(0.5 * (a + b));
    }
    prev = cur;
  }

  GapGeometry geom;
  if (edges.empty()) {
    // No crossings: either all-band (the generic case; the essential spectrum
    // is never empty) or, defensively, all-gap.
    geom.band_count = 1;
    return geom;
  }

  // Classify the cyclic intervals between consecutive edges by a midpoint
  // probe and emit the gap ones.
  std::sort(edges.begin(), edges.end());
  const std::size_t m = edges.size();
  int bands = 0;
  for (std::size_t i = 0; i < m; ++i) {
    double lo = edges[i];
    double hi = (i + 1 < m) ? edges[i + 1] : edges[0] + kTwoPi;
    double mid = 0.5 * (lo + hi);
    if (gap_predicate(beta, mid)) {
      double lo_c = canonical_angle(lo);
      double width = hi - lo;
      geom.arcs.push_back({lo_c, lo_c + width});
    } else {
      ++bands;
    }
  }
  geom.band_count = std::max(1, bands);
  std::sort(geom.arcs.begin(), geom.arcs.end(),
            [](const GapGeometry::Arc& x, const GapGeometry::Arc& y) { return x.lo < y.lo; });
  return geom;
}

EigenPair eigen_pair(const TransferMatrix2& M) {
  const cplx tr = M.trace();
  const cplx dt = M.det();
  const cplx sq = std::sqrt(tr * tr - 4.0 * dt);
  cplx l1 = 0.5 * (tr + sq);
  cplx l2 = 0.5 * (tr - sq);
  // Modulus-descending order is the branch prescription: along a gap the
  // moduli stay strictly separated, so ordering by modulus is continuous and
  // matches the positive-root choice at theta = 0.
  if (std::abs(l1) < std::abs(l2)) std::swap(l1, l2);
  if (std::abs(l1) - std::abs(l2) < 1e-10) {
    throw DegenerateError("eigen_pair: eigenvalue moduli coincide (not hyperbolic)");
  }

  auto eigvec = [&M](cplx lambda) -> std::array<cplx, 2> {
    // Row 1 gives (1, (lambda - a)/b); fall back to row 2, then to the
    // diagonal case. The two rows of (M - lambda) are proportional, so either
    // usable row determines the vector.
    const double scale = std::max({std::abs(M.a), std::abs(M.b), std::abs(M.c), std::abs(M.d)});
    const double tiny = 1e-14 * std::max(scale, 1.0);
    std::array<cplx, 2> g;
    if (std::abs(M.b) > tiny) {
      g = {cplx{1.0, 0.0}, (lambda - M.a) / M.b};
    } else if (std::abs(M.c) > tiny) {
      g = {(lambda - M.d) / M.c, cplx{1.0, 0.0}};
    } else {
      // Diagonal matrix: pick the matching axis.
      g = (std::abs(M.a - lambda) <= std::abs(M.d - lambda))
              ? std::array<cplx, 2>{cplx{1.0, 0.0}, cplx{0.0, 0.0}}
              : std::array<cplx, 2>{cplx{0.0, 0.0}, cplx{1.0, 0.0}};
    }
    // Normalize to first component 1 where possible.
    if (std::abs(g[0]) >= 1e-8) {
      g[1] /= g[0];
      g[0] = cplx{1.0, 0.0};
    } else if (std::abs(g[1]) > 0.0) {
      g[0] /= g[1];
      g[1] = cplx{1.0, 0.0};
    }
    return g;
  };

  EigenPair out;
  out.lambda1 = l1;
  out.lambda2 = l2;
  out.vec1 = eigvec(l1);
  out.vec2 = eigvec(l2);
  return out;
}

namespace {

// Shared gap guard: returns (sin(theta/2), sqrt(|L|^2 - sin^2(theta/2))).
std::pair<double, double> gap_radicand(cplx L, double theta) {
  const double abs2_L = std::norm(L);
  if (abs2_L == 0.0) {
    throw OutOfGapError("delta_infinity/limit_phase: L = 0 has no gap");
  }
  const double sh = std::sin(0.5 * canonical_angle(theta));
  const double rad = abs2_L - sh * sh;
  if (!(rad > 0.0)) {
    throw OutOfGapError("evaluation angle is not strictly inside the gap");
  }
  return {sh, std::sqrt(rad)};
}

}  // namespace

cplx delta_infinity(cplx L, double theta) {
  const double t = canonical_angle(theta);
  const auto [sh, root] = gap_radicand(L, t);
  (void)sh;
  const cplx zeta = std::polar(1.0, t);
  const cplx h_sqrt = 2.0 * std::polar(1.0, 0.5 * t) * root;
  return std::conj(h_sqrt) * ((zeta - 1.0) - h_sqrt) / (2.0 * std::conj(L));
}

cplx limit_phase(cplx L, double theta) {
  const double t = canonical_angle(theta);
  const auto [sh, root] = gap_radicand(L, t);
  const double abs2_L = std::norm(L);
  const double cos_w = (2.0 * sh * sh - abs2_L) / abs2_L;
  const double sin_w = 2.0 * sh * root / abs2_L;
  const double pyth = cos_w * cos_w + sin_w * sin_w;
  if (std::abs(pyth - 1.0) > 1e-12) {
    throw Error("limit_phase: internal Pythagorean identity violated");
  }
  return L * std::polar(1.0, std::atan2(sin_w, cos_w));
}

}  // namespace opuc
