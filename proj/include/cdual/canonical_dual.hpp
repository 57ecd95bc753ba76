#pragma once

// The canonical dual side of the octic: the one-variable functions of sigma,
// the partition of the sigma axis into monotone pieces of Phi^2, and the
// complete enumeration of solutions of Phi(sigma)^2 = H1.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cdual/dense_poly.hpp"
#include "cdual/polynomial_core.hpp"

namespace cdual {

/// Raised when a dual quantity is requested where sigma * tau(sigma) = 0.
class PoleError : public std::domain_error {
 public:
  explicit PoleError(double sigma)
      : std::domain_error("dual pole at sigma = " + std::to_string(sigma)), sigma_(sigma) {}
  double sigma() const noexcept { return sigma_; }

 private:
  double sigma_;
};

struct DualTolerances {
  double pole = 1e-12;        // |sigma tau| <= pole * max(1, |sigma|^3)
  double residual = 1e-9;     // |Phi^2 - H1| <= residual * max(1, H1)
  double dedup = 1e-9;        // |s1 - s2| <= dedup * max(1, |s1|)
  double peak_q = 1e-7;       // |Q| <= peak_q * max(1, |sigma|^3)
};

/// All functions of sigma for one instance.
class DualCurve {
 public:
  explicit DualCurve(const ProblemSpec& spec)
      : k_(derived_constants(spec)),
        a1_(spec.a1()),
        a2_(spec.a2()),
        b1_(spec.b1()),
        c1_(spec.c1()),
        b2_(spec.b2()),
        c2_(spec.c2()) {}

  const DerivedConstants& constants() const noexcept { return k_; }
  double a1() const noexcept { return a1_; }
  double a2() const noexcept { return a2_; }

  double tau(double s) const { return k_.K * (s * s - k_.H3); }
  double sigma_tau(double s) const { return s * tau(s); }
  double sigma_tau_derivative(double s) const { return k_.K * (3.0 * s * s - k_.H3); }

  double phi_squared(double s) const {
    const double st = sigma_tau(s);
    return 2.0 * st * st * (s - k_.H2);
  }

  double phi_squared_derivative(double s) const {
    const double st = sigma_tau(s);
    return 4.0 * st * sigma_tau_derivative(s) * (s - k_.H2) + 2.0 * st * st;
  }

  double q(double s) const {
    return 7.0 * s * s * s - 6.0 * k_.H2 * s * s - 3.0 * k_.H3 * s + 2.0 * k_.H2 * k_.H3;
  }
  double q_derivative(double s) const { return 3.0 * (7.0 * s * s - 4.0 * k_.H2 * s - k_.H3); }

  /// (sigma^-, sigma^+), present only when 4 H2^2 + 7 H3 >= 0.
  std::optional<std::pair<double, double>> q_critical_points() const {
    const double disc = 4.0 * k_.H2 * k_.H2 + 7.0 * k_.H3;
    if (disc < 0.0) return std::nullopt;
    const double r = std::sqrt(disc);
    return std::pair{(2.0 * k_.H2 - r) / 7.0, (2.0 * k_.H2 + r) / 7.0};
  }

  bool is_pole(double s, double tol = DualTolerances{}.pole) const {
    return std::abs(sigma_tau(s)) <= tol * std::max(1.0, std::abs(s * s * s));
  }

  double conjugate_u1(double s1) const { return (s1 - b1_) * (s1 - b1_) / (2.0 * a1_) - c1_; }
  double conjugate_u2(double s2) const { return (s2 - b2_) * (s2 - b2_) / (2.0 * a2_) - c2_; }

  double dual_value(double s) const {
    if (is_pole(s)) throw PoleError(s);
    const double w = s * s - k_.H3;
    return k_.H4 + a2_ * w * w / (8.0 * a1_ * a1_) -
           (phi_squared(s) + k_.H1) / (a2_ * s * w);
  }

  double dual_derivative(double s) const {
    if (is_pole(s)) throw PoleError(s);
    const double denom = 2.0 * a1_ * sigma_tau(s);
    return a2_ * (3.0 * s * s - k_.H3) * (k_.H1 - phi_squared(s)) / (denom * denom);
  }

  /// +-sqrt(H3/3): stationary for P^d but generally not for P.
  std::vector<double> non_corresponding_stationary_points() const {
    if (!(k_.H3 > 0.0)) return {};
    const double r = std::sqrt(k_.H3 / 3.0);
    return {-r, r};
  }

 private:
  DerivedConstants k_;
  double a1_, a2_, b1_, c1_, b2_, c2_;
};

/// Largest acceptable |Phi^2 - H1| at a computed root: the relative bound
/// plus what one ulp of sigma moves Phi^2 on steep stretches.
inline double residual_bound(const DualCurve& curve, double sigma, const DualTolerances& tol = {}) {
  const double ulp = std::nextafter(std::abs(sigma), std::numeric_limits<double>::infinity()) - std::abs(sigma);
  return tol.residual * std::max(1.0, curve.constants().H1) +
         2.0 * ulp * std::abs(curve.phi_squared_derivative(sigma));
}

inline Vector x_of_sigma(const ProblemSpec& spec, const DualCurve& curve, double sigma) {
  if (curve.is_pole(sigma)) throw PoleError(sigma);
  return (spec.h() / curve.sigma_tau(sigma) - spec.b0()) / spec.a0();
}

inline Vector x_of_sigma(const ProblemSpec& spec, double sigma) {
  return x_of_sigma(spec, DualCurve(spec), sigma);
}

/// Total complementary function Xi(x, sigma).
inline double eval_xi(const ProblemSpec& spec, const DualCurve& curve, const Vector& x, double sigma) {
  const double t = curve.tau(sigma);
  return eval_y1(spec, x) * sigma * t - curve.conjugate_u1(sigma) * t - curve.conjugate_u2(t) -
         spec.h().dot(x);
}

inline double eval_xi_dsigma(const ProblemSpec& spec, const DualCurve& curve, const Vector& x,
                             double sigma) {
  return curve.sigma_tau_derivative(sigma) * (eval_y1(spec, x) - (sigma - spec.b1()) / spec.a1());
}

/// Dense coefficients (degree 0..7) of Phi(sigma)^2 - H1.
inline std::vector<double> dual_polynomial_coefficients(const DualCurve& curve) {
  const auto& k = curve.constants();
  const poly::Coeffs st{0.0, -k.K * k.H3, 0.0, k.K};
  poly::Coeffs p = poly::multiply(poly::scale(poly::multiply(st, st), 2.0), {-k.H2, 1.0});
  p[0] -= k.H1;
  return p;
}

// ---------------------------------------------------------------------------
// Region partition

enum class Region { SaMinus, S1, S2, SaPlus };

inline const char* to_string(Region r) {
  switch (r) {
    case Region::SaMinus: return "S_a^-";
    case Region::S1: return "S_1";
    case Region::S2: return "S_2";
    case Region::SaPlus: return "S_a^+";
  }
  return "?";
}

/// Subregion tags. "Rising"/"Falling" are the pieces left and right of the
/// peak, where Phi^2 increases and decreases respectively.
enum class RootTag {
  SaMinusRising,   // S_a+^-
  SaMinusFalling,  // S_a-^-
  S1Rising,        // S_1+
  S1Falling,       // S_1-
  S2Rising,        // S_2+
  S2Falling,       // S_2-
  SaPlus,
  Peak,
  HZeroFamily,
};

inline const char* to_string(RootTag t) {
  switch (t) {
    case RootTag::SaMinusRising: return "S_a+^-";
    case RootTag::SaMinusFalling: return "S_a-^-";
    case RootTag::S1Rising: return "S_1+";
    case RootTag::S1Falling: return "S_1-";
    case RootTag::S2Rising: return "S_2+";
    case RootTag::S2Falling: return "S_2-";
    case RootTag::SaPlus: return "S_a^+";
    case RootTag::Peak: return "PEAK";
    case RootTag::HZeroFamily: return "H_ZERO_FAMILY";
  }
  return "?";
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;  // +inf for S_a^+
  bool contains(double s) const { return lo < s && s < hi; }
};

struct RegionPartition {
  double h2 = 0.0;
  double neg_root = 0.0;  // Re(-sqrt(H3))
  double pos_root = 0.0;  // Re(+sqrt(H3))
  std::optional<Interval> sa_minus, s1, s2;
  Interval sa_plus;
  std::optional<double> peak_flat, peak_natural, peak_sharp;

  const std::optional<Interval>& bounded(Region r) const {
    switch (r) {
      case Region::SaMinus: return sa_minus;
      case Region::S1: return s1;
      default: return s2;
    }
  }
  std::optional<double> peak(Region r) const {
    switch (r) {
      case Region::SaMinus: return peak_flat;
      case Region::S1: return peak_natural;
      case Region::S2: return peak_sharp;
      default: return std::nullopt;
    }
  }

  /// Subregion containing sigma; nullopt on a boundary, a peak, or below H2.
  std::optional<RootTag> locate(double sigma) const {
    if (sa_plus.contains(sigma)) return RootTag::SaPlus;
    constexpr std::pair<Region, std::pair<RootTag, RootTag>> pieces[] = {
        {Region::SaMinus, {RootTag::SaMinusRising, RootTag::SaMinusFalling}},
        {Region::S1, {RootTag::S1Rising, RootTag::S1Falling}},
        {Region::S2, {RootTag::S2Rising, RootTag::S2Falling}},
    };
    for (const auto& [r, tags] : pieces) {
      const auto& iv = bounded(r);
      if (!iv || !iv->contains(sigma)) continue;
      const double p = *peak(r);
      if (sigma < p) return tags.first;
      if (sigma > p) return tags.second;
      return std::nullopt;
    }
    return std::nullopt;
  }

  std::optional<Region> region_of(double sigma) const {
    if (sa_plus.contains(sigma)) return Region::SaPlus;
    for (Region r : {Region::SaMinus, Region::S1, Region::S2})
      if (bounded(r) && bounded(r)->contains(sigma)) return r;
    return std::nullopt;
  }
};

namespace detail {

// Safeguarded Newton inside (lo, hi). `before(x)` is true left of the root.
template <class F, class DF, class Before>
double bracketed_newton(F f, DF df, Before before, double lo, double hi) {
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    if (before(x)) lo = x; else hi = x;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) break;
    const double fx = f(x);
    if (fx == 0.0) return x;
    const double d = df(x);
    double next = (d != 0.0 && std::isfinite(d)) ? x - fx / d : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x) break;
    x = next;
  }
  return x;
}

// Picks the double within a few ulps of x that minimizes |f|.
template <class F>
double ulp_polish(F f, double x, int reach = 16) {
  double best = x, best_val = std::abs(f(x));
  double up = x, down = x;
  for (int i = 0; i < reach; ++i) {
    up = std::nextafter(up, std::numeric_limits<double>::infinity());
    down = std::nextafter(down, -std::numeric_limits<double>::infinity());
    for (double c : {up, down}) {
      const double v = std::abs(f(c));
      if (v < best_val) {
        best = c;
        best_val = v;
      }
    }
  }
  return best;
}

}  // namespace detail

inline RegionPartition region_partition(const DualCurve& curve) {
  const auto& k = curve.constants();
  RegionPartition rp;
  const double rs = k.H3 > 0.0 ? std::sqrt(k.H3) : 0.0;
  rp.h2 = k.H2;
  rp.neg_root = -rs;
  rp.pos_root = rs;
  if (k.H2 < -rs) rp.sa_minus = Interval{k.H2, -rs};
  if (-rs < 0.0 && k.H2 < 0.0) rp.s1 = Interval{std::max(k.H2, -rs), 0.0};
  if (0.0 < rs && k.H2 < rs) rp.s2 = Interval{std::max(k.H2, 0.0), rs};
  rp.sa_plus = Interval{std::max(k.H2, rs), std::numeric_limits<double>::infinity()};

  // Sign of sigma*tau inside each bounded region; Phi^2 rises while
  // sigma*tau*Q > 0.
  auto locate_peak = [&](const Interval& iv, double st_sign) {
    auto q = [&](double s) { return curve.q(s); };
    auto dq = [&](double s) { return curve.q_derivative(s); };
    auto before = [&](double s) { return st_sign * curve.q(s) > 0.0; };
    return detail::bracketed_newton(q, dq, before, iv.lo, iv.hi);
  };
  if (rp.sa_minus) rp.peak_flat = locate_peak(*rp.sa_minus, -1.0);
  if (rp.s1) rp.peak_natural = locate_peak(*rp.s1, +1.0);
  if (rp.s2) rp.peak_sharp = locate_peak(*rp.s2, -1.0);
  return rp;
}

struct PeakMagnitude {
  Region region = Region::SaMinus;
  double sigma = 0.0;
  double phi_squared = 0.0;
  double magnitude() const { return std::sqrt(phi_squared); }
};

inline std::vector<PeakMagnitude> peak_magnitudes(const DualCurve& curve, const RegionPartition& rp) {
  std::vector<PeakMagnitude> out;
  for (Region r : {Region::SaMinus, Region::S1, Region::S2})
    if (auto p = rp.peak(r)) out.push_back({r, *p, curve.phi_squared(*p)});
  return out;
}

// ---------------------------------------------------------------------------
// Dual algebraic equation

struct DualRoot {
  double sigma = 0.0;
  RootTag tag = RootTag::SaPlus;
  double residual = 0.0;
  std::optional<Region> region;
};

namespace detail {

inline void sort_and_dedup(std::vector<DualRoot>& roots, double tol) {
  std::sort(roots.begin(), roots.end(),
            [](const DualRoot& a, const DualRoot& b) { return a.sigma > b.sigma; });
  std::vector<DualRoot> out;
  for (const auto& r : roots) {
    if (!out.empty() && std::abs(out.back().sigma - r.sigma) <= tol * std::max(1.0, std::abs(r.sigma))) {
      if (r.tag == RootTag::Peak) out.back() = r;
      continue;
    }
    out.push_back(r);
  }
  roots = std::move(out);
}

}  // namespace detail

/// Every real solution of Phi(sigma)^2 = H1, sorted by decreasing sigma.
///
/// For H1 > 0 each monotone piece of Phi^2 is bracketed and searched
/// separately, so a region contributes two roots, one root at its peak, or
/// none. For H1 = 0 the solutions are the factor roots {0, +-sqrt(H3), H2}
/// restricted to sigma >= H2.
inline std::vector<DualRoot> solve_dual_equation(const DualCurve& curve, const RegionPartition& rp,
                                                 const DualTolerances& tol = {}) {
  const auto& k = curve.constants();
  std::vector<DualRoot> roots;
  auto residual = [&](double s) { return std::abs(curve.phi_squared(s) - k.H1); };

  if (k.H1 == 0.0) {
    std::vector<double> family{k.H2, 0.0};
    if (k.H3 >= 0.0) {
      family.push_back(std::sqrt(k.H3));
      family.push_back(-std::sqrt(k.H3));
    }
    for (double s : family)
      if (s >= k.H2) roots.push_back({s, RootTag::HZeroFamily, residual(s), rp.region_of(s)});
    detail::sort_and_dedup(roots, tol.dedup);
    return roots;
  }

  const double res_tol = tol.residual * std::max(1.0, k.H1);
  auto f = [&](double s) { return curve.phi_squared(s) - k.H1; };
  auto df = [&](double s) { return curve.phi_squared_derivative(s); };
  auto solve_piece = [&](double lo, double hi, bool rising) {
    auto before = [&](double s) { return rising ? f(s) < 0.0 : f(s) > 0.0; };
    const double s = detail::bracketed_newton(f, df, before, lo, hi);
    const double polished = detail::ulp_polish(f, s);
    return (polished > lo && polished < hi) ? polished : s;
  };
  auto peak_tagged = [&](double s) {
    return std::abs(curve.q(s)) <= tol.peak_q * std::max(1.0, std::abs(s * s * s));
  };

  constexpr std::pair<Region, std::pair<RootTag, RootTag>> pieces[] = {
      {Region::SaMinus, {RootTag::SaMinusRising, RootTag::SaMinusFalling}},
      {Region::S1, {RootTag::S1Rising, RootTag::S1Falling}},
      {Region::S2, {RootTag::S2Rising, RootTag::S2Falling}},
  };
  for (const auto& [region, tags] : pieces) {
    const auto& iv = rp.bounded(region);
    if (!iv) continue;
    const double peak = *rp.peak(region);
    const double excess = curve.phi_squared(peak) - k.H1;
    if (std::abs(excess) <= res_tol) {
      roots.push_back({peak, RootTag::Peak, residual(peak), region});
    } else if (excess > 0.0) {
      const double left = solve_piece(iv->lo, peak, true);
      const double right = solve_piece(peak, iv->hi, false);
      roots.push_back({left, peak_tagged(left) ? RootTag::Peak : tags.first, residual(left), region});
      roots.push_back({right, peak_tagged(right) ? RootTag::Peak : tags.second, residual(right), region});
    }
  }

  // S_a^+: Phi^2 increases from 0 without bound.
  double lo = rp.sa_plus.lo;
  double hi = std::max(1.0, 2.0 * std::abs(lo)) + std::abs(lo);
  while (f(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  const double top = solve_piece(lo, hi, true);
  roots.push_back({top, RootTag::SaPlus, residual(top), Region::SaPlus});

  detail::sort_and_dedup(roots, tol.dedup);
  return roots;
}

}  // namespace cdual
