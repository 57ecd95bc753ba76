#pragma once

// Turns dual roots into a labeled inventory of primal critical points, and
// handles the h = 0 case where critical points form spheres in x.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "cdual/canonical_dual.hpp"
#include "cdual/polynomial_core.hpp"

namespace cdual {

enum class Label { GlobalMin, LocalMin, LocalMax, Inflection, UnclassifiedSaddle };

inline const char* to_string(Label l) {
  switch (l) {
    case Label::GlobalMin: return "GLOBAL_MIN";
    case Label::LocalMin: return "LOCAL_MIN";
    case Label::LocalMax: return "LOCAL_MAX";
    case Label::Inflection: return "INFLECTION";
    case Label::UnclassifiedSaddle: return "UNCLASSIFIED_SADDLE";
  }
  return "?";
}

struct CriticalPoint {
  Vector x;
  double sigma = 0.0;
  RootTag tag = RootTag::SaPlus;
  std::optional<Region> region;
  Label label = Label::UnclassifiedSaddle;
  // Set when the label comes from the Hessian spectrum rather than from the
  // dual region structure (n >= 2, points outside S_a^+).
  bool label_advisory = false;
  Vector hessian_eigenvalues;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  double gradient_norm = 0.0;
  double gradient_scale = 1.0;
};

struct SphereGeometry {
  Vector center;
  double radius_squared = 0.0;
};

struct ManifoldSolution {
  std::string level_name;
  double level_sigma = 0.0;
  double y1_level = 0.0;
  SphereGeometry geometry;
  double primal_value = 0.0;
  bool is_global_min = false;
  std::vector<Vector> points;  // n = 1 only: the (at most two) members
};

struct ClassifierTolerances {
  double gap = 1e-7;         // relative to max(1, |P|)
  double stationarity = 1e-6;  // relative to stationarity_scale
  double eigen_zero = 1e-7;  // relative to max(1, max |lambda|)
};

inline std::vector<CriticalPoint> recover_critical_points(const ProblemSpec& spec, const DualCurve& curve,
                                                          const std::vector<DualRoot>& roots) {
  if (!(curve.constants().H1 > 0.0))
    throw std::invalid_argument("recover_critical_points requires h != 0");
  std::vector<CriticalPoint> out;
  out.reserve(roots.size());
  for (const auto& r : roots) {
    CriticalPoint cp;
    cp.sigma = r.sigma;
    cp.tag = r.tag;
    cp.region = r.region;
    cp.x = x_of_sigma(spec, curve, r.sigma);
    cp.primal_value = eval_P(spec, cp.x);
    cp.dual_value = curve.dual_value(r.sigma);
    cp.gap = std::abs(cp.primal_value - cp.dual_value);
    cp.gradient_norm = gradient(spec, cp.x).norm();
    cp.gradient_scale = stationarity_scale(spec, cp.x);
    cp.hessian_eigenvalues = second_derivative_structure(spec, cp.x).eigenvalues();
    out.push_back(std::move(cp));
  }
  return out;
}

inline Label label_from_tag(RootTag tag) {
  switch (tag) {
    case RootTag::SaMinusRising:
    case RootTag::S1Falling:
    case RootTag::S2Rising: return Label::LocalMax;
    case RootTag::SaMinusFalling:
    case RootTag::S1Rising:
    case RootTag::S2Falling: return Label::LocalMin;
    case RootTag::SaPlus: return Label::GlobalMin;
    case RootTag::Peak: return Label::Inflection;
    case RootTag::HZeroFamily: break;
  }
  return Label::UnclassifiedSaddle;
}

/// n = 1: the label follows from the subregion holding sigma.
inline void classify_1d(const ProblemSpec& spec, std::vector<CriticalPoint>& points) {
  if (spec.n() != 1) throw std::invalid_argument("classify_1d requires n = 1");
  for (auto& p : points) {
    p.label = label_from_tag(p.tag);
    p.label_advisory = false;
  }
}

inline Label label_from_spectrum(const Vector& eigenvalues, double zero_tol) {
  const double big = std::max(1.0, eigenvalues.cwiseAbs().maxCoeff());
  bool pos = false, neg = false;
  for (double ev : eigenvalues) {
    if (std::abs(ev) <= zero_tol * big) return Label::Inflection;
    (ev > 0.0 ? pos : neg) = true;
  }
  if (pos && !neg) return Label::LocalMin;
  if (neg && !pos) return Label::LocalMax;
  return Label::UnclassifiedSaddle;
}

/// n >= 2: the S_a^+ point is the global minimizer; every other point is
/// labeled from a numeric eigen-decomposition of the Hessian.
inline void classify_nd(const ProblemSpec& spec, std::vector<CriticalPoint>& points,
                        const ClassifierTolerances& tol = {}) {
  for (auto& p : points) {
    if (p.tag == RootTag::SaPlus) {
      p.label = Label::GlobalMin;
      p.label_advisory = false;
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(hessian(spec, p.x), Eigen::EigenvaluesOnly);
    p.hessian_eigenvalues = es.eigenvalues();
    p.label = label_from_spectrum(p.hessian_eigenvalues, tol.eigen_zero);
    p.label_advisory = true;
  }
}

struct SuppressedFamily {
  std::string level_name;
  double level_sigma = 0.0;
  std::string reason;
};

struct HZeroSolution {
  std::vector<ManifoldSolution> manifolds;
  std::vector<SuppressedFamily> suppressed;
};

/// h = 0: critical points are the level sets a1 y1 + b1 = sigma for sigma in
/// {0, H2, +sqrt(H3), -sqrt(H3)}, each a sphere around -b0/a0.
inline HZeroSolution solve_h_zero(const ProblemSpec& spec) {
  if (!spec.h_is_zero()) throw std::invalid_argument("solve_h_zero requires h = 0");
  const DerivedConstants k = derived_constants(spec);
  const double base = k.H4;
  const double scale = spec.a2() / (8.0 * spec.a1() * spec.a1());

  struct Candidate {
    const char* name;
    double sigma;
    double value;
    bool global;
  };
  std::vector<Candidate> candidates;
  if (k.H3 >= 0.0) {
    candidates.push_back({"+sqrt(H3)", std::sqrt(k.H3), base, true});
    candidates.push_back({"-sqrt(H3)", -std::sqrt(k.H3), base, true});
  }
  candidates.push_back({"zero", 0.0, base + scale * k.H3 * k.H3, false});
  candidates.push_back({"H2", k.H2, base + scale * (k.H2 * k.H2 - k.H3) * (k.H2 * k.H2 - k.H3), false});

  HZeroSolution out;
  const Vector center = -spec.b0() / spec.a0();
  const double center_sq = spec.b0().squaredNorm() / (spec.a0() * spec.a0());
  for (const auto& c : candidates) {
    const bool duplicate = std::any_of(out.manifolds.begin(), out.manifolds.end(),
                                       [&](const ManifoldSolution& m) { return m.level_sigma == c.sigma; });
    if (duplicate) {
      out.suppressed.push_back({c.name, c.sigma, "coincides with an earlier level"});
      continue;
    }
    if (c.sigma < k.H2) {
      out.suppressed.push_back({c.name, c.sigma, "sigma < H2"});
      continue;
    }
    ManifoldSolution m;
    m.level_name = c.name;
    m.level_sigma = c.sigma;
    m.y1_level = (c.sigma - spec.b1()) / spec.a1();
    double r2 = 2.0 * (m.y1_level - spec.c0()) / spec.a0() + center_sq;
    if (c.sigma == k.H2 || (r2 < 0.0 && r2 >= -1e-12 * std::max(1.0, center_sq))) r2 = 0.0;
    if (r2 < 0.0) {
      out.suppressed.push_back({c.name, c.sigma, "radius_squared < 0"});
      continue;
    }
    m.geometry = {center, r2};
    m.primal_value = c.value;
    m.is_global_min = c.global;
    if (spec.n() == 1) {
      const double r = std::sqrt(r2);
      m.points.push_back(scalar_vector(center(0) - r));
      if (r > 0.0) m.points.push_back(scalar_vector(center(0) + r));
    }
    out.manifolds.push_back(std::move(m));
  }
  return out;
}

struct CountResult {
  int count = 0;                    // distinct critical points
  int count_with_multiplicity = 0;  // degenerate (inflection) points counted twice
  std::string case_label;
};

/// Number of critical points of P for n = 1, from the constants and the peak
/// magnitudes of Phi^2 alone.
inline CountResult count_critical_points(const DerivedConstants& k, const RegionPartition& rp,
                                         const std::vector<PeakMagnitude>& peaks,
                                         const DualTolerances& tol = {}) {
  CountResult out;
  if (k.H1 == 0.0) {
    std::vector<double> levels{0.0};
    if (k.H3 >= 0.0) {
      levels.push_back(std::sqrt(k.H3));
      levels.push_back(-std::sqrt(k.H3));
    }
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    const auto above = std::count_if(levels.begin(), levels.end(), [&](double s) { return s > k.H2; });
    out.count = out.count_with_multiplicity = 1 + 2 * static_cast<int>(above);
    const double rs = rp.pos_root;
    if (k.H2 < -rs && -rs < 0.0) out.case_label = "H2 < Re(-sqrt(H3)) < 0";
    else if (-rs <= k.H2 && k.H2 < 0.0 && rs > 0.0) out.case_label = "Re(-sqrt(H3)) <= H2 < 0";
    else if (0.0 <= k.H2 && k.H2 < rs) out.case_label = "0 <= H2 < Re(sqrt(H3))";
    else if (k.H2 < 0.0 && rs == 0.0) out.case_label = "H2 < 0 = Re(sqrt(H3))";
    else if (rs < k.H2) out.case_label = "0 <= Re(sqrt(H3)) < H2";
    else out.case_label = "H2 = Re(sqrt(H3)) (boundary; counting formula)";
    return out;
  }

  const double res_tol = tol.residual * std::max(1.0, k.H1);
  int cleared = 0, touched = 0;
  for (const auto& p : peaks) {
    const double excess = p.phi_squared - k.H1;
    if (std::abs(excess) <= res_tol) ++touched;
    else if (excess > 0.0) ++cleared;
  }
  out.count = 1 + 2 * cleared + touched;
  out.count_with_multiplicity = 1 + 2 * (cleared + touched);
  const int m = static_cast<int>(peaks.size());
  if (m == 0) out.case_label = "no bounded regions; single point in S_a^+";
  else if (cleared == m) out.case_label = "H1 below all peak magnitudes";
  else if (cleared + touched == 0) out.case_label = "H1 above all peak magnitudes";
  else out.case_label = "H1 below " + std::to_string(cleared + touched) + " of " + std::to_string(m) + " peak magnitudes";
  if (touched > 0) out.case_label += "; H1 equals " + std::to_string(touched) + " peak magnitude(s) (inflection)";
  return out;
}

/// A stationary point of P^d that is not a solution of the dual equation.
struct NonCorrespondingPoint {
  double sigma = 0.0;
  double dual_value = 0.0;
  double dual_derivative = 0.0;
  Vector x;
  double gradient_norm = 0.0;
  double gradient_scale = 1.0;
};

inline std::vector<NonCorrespondingPoint> non_corresponding_points(const ProblemSpec& spec,
                                                                   const DualCurve& curve) {
  std::vector<NonCorrespondingPoint> out;
  for (double s : curve.non_corresponding_stationary_points()) {
    if (curve.is_pole(s)) continue;
    NonCorrespondingPoint p;
    p.sigma = s;
    p.dual_value = curve.dual_value(s);
    p.dual_derivative = curve.dual_derivative(s);
    p.x = x_of_sigma(spec, curve, s);
    p.gradient_norm = gradient(spec, p.x).norm();
    p.gradient_scale = stationarity_scale(spec, p.x);
    out.push_back(std::move(p));
  }
  return out;
}

struct Verification {
  double max_gap = 0.0;
  double max_relative_gap = 0.0;
  double max_gradient_ratio = 0.0;
  double max_residual_ratio = 0.0;  // residual / residual_bound
  bool gap_ok = true;
  bool stationarity_ok = true;
  bool residual_ok = true;
  bool ok() const { return gap_ok && stationarity_ok && residual_ok; }
};

struct SolutionReport {
  ProblemSpec spec;
  DerivedConstants constants;
  RegionPartition partition;
  std::vector<PeakMagnitude> peaks;
  std::vector<DualRoot> roots;
  std::vector<CriticalPoint> points;
  std::vector<ManifoldSolution> manifolds;
  CountResult count;
  std::optional<std::size_t> global_min_index;  // into points
  double global_min_value = 0.0;
  std::vector<NonCorrespondingPoint> non_corresponding;
  std::vector<std::string> rationale;
  Verification verification;
};

/// Full pipeline for one instance.
inline SolutionReport solve(const ProblemSpec& spec, const DualTolerances& dtol = {},
                            const ClassifierTolerances& ctol = {}) {
  const DualCurve curve(spec);
  SolutionReport rep{spec, curve.constants(), region_partition(curve), {}, {}, {}, {}, {}, {}, 0.0, {}, {}, {}};
  rep.peaks = peak_magnitudes(curve, rep.partition);
  rep.roots = solve_dual_equation(curve, rep.partition, dtol);
  rep.count = count_critical_points(rep.constants, rep.partition, rep.peaks, dtol);
  // For h = 0, x(sigma) is the constant center, so there is nothing to flag.
  if (rep.constants.H1 > 0.0) rep.non_corresponding = non_corresponding_points(spec, curve);
  auto& v = rep.verification;
  for (const auto& r : rep.roots)
    v.max_residual_ratio = std::max(v.max_residual_ratio, r.residual / residual_bound(curve, r.sigma, dtol));
  v.residual_ok = v.max_residual_ratio <= 1.0;

  if (rep.constants.H1 > 0.0) {
    rep.points = recover_critical_points(spec, curve, rep.roots);
    if (spec.n() == 1) classify_1d(spec, rep.points);
    else classify_nd(spec, rep.points, ctol);
    for (std::size_t i = 0; i < rep.points.size(); ++i) {
      const auto& p = rep.points[i];
      if (p.label == Label::GlobalMin) {
        rep.global_min_index = i;
        rep.global_min_value = p.primal_value;
      }
      v.max_gap = std::max(v.max_gap, p.gap);
      v.max_relative_gap = std::max(v.max_relative_gap, p.gap / std::max(1.0, std::abs(p.primal_value)));
      v.max_gradient_ratio = std::max(v.max_gradient_ratio, p.gradient_norm / p.gradient_scale);
    }
  } else {
    HZeroSolution hz = solve_h_zero(spec);
    rep.manifolds = std::move(hz.manifolds);
    for (const auto& s : hz.suppressed)
      rep.rationale.push_back("family " + s.level_name + " (sigma = " + std::to_string(s.level_sigma) +
                              ") suppressed: " + s.reason);
    if (spec.n() >= 2) {
      rep.count.count = rep.count.count_with_multiplicity = static_cast<int>(rep.manifolds.size());
      rep.count.case_label += "; n >= 2: count is the number of solution spheres";
    }
    bool first = true;
    for (const auto& m : rep.manifolds) {
      if (m.is_global_min && (first || m.primal_value < rep.global_min_value)) {
        rep.global_min_value = m.primal_value;
        first = false;
      }
      // Probe the sphere along the coordinate axes.
      const double r = std::sqrt(m.geometry.radius_squared);
      for (int i = 0; i < spec.n(); ++i) {
        for (double sign : {-1.0, 1.0}) {
          Vector x = m.geometry.center;
          x(i) += sign * r;
          const double val = eval_P(spec, x);
          v.max_gap = std::max(v.max_gap, std::abs(val - m.primal_value));
          v.max_relative_gap =
              std::max(v.max_relative_gap, std::abs(val - m.primal_value) / std::max(1.0, std::abs(val)));
          v.max_gradient_ratio =
              std::max(v.max_gradient_ratio, gradient(spec, x).norm() / stationarity_scale(spec, x));
        }
      }
    }
  }
  v.gap_ok = v.max_relative_gap <= ctol.gap;
  v.stationarity_ok = v.max_gradient_ratio <= ctol.stationarity;
  return rep;
}

}  // namespace cdual
