#pragma once

// Sampled curves for plotting: P^d, Phi^2 and Q over a sigma range, P over an
// x range (n = 1), and the annotated critical points. CSV with '#' headers.

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "cdual/classifier.hpp"
#include "cdual/instance_io.hpp"
#include "cdual/report.hpp"

namespace cdual::io {

struct DualSample {
  double sigma = 0.0;
  double dual_value = 0.0;
  double phi_squared = 0.0;
  double q_value = 0.0;
};

struct DualCurveSamples {
  std::vector<DualSample> rows;  // strictly increasing sigma
  std::vector<double> omitted;   // grid points that landed on a pole
};

struct PrimalSample {
  double x = 0.0;
  double primal_value = 0.0;
};

/// [H2 - 1, Re(sqrt(H3)) + max(3, 3|H2|)].
inline std::pair<double, double> default_sigma_range(const DerivedConstants& k) {
  const double rs = k.H3 > 0.0 ? std::sqrt(k.H3) : 0.0;
  return {k.H2 - 1.0, rs + std::max(3.0, 3.0 * std::abs(k.H2))};
}

inline void check_range(const char* field, double lo, double hi, int samples) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw InputError(field, "range bounds must be finite");
  if (!(lo < hi)) throw InputError(field, "range is empty (min >= max)");
  if (samples < 2) throw InputError("samples", "need at least 2 samples");
}

/// Uniform grid plus the features of the curve: H2, the peaks, the dual
/// roots and +-sqrt(H3/3). Poles (0, +-sqrt(H3)) are replaced by points just
/// beside them.
inline DualCurveSamples sample_dual_curve(const SolutionReport& rep, double lo, double hi, int samples) {
  check_range("sigma", lo, hi, samples);
  const DualCurve curve(rep.spec);
  const auto& k = rep.constants;

  std::vector<double> grid;
  grid.reserve(samples + 16);
  for (int i = 0; i < samples; ++i) grid.push_back(lo + (hi - lo) * i / (samples - 1));
  grid.back() = hi;

  std::vector<double> features{k.H2};
  for (double s : curve.non_corresponding_stationary_points()) features.push_back(s);
  for (const auto& p : rep.peaks) features.push_back(p.sigma);
  for (const auto& r : rep.roots) features.push_back(r.sigma);
  std::vector<double> poles{0.0};
  if (k.H3 > 0.0) {
    poles.push_back(std::sqrt(k.H3));
    poles.push_back(-std::sqrt(k.H3));
  }
  for (double m : poles) {
    const double d = 1e-6 * std::max(1.0, std::abs(m));
    features.push_back(m - d);
    features.push_back(m + d);
  }
  for (double s : features)
    if (s >= lo && s <= hi) grid.push_back(s);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  DualCurveSamples out;
  for (double s : grid) {
    if (curve.is_pole(s)) {
      out.omitted.push_back(s);
      continue;
    }
    out.rows.push_back({s, curve.dual_value(s), curve.phi_squared(s), curve.q(s)});
  }
  return out;
}

/// x range covering every critical point with a margin.
inline std::pair<double, double> default_x_range(const SolutionReport& rep) {
  std::vector<double> xs;
  for (const auto& p : rep.points) xs.push_back(p.x(0));
  for (const auto& m : rep.manifolds)
    for (const auto& x : m.points) xs.push_back(x(0));
  if (xs.empty()) return {-1.0, 1.0};
  const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
  const double margin = std::max(1.0, 0.25 * (*mx - *mn));
  return {*mn - margin, *mx + margin};
}

inline std::vector<PrimalSample> sample_primal_curve(const SolutionReport& rep, double lo, double hi, int samples) {
  if (rep.spec.n() != 1) throw std::invalid_argument("primal curve requires n = 1");
  check_range("x", lo, hi, samples);
  std::vector<PrimalSample> out;
  out.reserve(samples);
  for (int i = 0; i < samples; ++i) {
    const double x = i + 1 == samples ? hi : lo + (hi - lo) * i / (samples - 1);
    out.push_back({x, eval_P(rep.spec, scalar_vector(x))});
  }
  return out;
}

inline void write_curve_header(std::ostream& os, const SolutionReport& rep, const char* kind) {
  const auto& k = rep.constants;
  os << "# kind: " << kind << '\n'
     << "# instance_hash: " << instance_hash(rep.spec) << '\n'
     << "# H1=" << fmt(k.H1) << " H2=" << fmt(k.H2) << " H3=" << fmt(k.H3) << " H4=" << fmt(k.H4) << '\n';
}

inline void write_dual_curve(std::ostream& os, const SolutionReport& rep, const DualCurveSamples& s) {
  write_curve_header(os, rep, "dual_curve");
  os << "# omitted_poles:";
  for (double p : s.omitted) os << ' ' << fmt(p);
  os << (s.omitted.empty() ? " none\n" : "\n");
  os << "sigma,dual_value,phi_squared,q_value\n";
  for (const auto& r : s.rows)
    os << fmt(r.sigma) << ',' << fmt(r.dual_value) << ',' << fmt(r.phi_squared) << ',' << fmt(r.q_value) << '\n';
}

inline void write_primal_curve(std::ostream& os, const SolutionReport& rep, const std::vector<PrimalSample>& s) {
  write_curve_header(os, rep, "primal_curve");
  os << "x,primal_value\n";
  for (const auto& r : s) os << fmt(r.x) << ',' << fmt(r.primal_value) << '\n';
}

/// One row per corresponding critical point: sigma, x components, P, P^d,
/// label. For h = 0 the rows are the members of each solution set (n = 1) or
/// one representative point per sphere.
inline void write_annotations(std::ostream& os, const SolutionReport& rep) {
  const int n = rep.spec.n();
  write_curve_header(os, rep, "annotations");
  os << "sigma";
  if (n == 1) os << ",x";
  else for (int i = 1; i <= n; ++i) os << ",x" << i;
  os << ",primal_value,dual_value,label\n";
  auto row = [&](double sigma, const Vector& x, double pv, double dv, const std::string& label) {
    os << fmt(sigma);
    for (int i = 0; i < n; ++i) os << ',' << fmt(x(i));
    os << ',' << fmt(pv) << ',' << fmt(dv) << ',' << label << '\n';
  };
  for (const auto& p : rep.points) row(p.sigma, p.x, p.primal_value, p.dual_value, to_string(p.label));
  for (const auto& m : rep.manifolds) {
    std::vector<Vector> members = m.points;
    if (n > 1) {
      Vector x = m.geometry.center;
      x(0) += std::sqrt(m.geometry.radius_squared);
      members.push_back(std::move(x));
    }
    for (const auto& x : members) {
      std::string label = m.is_global_min ? "GLOBAL_MIN" : "CRITICAL_SPHERE";
      if (n == 1 && !m.is_global_min)
        label = to_string(label_from_spectrum(hessian(rep.spec, x).diagonal(), 1e-7));
      // P^d has a removable singularity on these levels; its limit is the primal value.
      row(m.level_sigma, x, eval_P(rep.spec, x), m.primal_value, label);
    }
  }
}

}  // namespace cdual::io
