#pragma once

// SolutionReport serialization: a JSON document (numbers written with the
// shortest round-trip representation) and an aligned plain-text table.

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cdual/classifier.hpp"
#include "cdual/instance_io.hpp"

namespace cdual::io {

/// 12 significant digits, the precision of every human-facing number.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string fmt(const Vector& v) {
  std::string s = "[";
  for (int i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v(i));
  return s + "]";
}

namespace detail {

inline json interval_json(const std::optional<Interval>& iv) {
  if (!iv) return nullptr;
  json hi = std::isfinite(iv->hi) ? json(iv->hi) : json(nullptr);
  return json{{"lo", iv->lo}, {"hi", hi}};
}

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline const char* peak_name(Region r) {
  switch (r) {
    case Region::SaMinus: return "flat";
    case Region::S1: return "natural";
    case Region::S2: return "sharp";
    default: return "";
  }
}

}  // namespace detail

inline json constants_json(const DerivedConstants& k) {
  return json{{"H1", k.H1}, {"H2", k.H2}, {"H3", k.H3}, {"H4", k.H4}, {"K", k.K}};
}

inline json regions_json(const RegionPartition& rp) {
  return json{{"H2", rp.h2},
              {"neg_root", rp.neg_root},
              {"pos_root", rp.pos_root},
              {"S_a^-", detail::interval_json(rp.sa_minus)},
              {"S_1", detail::interval_json(rp.s1)},
              {"S_2", detail::interval_json(rp.s2)},
              {"S_a^+", detail::interval_json(rp.sa_plus)}};
}

inline json report_json(const SolutionReport& rep) {
  json doc;
  doc["instance"] = instance_json(rep.spec);
  doc["instance_hash"] = instance_hash(rep.spec);
  doc["constants"] = constants_json(rep.constants);
  doc["regions"] = regions_json(rep.partition);

  json peaks = json::array();
  for (const auto& p : rep.peaks)
    peaks.push_back({{"name", detail::peak_name(p.region)},
                     {"region", to_string(p.region)},
                     {"sigma", p.sigma},
                     {"phi_squared", p.phi_squared},
                     {"magnitude", p.magnitude()}});
  doc["peaks"] = std::move(peaks);

  json roots = json::array();
  for (const auto& r : rep.roots)
    roots.push_back({{"sigma", r.sigma},
                     {"tag", to_string(r.tag)},
                     {"residual", r.residual},
                     {"region", r.region ? json(to_string(*r.region)) : json(nullptr)}});
  doc["roots"] = std::move(roots);

  json points = json::array();
  for (const auto& p : rep.points)
    points.push_back({{"x", vector_json(p.x)},
                      {"sigma", p.sigma},
                      {"tag", to_string(p.tag)},
                      {"label", to_string(p.label)},
                      {"label_advisory", p.label_advisory},
                      {"primal_value", p.primal_value},
                      {"dual_value", p.dual_value},
                      {"gap", p.gap},
                      {"gradient_norm", p.gradient_norm},
                      {"gradient_scale", p.gradient_scale},
                      {"hessian_eigenvalues", vector_json(p.hessian_eigenvalues)}});
  doc["points"] = std::move(points);

  json manifolds = json::array();
  for (const auto& m : rep.manifolds) {
    json pts = json::array();
    for (const auto& x : m.points) pts.push_back(vector_json(x));
    manifolds.push_back({{"level", m.level_name},
                         {"sigma", m.level_sigma},
                         {"y1_level", m.y1_level},
                         {"center", vector_json(m.geometry.center)},
                         {"radius_squared", m.geometry.radius_squared},
                         {"primal_value", m.primal_value},
                         {"is_global_min", m.is_global_min},
                         {"points", std::move(pts)}});
  }
  doc["manifolds"] = std::move(manifolds);

  doc["count"] = {{"distinct", rep.count.count},
                  {"with_multiplicity", rep.count.count_with_multiplicity},
                  {"case", rep.count.case_label}};

  if (rep.global_min_index) {
    const auto& p = rep.points[*rep.global_min_index];
    doc["global_min"] = {{"value", rep.global_min_value}, {"x", vector_json(p.x)}, {"sigma", p.sigma},
                         {"point_index", *rep.global_min_index}};
  } else if (!rep.manifolds.empty()) {
    json levels = json::array();
    for (const auto& m : rep.manifolds)
      if (m.is_global_min) levels.push_back(m.level_name);
    doc["global_min"] = {{"value", rep.global_min_value}, {"manifolds", std::move(levels)}};
  } else {
    doc["global_min"] = nullptr;
  }

  json nc = json::array();
  for (const auto& p : rep.non_corresponding)
    nc.push_back({{"sigma", p.sigma},
                  {"dual_value", p.dual_value},
                  {"dual_derivative", p.dual_derivative},
                  {"x", vector_json(p.x)},
                  {"gradient_norm", p.gradient_norm},
                  {"gradient_scale", p.gradient_scale}});
  doc["non_corresponding"] = std::move(nc);
  doc["rationale"] = rep.rationale;

  const auto& v = rep.verification;
  doc["verification"] = {{"max_gap", v.max_gap},
                         {"max_relative_gap", v.max_relative_gap},
                         {"max_gradient_ratio", v.max_gradient_ratio},
                         {"max_residual_ratio", v.max_residual_ratio},
                         {"gap_ok", v.gap_ok},
                         {"stationarity_ok", v.stationarity_ok},
                         {"residual_ok", v.residual_ok},
                         {"ok", v.ok()}};
  return doc;
}

namespace detail {

// Left-aligned columns, widths from the longest cell.
inline void print_table(std::ostream& os, const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return;
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      line += r[i];
      if (i + 1 < r.size()) line += std::string(width[i] - r[i].size() + 2, ' ');
    }
    os << line << '\n';
  }
}

}  // namespace detail

inline void print_report(std::ostream& os, const SolutionReport& rep) {
  const auto& k = rep.constants;
  os << "instance " << instance_hash(rep.spec) << "  n = " << rep.spec.n() << '\n';
  os << "H1 = " << fmt(k.H1) << "  H2 = " << fmt(k.H2) << "  H3 = " << fmt(k.H3) << "  H4 = " << fmt(k.H4)
     << "  K = " << fmt(k.K) << "\n\n";

  os << "regions\n";
  const auto& rp = rep.partition;
  auto iv = [](const std::optional<Interval>& r) {
    if (!r) return std::string("empty");
    return "(" + fmt(r->lo) + ", " + (std::isfinite(r->hi) ? fmt(r->hi) : std::string("inf")) + ")";
  };
  detail::print_table(os, {{"  S_a^-", iv(rp.sa_minus)},
                           {"  S_1", iv(rp.s1)},
                           {"  S_2", iv(rp.s2)},
                           {"  S_a^+", iv(rp.sa_plus)}});

  if (!rep.peaks.empty()) {
    os << "\npeaks\n";
    std::vector<std::vector<std::string>> rows{{"  name", "sigma", "Phi^2", "|Phi|"}};
    for (const auto& p : rep.peaks)
      rows.push_back({std::string("  ") + detail::peak_name(p.region), fmt(p.sigma), fmt(p.phi_squared),
                      fmt(p.magnitude())});
    detail::print_table(os, rows);
  }

  if (!rep.points.empty()) {
    os << "\ncritical points\n";
    std::vector<std::vector<std::string>> rows{{"  sigma", "tag", "x", "P(x)", "P^d(sigma)", "label"}};
    for (const auto& p : rep.points)
      rows.push_back({"  " + fmt(p.sigma), to_string(p.tag), fmt(p.x), fmt(p.primal_value), fmt(p.dual_value),
                      std::string(to_string(p.label)) + (p.label_advisory ? " (hessian)" : "")});
    detail::print_table(os, rows);
  }

  if (!rep.manifolds.empty()) {
    os << "\nsolution spheres\n";
    std::vector<std::vector<std::string>> rows{{"  level", "sigma", "radius^2", "P", "global"}};
    for (const auto& m : rep.manifolds)
      rows.push_back({"  " + m.level_name, fmt(m.level_sigma), fmt(m.geometry.radius_squared),
                      fmt(m.primal_value), m.is_global_min ? "yes" : "no"});
    detail::print_table(os, rows);
    os << "  center " << fmt(rep.manifolds.front().geometry.center) << '\n';
  }

  os << "\ncount " << rep.count.count;
  if (rep.count.count_with_multiplicity != rep.count.count)
    os << " (" << rep.count.count_with_multiplicity << " with multiplicity)";
  os << "  case: " << rep.count.case_label << '\n';

  if (rep.global_min_index) {
    const auto& p = rep.points[*rep.global_min_index];
    os << "global min P = " << fmt(rep.global_min_value) << " at x = " << fmt(p.x) << '\n';
  } else if (!rep.manifolds.empty()) {
    os << "global min P = " << fmt(rep.global_min_value) << " on the +-sqrt(H3) spheres\n";
  }

  for (const auto& p : rep.non_corresponding)
    os << "non-corresponding stationary point of P^d at sigma = " << fmt(p.sigma)
       << " (|grad P(x(sigma))| / scale = " << fmt(p.gradient_norm / p.gradient_scale) << ")\n";
  for (const auto& r : rep.rationale) os << "note: " << r << '\n';

  const auto& v = rep.verification;
  os << "verification: max relative gap " << fmt(v.max_relative_gap) << ", max gradient ratio "
     << fmt(v.max_gradient_ratio) << ", max residual ratio " << fmt(v.max_residual_ratio) << " -> "
     << (v.ok() ? "ok" : "BREACH") << '\n';
}

}  // namespace cdual::io
