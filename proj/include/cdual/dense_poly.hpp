#pragma once

// Dense univariate polynomials stored as ascending coefficient vectors.

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace cdual::poly {

using Coeffs = std::vector<double>;

inline double evaluate(std::span<const double> c, double x) {
  double acc = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
  return acc;
}

inline Coeffs add(const Coeffs& p, const Coeffs& q) {
  Coeffs r(std::max(p.size(), q.size()), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) r[i] += p[i];
  for (std::size_t i = 0; i < q.size(); ++i) r[i] += q[i];
  return r;
}

inline Coeffs scale(Coeffs p, double s) {
  for (double& c : p) c *= s;
  return p;
}

inline Coeffs multiply(const Coeffs& p, const Coeffs& q) {
  if (p.empty() || q.empty()) return {};
  Coeffs r(p.size() + q.size() - 1, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
  return r;
}

inline Coeffs derivative(const Coeffs& p) {
  if (p.size() <= 1) return {0.0};
  Coeffs d(p.size() - 1);
  for (std::size_t i = 1; i < p.size(); ++i) d[i - 1] = static_cast<double>(i) * p[i];
  return d;
}

// outer(inner(x)), Horner-style in the polynomial ring.
inline Coeffs compose(const Coeffs& outer, const Coeffs& inner) {
  Coeffs acc{0.0};
  for (std::size_t i = outer.size(); i-- > 0;) acc = add(multiply(acc, inner), Coeffs{outer[i]});
  return acc;
}

// Drops trailing coefficients that are exactly zero (keeps at least one).
inline Coeffs trimmed(Coeffs p) {
  while (p.size() > 1 && p.back() == 0.0) p.pop_back();
  return p;
}

}  // namespace cdual::poly
