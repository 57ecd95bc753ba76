#pragma once

// Independent checks for the dual pipeline. Nothing here calls into the
// region partition or the dual root solver: critical points of P are found
// directly, from dP/dx (n = 1) or by descent on P (any n).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cdual/dense_poly.hpp"
#include "cdual/polynomial_core.hpp"

namespace cdual::oracle {

struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
};

struct RootIsolationResult {
  std::vector<Bracket> intervals;
  std::vector<double> refined_roots;  // ascending, one per interval
  std::vector<std::pair<int, int>> sturm_sign_counts;  // sign variations at (lo, hi)
  int total_count = 0;                // Sturm count over (-bound, bound]
  double bound = 0.0;
};

/// Floating-point Sturm chain with per-step normalization.
class SturmSequence {
 public:
  explicit SturmSequence(std::span<const double> coeffs, double truncation = 1e-13) {
    poly::Coeffs p = normalized(trim_leading(poly::Coeffs(coeffs.begin(), coeffs.end()), 0.0));
    if (p.size() < 2) throw std::invalid_argument("Sturm sequence needs degree >= 1");
    chain_.push_back(p);
    chain_.push_back(normalized(poly::derivative(p)));
    while (chain_.back().size() > 1) {
      const auto& a = chain_[chain_.size() - 2];
      const auto& b = chain_.back();
      auto [quot_max, rem] = remainder(a, b);
      const double scale = std::max(1.0, quot_max);
      rem = trim_leading(std::move(rem), truncation * scale);
      if (rem.size() == 1 && std::abs(rem[0]) <= truncation * scale) break;
      chain_.push_back(normalized(poly::scale(std::move(rem), -1.0)));
    }
  }

  const std::vector<poly::Coeffs>& chain() const noexcept { return chain_; }
  std::span<const double> polynomial() const noexcept { return chain_.front(); }

  int sign_variations(double x) const {
    int changes = 0;
    int prev = 0;
    for (const auto& p : chain_) {
      const double v = poly::evaluate(p, x);
      const int s = (v > 0.0) - (v < 0.0);
      if (s == 0) continue;
      if (prev != 0 && s != prev) ++changes;
      prev = s;
    }
    return changes;
  }

 private:
  static poly::Coeffs trim_leading(poly::Coeffs p, double tol) {
    while (p.size() > 1 && std::abs(p.back()) <= tol) p.pop_back();
    return p;
  }

  static poly::Coeffs normalized(poly::Coeffs p) {
    double m = 0.0;
    for (double c : p) m = std::max(m, std::abs(c));
    return m > 0.0 ? poly::scale(std::move(p), 1.0 / m) : p;
  }

  // Returns (max |quotient coefficient|, remainder of a / b).
  static std::pair<double, poly::Coeffs> remainder(poly::Coeffs a, const poly::Coeffs& b) {
    const std::size_t db = b.size() - 1;
    double qmax = 0.0;
    while (a.size() > db && a.size() > 1) {
      const double q = a.back() / b.back();
      qmax = std::max(qmax, std::abs(q));
      const std::size_t shift = a.size() - 1 - db;
      for (std::size_t i = 0; i <= db; ++i) a[shift + i] -= q * b[i];
      a.pop_back();
    }
    if (a.empty()) a.push_back(0.0);
    return {qmax, std::move(a)};
  }

  std::vector<poly::Coeffs> chain_;
};

/// All real roots of a polynomial given by ascending coefficients.
inline RootIsolationResult isolate_real_roots(std::span<const double> coeffs) {
  const SturmSequence seq(coeffs);
  const auto p = seq.polynomial();
  RootIsolationResult out;
  double lead = p.back(), biggest = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) biggest = std::max(biggest, std::abs(p[i]));
  out.bound = 2.0 + 2.0 * biggest / std::abs(lead);

  struct Pending {
    double lo, hi;
    int vlo, vhi;
  };
  std::vector<Pending> stack{{-out.bound, out.bound, seq.sign_variations(-out.bound),
                              seq.sign_variations(out.bound)}};
  out.total_count = stack.front().vlo - stack.front().vhi;
  std::vector<Pending> isolated;
  while (!stack.empty()) {
    const Pending cur = stack.back();
    stack.pop_back();
    const int count = cur.vlo - cur.vhi;
    if (count <= 0) continue;
    const double mid = 0.5 * (cur.lo + cur.hi);
    const bool too_narrow =
        cur.hi - cur.lo <= 1e-14 * std::max(1.0, std::abs(mid)) || mid <= cur.lo || mid >= cur.hi;
    if (count == 1 || too_narrow) {
      isolated.push_back(cur);
      continue;
    }
    const int vmid = seq.sign_variations(mid);
    stack.push_back({cur.lo, mid, cur.vlo, vmid});
    stack.push_back({mid, cur.hi, vmid, cur.vhi});
  }
  std::sort(isolated.begin(), isolated.end(), [](const Pending& a, const Pending& b) { return a.lo < b.lo; });

  for (const auto& iv : isolated) {
    out.intervals.push_back({iv.lo, iv.hi});
    out.sturm_sign_counts.emplace_back(iv.vlo, iv.vhi);
    double lo = iv.lo, hi = iv.hi;
    const double flo = poly::evaluate(p, lo), fhi = poly::evaluate(p, hi);
    if (fhi == 0.0) {
      out.refined_roots.push_back(hi);
      continue;
    }
    if (flo != 0.0 && (flo < 0.0) != (fhi < 0.0)) {
      const bool lo_negative = flo < 0.0;
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (lo + hi);
        if (m <= lo || m >= hi) break;
        const double fm = poly::evaluate(p, m);
        if (fm == 0.0) {
          lo = hi = m;
          break;
        }
        if ((fm < 0.0) == lo_negative) lo = m; else hi = m;
      }
    } else {
      // Even multiplicity: keep the half whose Sturm count is positive.
      int vlo = iv.vlo;
      for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo)); ++it) {
        const double m = 0.5 * (lo + hi);
        const int vm = seq.sign_variations(m);
        if (vlo - vm >= 1) hi = m; else { lo = m; vlo = vm; }
      }
    }
    out.refined_roots.push_back(0.5 * (lo + hi));
  }
  return out;
}

/// Critical points of P for n = 1: the real roots of the degree-7 derivative
/// of the dense expansion.
inline RootIsolationResult isolate_derivative_roots(const ProblemSpec& spec) {
  if (spec.n() != 1) throw std::invalid_argument("isolate_derivative_roots requires n = 1");
  const auto dense = expand_univariate(spec);
  const poly::Coeffs d = poly::derivative(poly::Coeffs(dense.begin(), dense.end()));
  return isolate_real_roots(d);
}

/// Worst relative deviation of central differences from the analytic
/// gradient (order 1) or Hessian (order 2).
inline double finite_difference_check(const ProblemSpec& spec, const Vector& x, int order) {
  if (order != 1 && order != 2) throw std::invalid_argument("order must be 1 or 2");
  const int n = spec.n();
  const double step = 1e-6 * (1.0 + x.cwiseAbs().maxCoeff());
  double worst = 0.0;
  if (order == 1) {
    const Vector g = gradient(spec, x);
    const double floor = stationarity_scale(spec, x);
    for (int i = 0; i < n; ++i) {
      Vector xp = x, xm = x;
      xp(i) += step;
      xm(i) -= step;
      const double fd = (eval_P(spec, xp) - eval_P(spec, xm)) / (2.0 * step);
      worst = std::max(worst, std::abs(fd - g(i)) / std::max(std::abs(g(i)), floor));
    }
    return worst;
  }
  const Matrix H = hessian(spec, x);
  const double floor = std::max(1.0, H.cwiseAbs().maxCoeff());
  for (int j = 0; j < n; ++j) {
    Vector xp = x, xm = x;
    xp(j) += step;
    xm(j) -= step;
    const Vector col = (gradient(spec, xp) - gradient(spec, xm)) / (2.0 * step);
    for (int i = 0; i < n; ++i)
      worst = std::max(worst, std::abs(col(i) - H(i, j)) / std::max(std::abs(H(i, j)), floor));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Multistart descent

struct Box {
  Vector lo;
  Vector hi;
};

struct StationaryPoint {
  Vector x;
  double value = 0.0;
  double gradient_norm = 0.0;
  double gradient_scale = 1.0;
};

struct DescentOptions {
  std::uint64_t seed = 0x5eed2024ULL;
  int max_iterations = 10000;
  double armijo = 1e-4;
  double stationarity = 1e-6;  // relative to stationarity_scale
  double dedup = 1e-6;         // relative to 1 + |x|
};

struct DescentResult {
  std::vector<Vector> starts;
  std::vector<StationaryPoint> converged_points;  // sorted by value, then lexicographically
  int dropped = 0;
  double best_value = std::numeric_limits<double>::infinity();
  Vector best_point;
  std::uint64_t seed = 0;
};

namespace detail {

inline int nth_prime(int i) {
  static constexpr int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  if (i < 0 || i >= static_cast<int>(std::size(primes))) throw std::invalid_argument("dimension too large for Halton seeds");
  return primes[i];
}

inline double radical_inverse(std::uint64_t k, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (k > 0) {
    r += f * static_cast<double>(k % base);
    k /= base;
    f *= inv;
  }
  return r;
}

inline bool lex_less(const Vector& a, const Vector& b) {
  for (int i = 0; i < a.size(); ++i)
    if (a(i) != b(i)) return a(i) < b(i);
  return false;
}

}  // namespace detail

/// Randomly shifted Halton points in the box.
inline std::vector<Vector> quasi_random_starts(const Box& box, int count, std::uint64_t seed) {
  const int n = static_cast<int>(box.lo.size());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> shift(n);
  for (double& s : shift) s = unit(rng);
  std::vector<Vector> out;
  out.reserve(count);
  for (int k = 1; k <= count; ++k) {
    Vector x(n);
    for (int d = 0; d < n; ++d) {
      double u = detail::radical_inverse(static_cast<std::uint64_t>(k), detail::nth_prime(d)) + shift[d];
      u -= std::floor(u);
      x(d) = box.lo(d) + u * (box.hi(d) - box.lo(d));
    }
    out.push_back(std::move(x));
  }
  return out;
}

/// Gradient descent with Armijo backtracking; once the Hessian is positive
/// definite near the end, damped Newton steps finish the convergence.
/// A few Newton steps past the stopping test, kept while |grad P| shrinks.
/// On flat minima the first point under the tolerance can still sit far
/// enough from the minimizer to defeat deduplication.
inline StationaryPoint polish(const ProblemSpec& spec, Vector x) {
  Vector g = gradient(spec, x);
  for (int i = 0; i < 8; ++i) {
    Eigen::LLT<Matrix> llt(hessian(spec, x));
    if (llt.info() != Eigen::Success) break;
    const Vector next = x - llt.solve(g);
    if (!next.allFinite()) break;
    const Vector gn = gradient(spec, next);
    if (!(gn.norm() < g.norm())) break;
    x = next;
    g = gn;
  }
  return StationaryPoint{x, eval_P(spec, x), g.norm(), stationarity_scale(spec, x)};
}

inline std::optional<StationaryPoint> descend(const ProblemSpec& spec, Vector x, const DescentOptions& opt) {
  double t = 1.0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const Vector g = gradient(spec, x);
    const double gn = g.norm();
    const double scale = stationarity_scale(spec, x);
    if (gn <= opt.stationarity * scale) return polish(spec, x);
    const double fx = eval_P(spec, x);

    Vector dir = -g;
    double slope = -gn * gn;
    bool newton = false;
    if (gn <= 1e-2 * scale) {
      Eigen::LLT<Matrix> llt(hessian(spec, x));
      if (llt.info() == Eigen::Success) {
        const Vector d = -llt.solve(g);
        if (d.allFinite() && g.dot(d) < 0.0) {
          dir = d;
          slope = g.dot(d);
          newton = true;
        }
      }
    }
    double step = newton ? 1.0 : std::min(2.0 * t, 1e6);
    while (step > 1e-300 && !(eval_P(spec, x + step * dir) <= fx + opt.armijo * step * slope)) step *= 0.5;
    if (step <= 1e-300) break;
    if (!newton) t = step;
    const Vector next = x + step * dir;
    if (next == x) break;
    x = next;
  }
  const Vector g = gradient(spec, x);
  const double scale = stationarity_scale(spec, x);
  if (g.norm() <= opt.stationarity * scale) return polish(spec, x);
  return std::nullopt;
}

inline DescentResult multistart_descent(const ProblemSpec& spec, int num_starts, const Box& box,
                                        const DescentOptions& opt = {}) {
  if (box.lo.size() != spec.n() || box.hi.size() != spec.n())
    throw std::invalid_argument("box dimension does not match the instance");
  DescentResult out;
  out.seed = opt.seed;
  out.starts = quasi_random_starts(box, num_starts, opt.seed);
  std::vector<StationaryPoint> found;
  for (const auto& s : out.starts) {
    if (auto sp = descend(spec, s, opt)) found.push_back(std::move(*sp));
    else ++out.dropped;
  }
  std::sort(found.begin(), found.end(), [](const StationaryPoint& a, const StationaryPoint& b) {
    return a.value != b.value ? a.value < b.value : detail::lex_less(a.x, b.x);
  });
  for (auto& p : found) {
    const bool dup = std::any_of(out.converged_points.begin(), out.converged_points.end(), [&](const StationaryPoint& q) {
      return (p.x - q.x).norm() <= opt.dedup * (1.0 + q.x.norm());
    });
    if (!dup) out.converged_points.push_back(std::move(p));
  }
  if (!out.converged_points.empty()) {
    out.best_value = out.converged_points.front().value;
    out.best_point = out.converged_points.front().x;
  }
  return out;
}

/// n = 1: maxima of P between consecutive minima, from sign changes of dP/dx
/// on a fine grid refined by bisection.
inline std::vector<double> maxima_between_minima(const ProblemSpec& spec, std::vector<double> minima,
                                                 int grid = 4000) {
  if (spec.n() != 1) throw std::invalid_argument("maxima_between_minima requires n = 1");
  std::sort(minima.begin(), minima.end());
  auto dp = [&](double x) { return gradient(spec, scalar_vector(x))(0); };
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < minima.size(); ++i) {
    const double a = minima[i], b = minima[i + 1];
    double prev_x = a + (b - a) / grid, prev = dp(prev_x);
    for (int j = 2; j < grid; ++j) {
      const double x = a + (b - a) * j / grid;
      const double v = dp(x);
      if (prev > 0.0 && v <= 0.0) {
        double lo = prev_x, hi = x;
        for (int it = 0; it < 200 && lo < hi; ++it) {
          const double m = 0.5 * (lo + hi);
          if (m <= lo || m >= hi) break;
          (dp(m) > 0.0 ? lo : hi) = m;
        }
        out.push_back(0.5 * (lo + hi));
      }
      prev = v;
      prev_x = x;
    }
  }
  return out;
}

}  // namespace cdual::oracle
