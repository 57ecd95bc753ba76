#pragma once

// Problem instances of the nested octic
//
//   P(x) = U2(L2(L1(x))) - h^T x,
//   L1(x) = a0/2 |x|^2 + b0^T x + c0,
//   L2(y) = a1/2 y^2 + b1 y + c1,
//   U2(y) = a2/2 y^2 + b2 y + c2,
//
// together with the primal evaluators and the constants H1..H4, K that
// drive the one-dimensional dual reduction.

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "cdual/dense_poly.hpp"

namespace cdual {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when coefficients do not describe a valid instance. `field()`
/// names the offending coefficient.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct Coefficients {
  double a0 = 1.0;
  Vector b0;
  double c0 = 0.0;
  double a1 = 1.0;
  double b1 = 0.0;
  double c1 = 0.0;
  double a2 = 1.0;
  double b2 = 0.0;
  double c2 = 0.0;
  Vector h;
};

/// A validated instance. Immutable after construction.
class ProblemSpec {
 public:
  explicit ProblemSpec(Coefficients c) : c_(std::move(c)) { validate(); }

  int n() const noexcept { return static_cast<int>(c_.b0.size()); }
  double a0() const noexcept { return c_.a0; }
  const Vector& b0() const noexcept { return c_.b0; }
  double c0() const noexcept { return c_.c0; }
  double a1() const noexcept { return c_.a1; }
  double b1() const noexcept { return c_.b1; }
  double c1() const noexcept { return c_.c1; }
  double a2() const noexcept { return c_.a2; }
  double b2() const noexcept { return c_.b2; }
  double c2() const noexcept { return c_.c2; }
  const Vector& h() const noexcept { return c_.h; }
  const Coefficients& coefficients() const noexcept { return c_; }

  bool h_is_zero() const { return c_.h.isZero(0.0); }

  ProblemSpec with_h(Vector h) const {
    Coefficients c = c_;
    c.h = std::move(h);
    return ProblemSpec(std::move(c));
  }

 private:
  void validate() const {
    if (c_.b0.size() < 1) throw ValidationError("n", "dimension must be at least 1");
    if (c_.h.size() != c_.b0.size())
      throw ValidationError("h", "length " + std::to_string(c_.h.size()) +
                                     " does not match n = " + std::to_string(c_.b0.size()));
    const std::pair<const char*, double> positive[] = {{"a0", c_.a0}, {"a1", c_.a1}, {"a2", c_.a2}};
    for (const auto& [name, v] : positive) {
      if (!std::isfinite(v)) throw ValidationError(name, "must be finite");
      if (!(v > 0.0)) throw ValidationError(name, "must be strictly positive");
    }
    const std::pair<const char*, double> scalars[] = {
        {"c0", c_.c0}, {"b1", c_.b1}, {"c1", c_.c1}, {"b2", c_.b2}, {"c2", c_.c2}};
    for (const auto& [name, v] : scalars)
      if (!std::isfinite(v)) throw ValidationError(name, "must be finite");
    if (!c_.b0.allFinite()) throw ValidationError("b0", "entries must be finite");
    if (!c_.h.allFinite()) throw ValidationError("h", "entries must be finite");
  }

  Coefficients c_;
};

/// Invariants of the dual reduction. K = a2 / (2 a1), so tau(s) = K (s^2 - H3).
struct DerivedConstants {
  double H1 = 0.0;
  double H2 = 0.0;
  double H3 = 0.0;
  double H4 = 0.0;
  double K = 0.0;
};

inline DerivedConstants derived_constants(const ProblemSpec& s) {
  const double a0 = s.a0(), a1 = s.a1(), a2 = s.a2();
  const double h_sq = s.h().squaredNorm();
  const double b0_sq = s.b0().squaredNorm();
  const double b0_h = s.b0().dot(s.h());
  DerivedConstants k;
  k.H1 = a1 * h_sq / a0;
  k.H2 = (2.0 * a0 * a1 * s.c0() + 2.0 * a0 * s.b1() - a1 * b0_sq) / (2.0 * a0);
  k.H3 = -(2.0 * a1 * a2 * s.c1() + 2.0 * a1 * s.b2() - a2 * s.b1() * s.b1()) / a2;
  k.H4 = (2.0 * a0 * a2 * s.c2() + 2.0 * a2 * b0_h - a0 * s.b2() * s.b2()) / (2.0 * a0 * a2);
  k.K = a2 / (2.0 * a1);
  return k;
}

namespace detail {
inline void require_dim(const ProblemSpec& s, const Vector& x) {
  if (x.size() != s.n())
    throw std::invalid_argument("point has length " + std::to_string(x.size()) + ", expected " +
                                std::to_string(s.n()));
}
}  // namespace detail

inline double eval_y1(const ProblemSpec& s, const Vector& x) {
  detail::require_dim(s, x);
  return 0.5 * s.a0() * x.squaredNorm() + s.b0().dot(x) + s.c0();
}

inline double eval_y2(const ProblemSpec& s, double y1) {
  return 0.5 * s.a1() * y1 * y1 + s.b1() * y1 + s.c1();
}

inline double eval_P(const ProblemSpec& s, const Vector& x) {
  const double y2 = eval_y2(s, eval_y1(s, x));
  return 0.5 * s.a2() * y2 * y2 + s.b2() * y2 + s.c2() - s.h().dot(x);
}

/// Chain-rule pieces at x: s1 = a1 y1 + b1, s2 = a2 y2 + b2, g = a0 x + b0.
struct ChainTerms {
  double y1 = 0.0;
  double y2 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  Vector g;
};

inline ChainTerms chain_terms(const ProblemSpec& s, const Vector& x) {
  ChainTerms t;
  t.y1 = eval_y1(s, x);
  t.y2 = eval_y2(s, t.y1);
  t.s1 = s.a1() * t.y1 + s.b1();
  t.s2 = s.a2() * t.y2 + s.b2();
  t.g = s.a0() * x + s.b0();
  return t;
}

inline Vector gradient(const ProblemSpec& s, const Vector& x) {
  const ChainTerms t = chain_terms(s, x);
  return (t.s2 * t.s1) * t.g - s.h();
}

/// Magnitude of the terms that cancel in the gradient; stationarity is
/// judged relative to this.
inline double stationarity_scale(const ProblemSpec& s, const Vector& x) {
  const ChainTerms t = chain_terms(s, x);
  return 1.0 + s.h().norm() + std::abs(t.s1 * t.s2) * t.g.norm();
}

/// The Hessian is alpha * I + beta * g g^T with g = a0 x + b0.
struct HessianStructure {
  double alpha = 0.0;
  double beta = 0.0;
  Vector direction;

  Matrix matrix() const {
    const auto n = direction.size();
    return alpha * Matrix::Identity(n, n) + beta * direction * direction.transpose();
  }

  /// Closed-form spectrum, ascending: alpha (n-1 times) and alpha + beta |g|^2.
  Vector eigenvalues() const {
    const auto n = direction.size();
    Vector ev = Vector::Constant(n, alpha);
    ev(n - 1) = alpha + beta * direction.squaredNorm();
    std::sort(ev.data(), ev.data() + n);
    return ev;
  }
};

inline HessianStructure second_derivative_structure(const ProblemSpec& s, const Vector& x) {
  ChainTerms t = chain_terms(s, x);
  HessianStructure hs;
  hs.alpha = s.a0() * t.s1 * t.s2;
  hs.beta = s.a1() * t.s2 + s.a2() * t.s1 * t.s1;
  hs.direction = std::move(t.g);
  return hs;
}

inline Matrix hessian(const ProblemSpec& s, const Vector& x) {
  return second_derivative_structure(s, x).matrix();
}

/// Dense coefficients of P for n = 1, ascending powers 0..8.
inline std::array<double, 9> expand_univariate(const ProblemSpec& s) {
  if (s.n() != 1) throw std::invalid_argument("expand_univariate requires n = 1");
  const poly::Coeffs inner{s.c0(), s.b0()(0), 0.5 * s.a0()};
  const poly::Coeffs middle{s.c1(), s.b1(), 0.5 * s.a1()};
  const poly::Coeffs outer{s.c2(), s.b2(), 0.5 * s.a2()};
  poly::Coeffs p = poly::compose(outer, poly::compose(middle, inner));
  p = poly::add(p, poly::Coeffs{0.0, -s.h()(0)});
  std::array<double, 9> out{};
  for (std::size_t i = 0; i < out.size() && i < p.size(); ++i) out[i] = p[i];
  return out;
}

inline Vector scalar_vector(double v) { return Vector::Constant(1, v); }

}  // namespace cdual
