#pragma once

// Shared instances and generators for the test suites.

#include <cmath>
#include <cstdint>
#include <random>

#include "cdual/polynomial_core.hpp"

namespace cdual::testing {

inline Coefficients example_n1_coefficients() {
  Coefficients c;
  c.a0 = 1.0;
  c.b0 = scalar_vector(3.0);
  c.c0 = -1.5;
  c.a1 = 1.0;
  c.b1 = 2.0;
  c.c1 = -1.0;
  c.a2 = 1.0;
  c.b2 = 1.0;
  c.c2 = -5.0;
  c.h = scalar_vector(2.0);
  return c;
}

inline ProblemSpec example_n1() { return ProblemSpec(example_n1_coefficients()); }

inline ProblemSpec example_n1_with_h(double h) { return example_n1().with_h(scalar_vector(h)); }

inline ProblemSpec example_n2() {
  Coefficients c = example_n1_coefficients();
  c.b0 = Vector(2);
  c.b0 << 3.0, 0.0;
  c.c2 = -1.0;
  c.h = Vector::Constant(2, std::sqrt(2.0));
  return ProblemSpec(std::move(c));
}

inline Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

// Critical points of the n = 1 example from Sturm isolation of dP/dx,
// ascending in x.
inline constexpr double kOracleX[7] = {
    -6.4156608349140214, -5.9494869330976421, -4.8837387706303925, -3.0836008802863111,
    -0.8572510692416575, -0.31165429331699168, 0.50139278148729227,
};

// Real roots of Phi^2 - H1 for the n = 1 example from Sturm isolation of the
// dense dual polynomial, descending.
inline constexpr double kOracleSigma[7] = {
    2.1298757051256585,  1.8333694695833387,  0.34973658425703563, -0.3863986806795181,
    -1.7043135098669908, -2.2257641220118476, -3.996505446407677,
};

// Roots of Q for the example constants, ascending, and Phi^2 there.
inline constexpr double kOraclePeakSigma[3] = {-3.5486356758152438, -1.0765528045699826, 1.196617051813798};
inline constexpr double kOraclePeakPhi2[3] = {209.84131641549402, 13.673787043753897, 24.537343103955216};

/// Random valid instances: a_i in [0.5, 3], b and c in [-3, 3], h in [-20, 20].
class RandomSpecs {
 public:
  explicit RandomSpecs(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  Vector uniform_vector(int n, double lo, double hi) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = uniform(lo, hi);
    return v;
  }

  ProblemSpec next(int n, bool zero_h = false) {
    Coefficients c;
    c.a0 = uniform(0.5, 3.0);
    c.a1 = uniform(0.5, 3.0);
    c.a2 = uniform(0.5, 3.0);
    c.b0 = uniform_vector(n, -3.0, 3.0);
    c.b1 = uniform(-3.0, 3.0);
    c.b2 = uniform(-3.0, 3.0);
    c.c0 = uniform(-3.0, 3.0);
    c.c1 = uniform(-3.0, 3.0);
    c.c2 = uniform(-3.0, 3.0);
    c.h = zero_h ? Vector::Zero(n) : uniform_vector(n, -20.0, 20.0);
    return ProblemSpec(std::move(c));
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace cdual::testing
