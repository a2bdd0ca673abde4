#pragma once

// Dense univariate polynomials with real coefficients, plus the rational
// functions built from them.  Coefficients are stored in ascending order:
// c[0] + c[1]*z + c[2]*z^2 + ...  This is deliberately minimal — enough for
// the exact scalar-controller algebra (products of low-degree factors,
// root-based deflation, companion-matrix roots) without pulling in a CAS.

#include <vector>

#include "offsetctrl/discrete_system.hpp"
#include "offsetctrl/linalg.hpp"

namespace offsetctrl {

struct Polynomial {
  std::vector<double> c;  // ascending coefficients; empty means the zero polynomial

  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs) : c(std::move(coeffs)) {}

  static Polynomial constant(double value);
  // c0 + c1*z
  static Polynomial linear(double c0, double c1);

  // Index of the highest structurally nonzero coefficient; -1 for the zero
  // polynomial.  Callers that want numerical degree should trim() first.
  int degree() const;

  double eval(double x) const;
  Complex eval(const Complex& z) const;

  // Largest absolute coefficient (0 for the zero polynomial).
  double max_abs_coeff() const;
};

Polynomial operator+(const Polynomial& a, const Polynomial& b);
Polynomial operator-(const Polynomial& a, const Polynomial& b);
Polynomial operator*(const Polynomial& a, const Polynomial& b);
Polynomial operator*(double s, const Polynomial& p);

// Drop trailing coefficients smaller than rel_tol times the largest one.
Polynomial trim(const Polynomial& p, double rel_tol = 1e-12);

// All complex roots via the companion matrix.  Requires a nonzero leading
// coefficient after trimming; throws std::invalid_argument on the zero or
// constant polynomial.
std::vector<Complex> poly_roots(const Polynomial& p);

// Synthetic division by (z - root).  Returns the quotient and stores the
// division remainder (which is p(root)) in *remainder when non-null.  The
// caller decides whether the remainder is small enough to treat the root as
// exact.
Polynomial deflate(const Polynomial& p, double root, double* remainder = nullptr);

// Ratio of two polynomials.  No implicit cancellation: callers keep num/den
// in whatever factored-and-multiplied-out form their algebra produced.
struct RationalFn {
  Polynomial num;
  Polynomial den;

  Complex eval(const Complex& z) const;
  double eval(double x) const;
};

// State-space realization of a proper rational function in the delay
// variable (same evaluation convention as DiscreteSystem: the realization
// satisfies evaluate(sys, z) == r.eval(z) wherever both are defined).
// Properness in this convention means den(0) != 0; throws
// std::invalid_argument otherwise.
DiscreteSystem rational_to_system(const RationalFn& r);

}  // namespace offsetctrl
