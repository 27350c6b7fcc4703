#pragma once

// Real polynomials b0 + b1 x + ... + bd x^d used both as frequency
// generators (P, applied to primes or integers) and as coefficient
// envelopes (Q). Frequency use needs the monotone tail: the threshold
// x0 past which P is strictly increasing is computed at construction
// from the real critical points.

#include <vector>

#include "dlab/common.hpp"

namespace dlab {

class RealPolynomial {
 public:
  // coefficients in ascending order; the leading one must be nonzero
  explicit RealPolynomial(std::vector<double> coefficients);

  int degree() const { return static_cast<int>(coeff_.size()) - 1; }
  double leading() const { return coeff_.back(); }
  const std::vector<double>& coefficients() const { return coeff_; }

  double operator()(double x) const;
  Complex operator()(const Complex& x) const;
  double derivative_at(double x) const;
  RealPolynomial derivative() const;

  // Largest real critical point plus one; zero when the derivative has
  // no real root. P is strictly increasing on [increasing_from(), inf)
  // whenever the leading coefficient is positive.
  double increasing_from() const;

 private:
  std::vector<double> coeff_;
  double x0_ = 0.0;
};

// All real roots in ascending order, found by recursive critical-point
// isolation and bisection. Multiple roots appear once.
std::vector<double> real_roots(const RealPolynomial& p);

// Inverse of P on its monotone tail [increasing_from(), inf). Requires a
// positive leading coefficient and y >= P(increasing_from()); safeguarded
// Newton with a bisection bracket, exact to about 1e-12 relative in P(x).
double poly_inverse(const RealPolynomial& p, double y);

}  // namespace dlab
