#pragma once

// Quadrature kit used across the evaluators and the moment/estimate code.
//
// Two layers:
//   * gauss_kronrod_15: one panel, value + embedded error estimate.
//   * integrate_adaptive: bisection on the GK15 estimate, absolute/relative
//     tolerance, depth-capped.
//   * gauss_legendre_16: fixed-order panel used where bitwise determinism
//     across thread counts matters (parallel panels, sequential reduce).
//
// All routines integrate complex-valued functions of a real variable.

#include <functional>

#include "dlab/common.hpp"

namespace dlab {

using Integrand = std::function<Complex(double)>;

struct QuadResult {
  Complex value{0.0, 0.0};
  double error = 0.0;      // estimate, not a certified bound
  long evaluations = 0;
};

// Single GK15 panel on [a, b].
QuadResult gauss_kronrod_15(const Integrand& f, double a, double b);

// Adaptive bisection until |err| <= max(abs_tol, rel_tol * |value|) or the
// depth cap is hit; the returned error is the accumulated panel estimate.
QuadResult integrate_adaptive(const Integrand& f, double a, double b,
                              double abs_tol, double rel_tol,
                              int max_depth = 48);

// Fixed 16-point Gauss-Legendre panel on [a, b]; no error estimate.
Complex gauss_legendre_16(const Integrand& f, double a, double b);

// Composite GL16 over [a, b] split into n equal panels, summed in panel
// order (deterministic); panels may be evaluated in parallel.
Complex composite_gauss_legendre(const Integrand& f, double a, double b,
                                 std::size_t n_panels, bool parallel = false);

}  // namespace dlab
