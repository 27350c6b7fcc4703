#pragma once

// Complex Gamma and upper incomplete Gamma on the principal branch.
//
// The incomplete function G(a, z) = integral_z^inf t^(a-1) e^(-t) dt is
// taken along a path that stays off the cut (-inf, 0]; equivalently
//
//     G(a, z) = e^(-z) * integral_0^inf e^(-u) (z + u)^(a-1) du,
//
// which is what the left-half-plane evaluation path integrates directly.
// Useful identities exercised throughout:
//
//     G(a+1, z) = a G(a, z) + z^a e^(-z)           (recurrence)
//     G(a, z)  ~ z^(a-1) e^(-z) [1 + (a-1)/z + (a-1)(a-2)/z^2 + ...]
//     G(a, 0)  = Gamma(a)            for Re a > 0
//
// Evaluation strategy is regime-switched on (a, z); see regime_for. Every
// admissible pair maps to exactly one regime, and values at regime borders
// are required (and tested) to agree.

#include "dlab/common.hpp"

namespace dlab {

// Complete Gamma via a 15-term Lanczos approximation, reflection for
// Re a < 1/2. Throws PoleError at nonpositive integers, OverflowError when
// the result exceeds double range.
Complex gamma(Complex a);

// log |Gamma| + i arg on the principal determination of the Lanczos form;
// helper for magnitude work, not an analytic continuation of log Gamma.
Complex log_gamma(Complex a);

enum class GammaRegime {
  PowerSeries,       // small |z|: complete Gamma minus the lower series
  ContinuedFraction, // moderate |z|, Re z >= 0: modified Lentz
  Asymptotic,        // |z| >= max(30, 5|a|): divergent series, truncated
  RecurrenceLifted,  // Re a <= 1/4 at small |z|: shift a up, recur down
  LaplaceIntegral,   // moderate |z|, Re z < 0: adaptive quadrature on the
                     // shifted-contour integral above
};

// Deterministic dispatch; same logic the evaluator uses.
GammaRegime regime_for(Complex a, Complex z);

// Upper incomplete Gamma, principal branch. Domain: z not on (-inf, 0]
// unless a is a positive integer (entire case, closed form). Throws
// BranchCutError / PoleError / OverflowError accordingly.
Complex upper_incomplete_gamma(Complex a, Complex z);

// Truncated asymptotic expansion z^(a-1) e^(-z) sum_k (a-1)...(a-k) / z^k,
// cut at the smallest term. Requires |z| >= max(30, 5|a|) (DomainError).
Complex incomplete_gamma_asymptotic(Complex a, Complex z);

struct AsymptoticInfo {
  Complex value{0.0, 0.0};
  double remainder_bound = 0.0;  // bound on the dropped tail, relative to
                                 // the prefactor z^(a-1) e^(-z)
  int terms = 0;
};

AsymptoticInfo incomplete_gamma_asymptotic_info(Complex a, Complex z);

}  // namespace dlab
