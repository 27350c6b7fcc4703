#pragma once

// Randomized coefficient models over the primes: unimodular sign streams,
// the randomized prime sum P_X(s) = sum X_n p_n^{-s}, the randomized Euler
// product zeta_X(s) = prod (1 - X_n p_n^{-s})^{-1}, the correction series
// F with log zeta_X = P_X + F factor by factor, and an envelope fit for
// the growth of |P_X| along vertical lines.
//
// The sign stream is counter-based: entry n is computed from (seed, n)
// alone, so samples parallelize and never depend on generation order.

#include <cstdint>
#include <string>
#include <vector>

#include "dlab/common.hpp"
#include "dlab/series.hpp"

namespace dlab {

enum class SignKind { Steinhaus, Rademacher };

struct RandomSignModel {
  SignKind kind = SignKind::Rademacher;
  std::uint64_t seed = 0;

  // n-th stream entry, 1-based; unit circle for Steinhaus, +-1 for
  // Rademacher
  Complex value(std::uint64_t n) const;
};

std::vector<Complex> sample(const RandomSignModel& model, std::size_t N);

struct RandomSeriesInstance {
  RandomSignModel model;
  std::size_t N = 0;
  DirichletSeriesSpec spec;  // lambda_n = log p_n with the sampled signs

  // "kind:seed:N:hash64(first 64 coefficients)", embedded in reports
  std::string digest() const;
};

RandomSeriesInstance make_instance(const RandomSignModel& model,
                                   std::size_t N);

// Truncated product prod_{n<=N} (1 - X_n p_n^{-s})^{-1}. Needs
// Re s > 1/2 + margin (margin 0.01); a factor with |1 - X_n p_n^{-s}|
// below 1e-14 raises ZeroFactorError.
Complex euler_product(const RandomSeriesInstance& inst, const Complex& s,
                      std::size_t N);

// Sum of principal logs of the factors: no global branch tracking, and
// exactly the left side of the factorwise identity log = P_X + F.
Complex log_euler_product(const RandomSeriesInstance& inst, const Complex& s,
                          std::size_t N);

// One factor's correction sum_{k>=2} w^k / k, |w| < 1; the Taylor tail of
// -log(1-w) past its linear term, summed term by term.
Complex correction_factor(const Complex& w);

// Truncated correction series F(s) = sum_{n<=N} sum_{k>=2} X_n^k p_n^{-ks}/k.
Complex correction_series(const RandomSeriesInstance& inst, const Complex& s,
                          std::size_t N);

struct OrderFitResult {
  double exponent = 0.0;           // envelope slope against log log t
  double target = 0.0;             // 2 - 2 sigma
  std::vector<double> residuals;   // per-window fit residuals
};

// Splits the t grid into windows, takes the running maximum of
// |P_X(sigma+it)| per window, and fits log(max) against log log t.
OrderFitResult order_fit(const RandomSeriesInstance& inst, double sigma,
                         const std::vector<double>& t_grid);

}  // namespace dlab
