#pragma once

// General Dirichlet series D(s) = sum a_n exp(-lambda_n s) and its four
// evaluation paths:
//   direct          plain partial sum, valid right of the convergence
//                   abscissa, with a model-aware tail estimate
//   smoothed        weights exp(-e^{lambda_n}/X) (inverse-Mellin smoothing),
//                   bias estimated by comparing X, X/2, X/4
//   afe             for the integer-generated poly-log family: partial sum
//                   to x plus the incomplete-Gamma correction
//                     c * B^{s-1}/(d^kappa (s-1)^{kappa+1})
//                       * Gamma(kappa+1, (s-1) log(B P(x))),
//                   B = 1/lead(P), c matching Q's top coefficient to P',
//                   valid down to Re s > 1 - 1/d
//   euler-maclaurin full continuation: partial sum + integral of
//                   phi(u) = Q(u)(log u)^kappa P(u)^{-s} (closed form for
//                   the P'-part, numeric remainder) + sawtooth integral
//                   with Bernoulli tail corrections + phi(N)/2

#include <cstdint>
#include <optional>
#include <vector>

#include "dlab/common.hpp"
#include "dlab/frequencies.hpp"
#include "dlab/polynomial.hpp"

namespace dlab {

enum class CoefficientKind { Alternating, PolyLog, Unimodular, Random };

struct CoefficientModel {
  CoefficientKind kind = CoefficientKind::Alternating;
  // poly-log: a = Q(u) (log u)^kappa at the generator argument u
  std::optional<RealPolynomial> Q;
  double kappa = 0.0;
  // unimodular / random: explicit values aligned with the sequence
  std::vector<Complex> values;
};

enum class AbscissaTag { ClosedForm, Estimated, Override };

struct Abscissas {
  double sigma_c = 0.0;
  double sigma_a = 0.0;
  double sigma_2 = 0.0;
  AbscissaTag tag_c = AbscissaTag::Estimated;
  AbscissaTag tag_a = AbscissaTag::Estimated;
  AbscissaTag tag_2 = AbscissaTag::Estimated;
  // estimator agreement across prefix windows (meaningless for closed form)
  bool reliable = true;
};

struct DirichletSeriesSpec {
  FrequencySequence freq;
  CoefficientModel coeff;
  std::optional<RealPolynomial> poly;  // generator polynomial if generated
  std::optional<Abscissas> abscissa_override;

  Complex coefficient(std::size_t n) const;  // 1-based, aligned with freq
  double coefficient_abs(std::size_t n) const;
};

DirichletSeriesSpec make_series(FrequencyGenerator gen,
                                const RealPolynomial& P,
                                CoefficientModel coeff, std::size_t N);
DirichletSeriesSpec make_explicit_series(std::vector<double> lambdas,
                                         std::vector<Complex> values);

// Closed forms where the family matches a covered theorem shape, numeric
// partial-sum growth estimates otherwise; an override wins outright.
Abscissas abscissas(const DirichletSeriesSpec& spec);

// Checks |a_n| against C^{-1} n^{d-1} (log n)^{-kappa} .. C n^{d-1} (log
// n)^{kappa} on the cached prefix (n is the sequence index, d = deg P).
bool coefficient_sandwich(const DirichletSeriesSpec& spec, double C);

enum class EvalMethod { Direct, Smoothed, Afe, EulerMaclaurin };

struct EvaluationResult {
  Complex value;
  double error_estimate = 0.0;
  EvalMethod method = EvalMethod::Direct;
  std::int64_t work = 0;
};

// Partial sum of N cached terms. Tail estimate: alternating bracket for
// real s, partial-sum (Abel) bound for complex s, integral comparison for
// poly-log, remaining absolute values for explicit lists.
EvaluationResult eval_direct(const DirichletSeriesSpec& spec, Complex s,
                             std::size_t N);

// Weighted sum with weights exp(-e^{lambda_n}/X), truncated where the
// weight drops below 1e-18. The error estimate covers the smoothing bias
// (Richardson comparison against X/2 and X/4) plus truncation.
EvaluationResult eval_smoothed(const DirichletSeriesSpec& spec, Complex s,
                               double X);

struct AfeConfig {
  double delta = 0.25;  // aperture of the |t| <= delta * x validity window
};

EvaluationResult eval_afe(const DirichletSeriesSpec& spec, Complex s,
                          double x, const AfeConfig& cfg = {});

EvaluationResult euler_maclaurin(const DirichletSeriesSpec& spec, Complex s,
                                 std::size_t N);

}  // namespace dlab
