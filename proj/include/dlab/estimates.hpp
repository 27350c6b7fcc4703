#pragma once

// Desk-scale numeric checks of the mean-value and oscillatory-sum toolbox:
//
//   * mv_bound            gap-weighted mean-value error data for finite
//                         exponential sums
//   * moment_quadrature   (1/T) int_0^T |D(sigma+it)|^2 dt against the
//                         square-sum prediction, with a node-doubling
//                         stability flag
//   * vdc_transform       sum-to-integral swap for slowly oscillating
//                         terms, hypotheses verified by dense sampling,
//                         explicit error certificate
//   * tail_sum_check      smoothed gap-weighted square tail against its
//                         power-law envelope in the smoothing parameter
//   * ddens_check         exponential density of coefficient mass in
//                         short frequency windows, fitted exponent
//
// Constants in the certificates are fitted, not proven; every check
// reports a flag and the numbers behind it.

#include <functional>
#include <utility>
#include <vector>

#include "dlab/common.hpp"
#include "dlab/frequencies.hpp"
#include "dlab/series.hpp"

namespace dlab {

struct MomentReport {
  double sigma = 0.0;
  double T = 0.0;
  double quadrature_value = 0.0;  // (1/T) int_0^T |D(sigma+it)|^2 dt
  double mv_main = 0.0;           // sum |a_n|^2 e^{-2 lambda_n sigma}
  double mv_error = 0.0;          // (1/T) sum of the gap-weighted squares
  std::size_t node_count = 0;     // nodes in the reported (finer) pass
  bool refinement_stable = false; // node doubling moved the value < 1%
};

// main = T * sum |a_n|^2, error = sum |a_n|^2 / theta_n where theta_n is
// the distance from lambda_n to its nearest neighbour in the prefix.
// A single-term sum has no neighbour and contributes no error term.
std::pair<double, double> mv_bound(const std::vector<Complex>& coeffs,
                                   const FrequencySequence& freqs, double T);

// Mean square of D along [sigma, sigma + iT] via composite Gauss-Legendre
// panels sized to put at least 8 nodes per oscillation of the highest
// frequency that still carries weight at this sigma. The value is taken
// from the doubled-node pass; the flag compares the two passes.
MomentReport moment_quadrature(const DirichletSeriesSpec& spec, double sigma,
                               double T, EvalMethod method);

// Samples the normalized moment over a T ladder; the sup over T > 0 is
// probed, not proven.
std::vector<MomentReport> moment_sup_scan(
    const DirichletSeriesSpec& spec, double sigma, EvalMethod method,
    const std::vector<double>& Ts = {100.0, 300.0, 1000.0, 3000.0});

// Growth exponent of the T^B term in the moment bound for the degree-d
// prime-generated family, as a function of the slack eps. Reported as a
// diagnostic; no pass threshold is attached. Tends to sigma0/sigma1 as
// eps -> 0.
double moment_growth_exponent(int d, double sigma0, double sigma1,
                              double eps);

struct VdcResult {
  Complex integral{0.0, 0.0};
  double error_cert = 0.0;  // C * (g(a) + |g'(a)|)
  long evaluations = 0;
};

// Computes int_a^b g(u) e^{2 pi i f(u)} du and certifies that the integer
// sum of the same expression over [a, b] stays within error_cert of it,
// provided g is positive, non-increasing and convex and f' is monotonic
// with |f'| < 1/2. The hypotheses are checked on a 1000-point grid; a
// violation raises HypothesisError naming the condition and a witness.
VdcResult vdc_transform(const std::function<double(double)>& g,
                        const std::function<double(double)>& gprime,
                        const std::function<double(double)>& f,
                        const std::function<double(double)>& fprime,
                        double a, double b, double C = 10.0);

struct TailSumResult {
  double S = 0.0;               // gap-weighted smoothed square sum at X
  double bound = 0.0;           // fitted constant * max(1, X^exponent)
  double exponent = 0.0;        // (2a + (beta - 2 sigma) b + 1) / b
  double fitted_constant = 0.0; // calibrated on X/16 .. X/2
  bool within = false;          // S <= bound
};

// Checks that sum |a_n|^2 exp(-2 lambda_n sigma) exp(-2 e^{lambda_n}/X)
// / theta_n follows the max(1, X^exponent) envelope. The hypotheses
// |a_n| = O(n^a), lambda_n >= b log n, theta_n >= c exp(-beta lambda_n)
// and sigma > beta/2 are verified on the cached prefix; violations raise
// HypothesisError with the witness index.
TailSumResult tail_sum_check(double a, double b, double c, double beta,
                             double sigma, double X,
                             const DirichletSeriesSpec& spec);

// Coefficient mass sum |a_n| over lambda_n in [x, x + alpha/x^2].
// Throws EmptyIntervalError when the window holds no frequency.
double interval_abs_sum(const DirichletSeriesSpec& spec, double x,
                        double alpha);

struct DdensReport {
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<double> x_grid;
  std::vector<double> interval_sums;  // zero where the window was empty
  std::vector<bool> empty_window;     // flagged, excluded from the fit
  double target_exponent = 0.0;       // sigma_a - beta
  double fitted_exponent = 0.0;       // LSQ slope of log(sum) against x
  bool pass = false;                  // fitted >= target - tolerance
};

// Fits the exponential growth rate of short-window coefficient mass and
// compares it with sigma_a - beta. Empty windows are flagged in the
// report and skipped by the fit instead of aborting the run.
DdensReport ddens_check(const DirichletSeriesSpec& spec, double alpha,
                        double beta, const std::vector<double>& x_grid,
                        double tolerance = 0.05);

}  // namespace dlab
