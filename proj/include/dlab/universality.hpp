#pragma once

// Vertical-translate scanning. A compact rectangle inside the strip where
// translates of the series approximate holomorphic targets is sampled on
// a grid; sup-norm distances between D(s + i tau) and a target come with
// a continuity margin covering what the grid cannot see; a tau scan
// reports how much of [0, T] the translates spend near the target. The
// Kronecker witness searches the phase torus directly and is the
// mechanism-level cross-check for the scanner.

#include <cstddef>
#include <utility>
#include <vector>

#include "dlab/series.hpp"

namespace dlab {

// Left edge of the approximation strip for the family: 2/3 for series
// generated by a linear polynomial over the primes, 1 - 1/(2 deg P) for
// the remaining generated families, unbounded for explicit lists (finite
// sums are entire and almost periodic everywhere).
double strip_left_edge(const DirichletSeriesSpec& spec);

struct CompactGrid {
  double sigma_lo = 0.0;
  double sigma_hi = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double h = 0.0;          // requested spacing bound
  std::size_t cols = 0;    // sigma direction
  std::size_t rows = 0;    // t direction
  std::vector<Complex> points;  // row-major, rows of constant t

  double spacing_sigma() const;
  double spacing_t() const;
};

// Covers [sigma_lo, sigma_hi] x [t_lo, t_hi] with spacing <= h in both
// directions. The rectangle must sit inside the family's strip:
// sigma_lo above the left edge, sigma_hi < 1.
CompactGrid make_grid(const DirichletSeriesSpec& spec, double sigma_lo,
                      double sigma_hi, double t_lo, double t_hi, double h);

enum class TargetKind { Polynomial, ExpPolynomial, Translate, Constant };

struct TargetFunction {
  TargetKind kind = TargetKind::Constant;
  std::vector<Complex> coefficients;  // ascending powers
  Complex constant{0.0, 0.0};
  double tau0 = 0.0;

  static TargetFunction polynomial(std::vector<Complex> coefficients);
  static TargetFunction exp_polynomial(std::vector<Complex> coefficients);
  static TargetFunction translate(double tau0);
  static TargetFunction constant_value(Complex value);

  // true only where nonvanishing is structural: exp of a polynomial and
  // nonzero constants; polynomials and translates report false
  bool nonvanishing_certain() const;
};

Complex eval_target(const DirichletSeriesSpec& spec, const TargetFunction& f,
                    Complex s);

struct SupDistance {
  double value = 0.0;       // grid_max + margin
  double grid_max = 0.0;    // max over grid points of |D(s+i tau) - f(s)|
  double margin = 0.0;      // h times the fitted slope bound
  double eval_floor = 0.0;  // largest evaluation error met on the grid
};

SupDistance sup_distance_detail(const DirichletSeriesSpec& spec,
                                const TargetFunction& f, const CompactGrid& K,
                                double tau);

// Grid maximum of |D(s + i tau) - f(s)| plus the continuity margin.
double sup_distance(const DirichletSeriesSpec& spec, const TargetFunction& f,
                    const CompactGrid& K, double tau);

struct TauScanReport {
  double epsilon = 0.0;
  double T = 0.0;
  double dtau = 0.0;
  double good_measure = 0.0;    // cells with sup distance below epsilon
  double ldens_estimate = 0.0;  // good_measure / T
  double best_tau = 0.0;
  double best_error = 0.0;
  double eval_floor = 0.0;
  std::vector<double> histogram;  // good measure per tenth of [0, T]
  // every scanned point as (tau, sup distance), the plotting artifact
  std::vector<std::pair<double, double>> trace;
};

// Scans tau = 0, dtau, 2 dtau, ... through T. The step must resolve the
// fastest oscillation: dtau <= pi / (4 lambda_N).
TauScanReport tau_scan(const DirichletSeriesSpec& spec,
                       const TargetFunction& f, const CompactGrid& K,
                       double epsilon, double T, double dtau);

// Smallest tau in [0, T] driving every phase lambda_j tau within tol of
// target_phases_j on the circle, found by stepping fine enough that no
// tol-ball is skipped. Throws NotFoundError (best achieved in the
// message) when no witness exists in budget.
double kronecker_witness(const std::vector<double>& freqs,
                         const std::vector<double>& target_phases, double tol,
                         double T);

}  // namespace dlab
