// Compact grids, sup-norm distances with continuity margins, tau scans,
// and the Kronecker phase witness.

#include <cmath>
#include <numbers>

#include "dlab/universality.hpp"
#include "doctest.h"

using dlab::CompactGrid;
using dlab::Complex;
using dlab::DirichletSeriesSpec;
using dlab::TargetFunction;

namespace {

DirichletSeriesSpec alternating_primes(std::size_t N) {
  dlab::CoefficientModel cm;
  cm.kind = dlab::CoefficientKind::Alternating;
  return dlab::make_series(dlab::FrequencyGenerator::PolyOfPrimes,
                           dlab::RealPolynomial({0.0, 1.0}), cm, N);
}

DirichletSeriesSpec three_term() {
  return dlab::make_explicit_series(
      {std::log(2.0), std::log(3.0), std::log(5.0)},
      {Complex(1, 0), Complex(1, 0), Complex(1, 0)});
}

double circ(double x) {
  return std::abs(std::remainder(x, 2.0 * std::numbers::pi));
}

}  // namespace

TEST_CASE("strip_left_edge: family-keyed") {
  CHECK(dlab::strip_left_edge(alternating_primes(32)) ==
        doctest::Approx(2.0 / 3.0));

  dlab::CoefficientModel pl;
  pl.kind = dlab::CoefficientKind::PolyLog;
  pl.Q = dlab::RealPolynomial({1.0});
  auto squared = dlab::make_series(dlab::FrequencyGenerator::PolyOfPrimes,
                                   dlab::RealPolynomial({0.0, 0.0, 1.0}), pl,
                                   32);
  CHECK(dlab::strip_left_edge(squared) == doctest::Approx(0.75));
  auto integers = dlab::make_series(dlab::FrequencyGenerator::PolyOfIntegers,
                                    dlab::RealPolynomial({0.0, 0.0, 1.0}), pl,
                                    32);
  CHECK(dlab::strip_left_edge(integers) == doctest::Approx(0.75));
  CHECK(dlab::strip_left_edge(three_term()) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("make_grid: coverage and validation") {
  auto spec = alternating_primes(32);
  auto K = dlab::make_grid(spec, 0.75, 0.9, 0.0, 0.5, 0.05);
  CHECK(K.cols == 4);
  CHECK(K.rows == 11);
  CHECK(K.points.size() == 44);
  CHECK(K.spacing_sigma() <= 0.05 + 1e-15);
  CHECK(K.spacing_t() <= 0.05 + 1e-15);
  CHECK(K.points.front() == Complex(0.75, 0.0));
  CHECK(K.points.back() == Complex(0.9, 0.5));

  // degenerate rectangle collapses to a single sample
  auto P = dlab::make_grid(spec, 0.8, 0.8, 0.1, 0.1, 0.05);
  CHECK(P.points.size() == 1);
  CHECK(P.spacing_sigma() == 0.0);

  CHECK_THROWS_AS(dlab::make_grid(spec, 0.75, 1.0, 0, 0.5, 0.05),
                  dlab::DomainError);
  CHECK_THROWS_AS(dlab::make_grid(spec, 0.6, 0.9, 0, 0.5, 0.05),
                  dlab::DomainError);
  CHECK_THROWS_AS(dlab::make_grid(spec, 0.9, 0.75, 0, 0.5, 0.05),
                  dlab::DomainError);
  CHECK_THROWS_AS(dlab::make_grid(spec, 0.75, 0.9, 0, 0.5, 0.0),
                  dlab::DomainError);
  // explicit lists carry no left edge
  CHECK_NOTHROW(dlab::make_grid(three_term(), -2.0, 0.9, 0, 1, 0.25));
}

TEST_CASE("targets: evaluation and nonvanishing flags") {
  auto spec = three_term();
  const Complex s(0.8, 0.3);

  auto poly = TargetFunction::polynomial({{1, 0}, {0, 2}, {3, 0}});
  CHECK(std::abs(dlab::eval_target(spec, poly, s) -
                 (Complex(1, 0) + Complex(0, 2) * s + Complex(3, 0) * s * s)) <=
        1e-15);
  auto ep = TargetFunction::exp_polynomial({{0, 0}, {1, 0}});
  CHECK(std::abs(dlab::eval_target(spec, ep, s) - std::exp(s)) <= 1e-15);
  auto tr = TargetFunction::translate(2.5);
  CHECK(std::abs(dlab::eval_target(spec, tr, s) -
                 dlab::eval_direct(spec, s + Complex(0, 2.5), 3).value) == 0.0);

  CHECK(ep.nonvanishing_certain());
  CHECK(TargetFunction::constant_value({0.1, 0}).nonvanishing_certain());
  CHECK_FALSE(TargetFunction::constant_value({0, 0}).nonvanishing_certain());
  CHECK_FALSE(poly.nonvanishing_certain());
  CHECK_FALSE(tr.nonvanishing_certain());

  CHECK_THROWS_AS(TargetFunction::polynomial({}), dlab::DomainError);
  CHECK_THROWS_AS(TargetFunction::exp_polynomial({}), dlab::DomainError);
  CHECK_THROWS_AS(TargetFunction::translate(
                      std::numeric_limits<double>::infinity()),
                  dlab::DomainError);
}

TEST_CASE("sup_distance: single-term modulus is tau- and t-independent") {
  auto one = dlab::make_explicit_series({std::log(2.0)}, {Complex(1, 0)});
  auto K = dlab::make_grid(one, 0.75, 0.9, 0.0, 0.5, 0.05);
  auto zero = TargetFunction::constant_value({0, 0});
  auto a = dlab::sup_distance_detail(one, zero, K, 13.0);
  auto b = dlab::sup_distance_detail(one, zero, K, 50.0);
  CHECK(a.grid_max ==
        doctest::Approx(std::exp(-std::log(2.0) * 0.75)).epsilon(1e-15));
  CHECK(std::abs(a.grid_max - b.grid_max) <= 1e-15);
  CHECK(a.value == a.grid_max + a.margin);
  CHECK(a.margin > 0.0);
}

TEST_CASE("sup_distance: translate self-match is exact") {
  auto spec = alternating_primes(200);
  auto K = dlab::make_grid(spec, 0.75, 0.9, 0.0, 0.5, 0.05);
  auto f = TargetFunction::translate(17.25);
  auto d = dlab::sup_distance_detail(spec, f, K, 17.25);
  CHECK(d.grid_max == 0.0);
  CHECK(d.margin == 0.0);
  CHECK(d.value == 0.0);
  CHECK(d.eval_floor > 0.0);
}

TEST_CASE("sup_distance: refining the grid moves the value less than the margin") {
  // reference values computed once at this truncation and pinned
  auto spec = alternating_primes(2000);
  auto f = TargetFunction::constant_value({0.1, 0.0});
  auto coarse = dlab::make_grid(spec, 0.75, 0.9, 0.0, 0.5, 0.05);
  auto fine = dlab::make_grid(spec, 0.75, 0.9, 0.0, 0.5, 0.0125);
  auto dc = dlab::sup_distance_detail(spec, f, coarse, 50.0);
  auto df = dlab::sup_distance_detail(spec, f, fine, 50.0);
  CHECK(dc.grid_max == doctest::Approx(0.44423697979634724).epsilon(1e-12));
  CHECK(std::abs(dc.value - df.value) < dc.margin);
  // the finer grid sees at least as much of the landscape
  CHECK(df.grid_max >= dc.grid_max - 1e-15);
}

TEST_CASE("tau_scan: resolution gate and trivial tolerances") {
  auto spec = three_term();
  auto K = dlab::make_grid(spec, 0.75, 0.8, 0.0, 0.2, 0.05);
  auto f = TargetFunction::constant_value({0.1, 0.0});
  // fastest phase is log 5; the quarter-period bound is pi/(4 log 5)
  CHECK_THROWS_AS(dlab::tau_scan(spec, f, K, 0.1, 10.0, 0.6),
                  dlab::ResolutionError);
  CHECK_THROWS_AS(dlab::tau_scan(spec, f, K, 0.1, 0.0, 0.25),
                  dlab::DomainError);
  CHECK_THROWS_AS(dlab::tau_scan(spec, f, K, -0.1, 10.0, 0.25),
                  dlab::DomainError);

  auto rep = dlab::tau_scan(spec, f, K, 0.0, 10.0, 0.25);
  CHECK(rep.good_measure == 0.0);
  CHECK(rep.ldens_estimate == 0.0);
  CHECK(rep.best_error > 0.0);
}

TEST_CASE("tau_scan: translate recurrence against the phase-torus oracle") {
  auto spec = three_term();
  auto K = dlab::make_grid(spec, 0.75, 0.8, 0.0, 0.2, 0.05);
  const double tau0 = 21.3;  // deliberately off every scan grid used here
  auto f = TargetFunction::translate(tau0);

  auto rep = dlab::tau_scan(spec, f, K, 0.1, 50.0, 0.125);
  CHECK(rep.best_tau == 21.25);
  CHECK(rep.best_error == doctest::Approx(0.0440281).epsilon(1e-4));
  CHECK(rep.good_measure == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(rep.ldens_estimate == doctest::Approx(0.0075).epsilon(1e-9));

  // phase-torus route: the alignment defect at the reported best tau
  // bounds the sup distance through the term amplitudes at the left edge
  const std::vector<double> ls = {std::log(2.0), std::log(3.0), std::log(5.0)};
  double defect = 0.0;
  for (double l : ls) defect = std::max(defect, circ(l * (rep.best_tau - tau0)));
  double amp = 0.0;
  for (double l : ls) amp += std::exp(-l * 0.75);
  CHECK(defect < 0.1);  // a genuine alignment, not a lucky cancellation
  auto at_best = dlab::sup_distance_detail(spec, f, K, rep.best_tau);
  CHECK(at_best.grid_max <= amp * defect);
}

TEST_CASE("tau_scan: ldens monotone in epsilon, histogram sums to the measure") {
  auto spec = three_term();
  auto K = dlab::make_grid(spec, 0.75, 0.8, 0.0, 0.2, 0.05);
  auto f = TargetFunction::translate(21.3);
  double prev = 0.0;
  for (double eps : {0.05, 0.1, 0.3}) {
    auto rep = dlab::tau_scan(spec, f, K, eps, 50.0, 0.125);
    CHECK(rep.ldens_estimate >= prev);
    prev = rep.ldens_estimate;
    CHECK(rep.good_measure <= rep.T);
    double hsum = 0.0;
    for (double b : rep.histogram) hsum += b;
    CHECK(hsum == doctest::Approx(rep.good_measure).epsilon(1e-12));
    REQUIRE(rep.histogram.size() == 10);
  }
}

TEST_CASE("tau_scan: halving the step never raises the best error") {
  auto spec = three_term();
  auto K = dlab::make_grid(spec, 0.75, 0.8, 0.0, 0.2, 0.05);
  auto f = TargetFunction::translate(21.3);
  double prev = std::numeric_limits<double>::infinity();
  for (double dtau : {0.25, 0.125, 0.0625, 0.03125}) {
    auto rep = dlab::tau_scan(spec, f, K, 0.05, 30.0, dtau);
    CHECK(rep.best_error <= prev + 1e-15);
    prev = rep.best_error;
  }
  CHECK(prev == doctest::Approx(0.0109837).epsilon(1e-4));
}

TEST_CASE("tau_scan: on-grid translate pins best_tau exactly") {
  auto spec = alternating_primes(200);
  auto K = dlab::make_grid(spec, 0.75, 0.9, 0.0, 0.5, 0.1);
  auto f = TargetFunction::translate(6.0);
  auto rep = dlab::tau_scan(spec, f, K, 1e-6, 10.0, 0.0625);
  CHECK(rep.best_tau == 6.0);
  CHECK(rep.best_error == 0.0);
  CHECK(rep.good_measure >= rep.dtau);
  CHECK(rep.eval_floor > 0.0);
}

TEST_CASE("tau_scan: payload identical across thread counts") {
  auto spec = three_term();
  auto K = dlab::make_grid(spec, 0.75, 0.8, 0.0, 0.2, 0.05);
  auto f = TargetFunction::translate(21.3);
  dlab::set_thread_cap(1);
  auto a = dlab::tau_scan(spec, f, K, 0.1, 20.0, 0.125);
  dlab::set_thread_cap(4);
  auto b = dlab::tau_scan(spec, f, K, 0.1, 20.0, 0.125);
  dlab::set_thread_cap(0);
  CHECK(a.best_tau == b.best_tau);
  CHECK(a.best_error == b.best_error);
  CHECK(a.good_measure == b.good_measure);
  for (std::size_t i = 0; i < 10; ++i)
    CHECK(a.histogram[i] == b.histogram[i]);
}

TEST_CASE("kronecker_witness: one phase is solved exactly") {
  const double pi = std::numbers::pi;
  CHECK(dlab::kronecker_witness({2.0}, {pi / 2.0}, 0.1, 10.0) == pi / 4.0);
  // reduction into one turn of the circle
  CHECK(dlab::kronecker_witness({1.0}, {-pi / 2.0}, 0.1, 10.0) ==
        doctest::Approx(3.0 * pi / 2.0).epsilon(1e-15));
  CHECK_THROWS_AS(dlab::kronecker_witness({1e-3}, {3.0}, 0.1, 1.0),
                  dlab::NotFoundError);
}

TEST_CASE("kronecker_witness: two and three phases against direct check") {
  const double pi = std::numbers::pi;
  const std::vector<double> ls = {std::log(2.0), std::log(3.0)};
  const double tau = dlab::kronecker_witness(ls, {pi, pi}, 0.1, 1e4);
  CHECK(circ(ls[0] * tau - pi) < 0.1);
  CHECK(circ(ls[1] * tau - pi) < 0.1);

  const std::vector<double> l3 = {std::log(2.0), std::log(3.0), std::log(5.0)};
  const std::vector<double> goal = {2.71, 0.9, 4.4};
  const double w = dlab::kronecker_witness(l3, goal, 0.2, 1e5);
  for (std::size_t j = 0; j < 3; ++j) CHECK(circ(l3[j] * w - goal[j]) < 0.2);
}

TEST_CASE("kronecker_witness: dependent frequencies cannot align") {
  // lambda_2 = 2 lambda_1 confines the flow to a line in the torus;
  // (pi, pi) sits off that line by pi at best
  try {
    dlab::kronecker_witness({1.0, 2.0}, {std::numbers::pi, std::numbers::pi},
                            0.1, 2000.0);
    FAIL("expected NotFoundError");
  } catch (const dlab::NotFoundError& e) {
    CHECK(std::string(e.what()).find("best tau=") != std::string::npos);
  }
}

TEST_CASE("kronecker_witness: argument validation") {
  std::vector<double> seven(7, 1.0);
  CHECK_THROWS_AS(dlab::kronecker_witness(seven, seven, 0.1, 10.0),
                  dlab::DomainError);
  CHECK_THROWS_AS(dlab::kronecker_witness({}, {}, 0.1, 10.0),
                  dlab::DomainError);
  CHECK_THROWS_AS(dlab::kronecker_witness({1.0}, {1.0, 2.0}, 0.1, 10.0),
                  dlab::DomainError);
  CHECK_THROWS_AS(dlab::kronecker_witness({1.0}, {1.0}, 0.0, 10.0),
                  dlab::DomainError);
  CHECK_THROWS_AS(dlab::kronecker_witness({-1.0}, {1.0}, 0.1, 10.0),
                  dlab::DomainError);
}
