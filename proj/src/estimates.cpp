#include "dlab/estimates.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>

#include "dlab/quadrature.hpp"

namespace dlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// nearest-neighbour gaps for a strictly increasing frequency prefix;
// numerically coincident neighbours are rejected, a lone frequency gets
// an infinite gap so its error share is zero
std::vector<double> neighbour_gaps(const FrequencySequence& fr,
                                   std::size_t N) {
  std::vector<double> theta(N, kInf);
  for (std::size_t n = 1; n < N; ++n) {
    const double lo = fr.lambda(n);
    const double hi = fr.lambda(n + 1);
    const double gap = hi - lo;
    if (gap <= 1e-12 * std::max(1.0, std::abs(hi)))
      throw ZeroGapError("frequencies coincide near lambda = " +
                         std::to_string(lo));
    theta[n - 1] = std::min(theta[n - 1], gap);
    theta[n] = gap;
  }
  return theta;
}

// the integrand t -> D(sigma + it) for the chosen evaluation path,
// packaged so the parallel panel loop never sees an exception
struct LineEvaluator {
  std::function<Complex(double)> eval;
  std::shared_ptr<std::atomic<bool>> failed;
  std::shared_ptr<std::mutex> mutex;
  std::shared_ptr<std::string> message;

  Complex operator()(double t) const {
    if (failed->load(std::memory_order_relaxed)) return {0.0, 0.0};
    try {
      return eval(t);
    } catch (const Error& e) {
      bool expected = false;
      if (failed->compare_exchange_strong(expected, true)) {
        std::lock_guard<std::mutex> lock(*mutex);
        *message = e.what();
      }
      return {0.0, 0.0};
    }
  }
};

LineEvaluator make_line_evaluator(const DirichletSeriesSpec& spec,
                                  double sigma, double T,
                                  EvalMethod method) {
  LineEvaluator ev;
  ev.failed = std::make_shared<std::atomic<bool>>(false);
  ev.mutex = std::make_shared<std::mutex>();
  ev.message = std::make_shared<std::string>();
  switch (method) {
    case EvalMethod::Direct: {
      // the cached partial sum as an exponential sum in t, with the
      // sigma-dependence folded into the coefficients once
      const std::size_t N = spec.freq.size();
      auto lam = std::make_shared<std::vector<double>>(spec.freq.lambdas());
      auto b = std::make_shared<std::vector<Complex>>();
      b->reserve(N);
      for (std::size_t n = 1; n <= N; ++n) {
        const double e = -(*lam)[n - 1] * sigma;
        if (e > 700.0) throw OverflowError("term overflows at this sigma");
        b->push_back(spec.coefficient(n) * std::exp(e));
      }
      ev.eval = [lam, b](double t) {
        KahanComplexSum acc;
        for (std::size_t i = 0; i < b->size(); ++i) {
          const double phase = -(*lam)[i] * t;
          acc.add((*b)[i] * Complex(std::cos(phase), std::sin(phase)));
        }
        return acc.value();
      };
      break;
    }
    case EvalMethod::Smoothed: {
      // weight scale chosen so the whole cache participates while the
      // cutoff inside the smoothed pass never truncates mid-mass
      const double X = spec.freq.scale(spec.freq.size()) / 40.0;
      ev.eval = [&spec, sigma, X](double t) {
        return eval_smoothed(spec, {sigma, t}, X).value;
      };
      break;
    }
    case EvalMethod::Afe: {
      // the aperture |t| <= delta x must cover [0, T]
      const double x = 4.2 * T + 40.0;
      ev.eval = [&spec, sigma, x](double t) {
        return eval_afe(spec, {sigma, t}, x).value;
      };
      break;
    }
    case EvalMethod::EulerMaclaurin: {
      ev.eval = [&spec, sigma](double t) {
        return euler_maclaurin(spec, {sigma, t}, 40).value;
      };
      break;
    }
  }
  return ev;
}

// least-squares slope of y against x
double lsq_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double den = n * sxx - sx * sx;
  if (den <= 0.0) throw ComputeError("degenerate abscissa grid in fit");
  return (n * sxy - sx * sy) / den;
}

// gap-weighted smoothed square sum at a given smoothing scale
double smoothed_gap_sum(const DirichletSeriesSpec& spec,
                        const std::vector<double>& theta, double sigma,
                        double X) {
  KahanSum acc;
  const std::size_t N = spec.freq.size();
  for (std::size_t n = 1; n <= N; ++n) {
    if (!std::isfinite(theta[n - 1])) continue;
    const double an = spec.coefficient_abs(n);
    const double w = -2.0 * spec.freq.lambda(n) * sigma -
                     2.0 * spec.freq.scale(n) / X;
    if (w < -700.0) continue;
    acc.add(an * an * std::exp(w) / theta[n - 1]);
  }
  return acc.value();
}

// coefficient mass in [x, x + alpha/x^2]; count reports emptiness
double window_mass(const DirichletSeriesSpec& spec, double x, double alpha,
                   std::size_t* count) {
  const auto& lam = spec.freq.lambdas();
  const double lo = x;
  const double hi = x + alpha / (x * x);
  const auto first = std::lower_bound(lam.begin(), lam.end(), lo);
  const auto last = std::upper_bound(lam.begin(), lam.end(), hi);
  *count = static_cast<std::size_t>(last - first);
  KahanSum acc;
  for (auto it = first; it != last; ++it) {
    const std::size_t n = static_cast<std::size_t>(it - lam.begin()) + 1;
    acc.add(spec.coefficient_abs(n));
  }
  return acc.value();
}

}  // namespace

std::pair<double, double> mv_bound(const std::vector<Complex>& coeffs,
                                   const FrequencySequence& freqs, double T) {
  if (coeffs.empty()) throw DomainError("mv_bound needs at least one term");
  if (coeffs.size() > freqs.size())
    throw DomainError("more coefficients than frequencies");
  if (!(T > 0.0)) throw DomainError("T must be positive");
  const std::size_t N = coeffs.size();
  const auto theta = neighbour_gaps(freqs, N);
  KahanSum squares, weighted;
  for (std::size_t n = 0; n < N; ++n) {
    const double a2 = std::norm(coeffs[n]);
    squares.add(a2);
    if (std::isfinite(theta[n])) weighted.add(a2 / theta[n]);
  }
  return {T * squares.value(), weighted.value()};
}

MomentReport moment_quadrature(const DirichletSeriesSpec& spec, double sigma,
                               double T, EvalMethod method) {
  if (!(T > 0.0)) throw DomainError("T must be positive");
  const std::size_t N = spec.freq.size();
  if (N == 0) throw DomainError("empty series");

  MomentReport rep;
  rep.sigma = sigma;
  rep.T = T;

  // square-sum prediction and its gap-weighted companion
  const auto theta = neighbour_gaps(spec.freq, N);
  KahanSum main_sum, err_sum;
  double amp_max = 0.0;
  std::vector<double> amps(N);
  for (std::size_t n = 1; n <= N; ++n) {
    const double e = -spec.freq.lambda(n) * sigma;
    const double amp = e > 700.0 ? kInf : spec.coefficient_abs(n) * std::exp(e);
    if (!std::isfinite(amp)) throw OverflowError("term overflows");
    amps[n - 1] = amp;
    main_sum.add(amp * amp);
    if (std::isfinite(theta[n - 1])) err_sum.add(amp * amp / theta[n - 1]);
    amp_max = std::max(amp_max, amp);
  }
  rep.mv_main = main_sum.value();
  rep.mv_error = err_sum.value() / T;

  // highest frequency still carrying weight at this sigma sets the node
  // density: at least 8 nodes per oscillation at frequency Lambda
  double Lambda = spec.freq.lambda(1);
  for (std::size_t n = 1; n <= N; ++n)
    if (amps[n - 1] >= 1e-6 * amp_max) Lambda = spec.freq.lambda(n);
  Lambda = std::max(Lambda, 1e-3);

  auto ev = make_line_evaluator(spec, sigma, T, method);
  // sequential probes surface domain problems with their real type
  // before the parallel panel loop runs
  for (double t : {0.0, 0.5 * T, T}) ev.eval(t);

  Integrand square = [&ev](double t) {
    const Complex v = ev(t);
    return Complex(std::norm(v), 0.0);
  };

  const std::size_t coarse = std::max<std::size_t>(
      4, static_cast<std::size_t>(
             std::ceil(T * Lambda / (4.0 * std::numbers::pi))));
  const Complex c1 = composite_gauss_legendre(square, 0.0, T, coarse, true);
  const Complex c2 =
      composite_gauss_legendre(square, 0.0, T, 2 * coarse, true);
  if (ev.failed->load()) throw ComputeError(*ev.message);

  rep.quadrature_value = c2.real() / T;
  rep.node_count = 32 * coarse;
  const double change = std::abs(c2.real() - c1.real());
  rep.refinement_stable =
      change < 0.01 * std::max(std::abs(c2.real()), 1e-300);
  return rep;
}

std::vector<MomentReport> moment_sup_scan(const DirichletSeriesSpec& spec,
                                          double sigma, EvalMethod method,
                                          const std::vector<double>& Ts) {
  std::vector<MomentReport> out;
  out.reserve(Ts.size());
  for (double T : Ts) out.push_back(moment_quadrature(spec, sigma, T, method));
  return out;
}

double moment_growth_exponent(int d, double sigma0, double sigma1,
                              double eps) {
  if (d < 1) throw DomainError("degree must be at least 1");
  if (!(eps > 0.0) || eps >= sigma1 || eps >= static_cast<double>(d))
    throw DomainError("eps must lie in (0, min(sigma1, d))");
  const double dd = static_cast<double>(d);
  return (2.0 * (dd - 1.0 + eps) + (1.0 - 2.0 * sigma0) * (dd - eps) + 1.0) /
         ((dd - eps) * (sigma1 - eps));
}

VdcResult vdc_transform(const std::function<double(double)>& g,
                        const std::function<double(double)>& gprime,
                        const std::function<double(double)>& f,
                        const std::function<double(double)>& fprime,
                        double a, double b, double C) {
  if (!(a < b)) throw DomainError("need a < b");
  if (!(C > 0.0)) throw DomainError("certificate constant must be positive");

  // dense sampling stands in for the analytic hypotheses
  const int kSamples = 1000;
  const double h = (b - a) / (kSamples - 1);
  double prev_gp = 0.0, prev_fp = 0.0;
  double fp_dir = 0.0;  // sign of the first nonzero f' increment
  for (int i = 0; i < kSamples; ++i) {
    const double u = (i + 1 == kSamples) ? b : a + h * i;
    const double gu = g(u);
    const double gp = gprime(u);
    const double fp = fprime(u);
    const double gslack = 1e-10 * (1.0 + std::abs(gu));
    if (!(gu > 0.0))
      throw HypothesisError("g not positive at u = " + std::to_string(u));
    if (gp > gslack)
      throw HypothesisError("g increasing at u = " + std::to_string(u));
    if (!(std::abs(fp) < 0.5))
      throw HypothesisError("|f'| reaches " + std::to_string(std::abs(fp)) +
                            " at u = " + std::to_string(u));
    if (i > 0) {
      if (gp < prev_gp - 1e-10 * (1.0 + std::abs(prev_gp)))
        throw HypothesisError("g not convex at u = " + std::to_string(u));
      const double dfp = fp - prev_fp;
      const double fslack = 1e-10 * (1.0 + std::abs(fp));
      if (std::abs(dfp) > fslack) {
        if (fp_dir == 0.0)
          fp_dir = dfp > 0.0 ? 1.0 : -1.0;
        else if (dfp * fp_dir < -fslack)
          throw HypothesisError("f' not monotonic at u = " +
                                std::to_string(u));
      }
    }
    prev_gp = gp;
    prev_fp = fp;
  }

  Integrand osc = [&g, &f](double u) {
    const double phase = 2.0 * std::numbers::pi * f(u);
    return g(u) * Complex(std::cos(phase), std::sin(phase));
  };
  const double abs_tol = 1e-13 * (1.0 + g(a)) * (b - a);
  auto q = integrate_adaptive(osc, a, b, abs_tol, 1e-11);

  VdcResult out;
  out.integral = q.value;
  out.error_cert = C * (g(a) + std::abs(gprime(a)));
  out.evaluations = q.evaluations;
  return out;
}

TailSumResult tail_sum_check(double a, double b, double c, double beta,
                             double sigma, double X,
                             const DirichletSeriesSpec& spec) {
  if (!(b > 0.0) || !(c > 0.0) || !(beta > 0.0))
    throw DomainError("b, c, beta must be positive");
  if (!(X > 0.0)) throw DomainError("X must be positive");
  if (!(sigma > beta / 2.0))
    throw HypothesisError("needs sigma > beta/2");
  const std::size_t N = spec.freq.size();
  if (N < 4) throw DomainError("prefix too short to verify hypotheses");

  // frequency growth and gap hypotheses, exact on the prefix
  for (std::size_t n = 1; n <= N; ++n) {
    const double lam = spec.freq.lambda(n);
    if (lam < b * std::log(static_cast<double>(n)) - 1e-12)
      throw HypothesisError("frequency growth below b log n at n = " +
                            std::to_string(n));
  }
  const auto theta = neighbour_gaps(spec.freq, N);
  for (std::size_t n = 1; n <= N; ++n) {
    if (!std::isfinite(theta[n - 1])) continue;
    const double floor_gap = c * std::exp(-beta * spec.freq.lambda(n));
    if (theta[n - 1] < floor_gap * (1.0 - 1e-12))
      throw HypothesisError("gap below c exp(-beta lambda) at n = " +
                            std::to_string(n));
  }
  // coefficient envelope n^a: the late-prefix ratio must not outgrow the
  // early one (log factors fit comfortably; a genuine power excess fails)
  double early = 0.0, late = 0.0;
  for (std::size_t n = 1; n <= N; ++n) {
    const double ratio =
        spec.coefficient_abs(n) / std::pow(static_cast<double>(n), a);
    if (n <= std::max<std::size_t>(N / 10, 2)) early = std::max(early, ratio);
    if (n >= N - N / 10) late = std::max(late, ratio);
  }
  if (late > 2.0 * early + 1e-12)
    throw HypothesisError("coefficient envelope n^a exceeded near n = " +
                          std::to_string(N));

  TailSumResult out;
  out.exponent = (2.0 * a + (beta - 2.0 * sigma) * b + 1.0) / b;
  out.S = smoothed_gap_sum(spec, theta, sigma, X);

  // calibrate the constant at smaller smoothing scales, then test the
  // envelope at X itself with a factor-2 margin
  double fitted = 0.0;
  for (double frac : {1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0, 1.0 / 2.0}) {
    const double Xc = X * frac;
    const double Sc = smoothed_gap_sum(spec, theta, sigma, Xc);
    const double envelope = std::max(1.0, std::pow(Xc, out.exponent));
    fitted = std::max(fitted, Sc / envelope);
  }
  out.fitted_constant = fitted;
  out.bound = 2.0 * fitted * std::max(1.0, std::pow(X, out.exponent));
  out.within = out.S <= out.bound;
  return out;
}

double interval_abs_sum(const DirichletSeriesSpec& spec, double x,
                        double alpha) {
  if (!(x > 0.0) || !(alpha > 0.0))
    throw DomainError("window parameters must be positive");
  std::size_t count = 0;
  const double mass = window_mass(spec, x, alpha, &count);
  if (count == 0)
    throw EmptyIntervalError("no frequency in [" + std::to_string(x) + ", " +
                             std::to_string(x + alpha / (x * x)) + "]");
  return mass;
}

DdensReport ddens_check(const DirichletSeriesSpec& spec, double alpha,
                        double beta, const std::vector<double>& x_grid,
                        double tolerance) {
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
  if (x_grid.size() < 2) throw DomainError("need at least two grid points");
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    if (!(x_grid[i] > 0.0)) throw DomainError("grid points must be positive");
    if (i > 0 && !(x_grid[i] > x_grid[i - 1]))
      throw DomainError("grid must strictly increase");
  }

  DdensReport rep;
  rep.alpha = alpha;
  rep.beta = beta;
  rep.x_grid = x_grid;
  rep.interval_sums.assign(x_grid.size(), 0.0);
  rep.empty_window.assign(x_grid.size(), false);

  std::vector<std::size_t> counts(x_grid.size(), 0);
  parallel_for(x_grid.size(), [&](std::size_t i) {
    rep.interval_sums[i] =
        window_mass(spec, x_grid[i], alpha, &counts[i]);
  });

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    if (counts[i] == 0 || rep.interval_sums[i] <= 0.0) {
      rep.empty_window[i] = true;
      rep.interval_sums[i] = 0.0;
      continue;
    }
    xs.push_back(x_grid[i]);
    ys.push_back(std::log(rep.interval_sums[i]));
  }
  if (xs.size() < 2)
    throw ComputeError("too few populated windows for the exponent fit");

  rep.fitted_exponent = lsq_slope(xs, ys);
  rep.target_exponent = abscissas(spec).sigma_a - beta;
  rep.pass = rep.fitted_exponent >= rep.target_exponent - tolerance;
  return rep;
}

}  // namespace dlab
