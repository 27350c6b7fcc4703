#include "dlab/universality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace dlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Complex horner(const std::vector<Complex>& coeff, Complex s) {
  Complex acc{0.0, 0.0};
  for (auto it = coeff.rbegin(); it != coeff.rend(); ++it) acc = acc * s + *it;
  return acc;
}

// target values over the grid, evaluated once per scan; the floor carries
// the translate evaluation error (other kinds are exact)
struct TargetField {
  std::vector<Complex> values;
  double floor = 0.0;
};

TargetField target_field(const DirichletSeriesSpec& spec,
                         const TargetFunction& f, const CompactGrid& K) {
  TargetField tf;
  tf.values.reserve(K.points.size());
  for (const Complex& s : K.points) {
    if (f.kind == TargetKind::Translate) {
      const auto r =
          eval_direct(spec, s + Complex(0.0, f.tau0), spec.freq.size());
      tf.values.push_back(r.value);
      tf.floor = std::max(tf.floor, r.error_estimate);
    } else {
      tf.values.push_back(eval_target(spec, f, s));
    }
  }
  return tf;
}

SupDistance distance_kernel(const DirichletSeriesSpec& spec,
                            const CompactGrid& K, const TargetField& tf,
                            double tau) {
  const std::size_t N = spec.freq.size();
  std::vector<double> dist(K.points.size());
  SupDistance out;
  out.eval_floor = tf.floor;
  for (std::size_t i = 0; i < K.points.size(); ++i) {
    const auto r = eval_direct(spec, K.points[i] + Complex(0.0, tau), N);
    dist[i] = std::abs(r.value - tf.values[i]);
    out.grid_max = std::max(out.grid_max, dist[i]);
    out.eval_floor = std::max(out.eval_floor, r.error_estimate);
  }
  // slope bound fitted from adjacent differences of the distance
  // landscape; factor 2 covers curvature the samples miss. |grad|g|| is
  // at most |g'|, so sampling the modulus is enough
  double slope = 0.0;
  const double ds = K.spacing_sigma();
  const double dt = K.spacing_t();
  for (std::size_t r = 0; r < K.rows; ++r)
    for (std::size_t c = 0; c + 1 < K.cols; ++c) {
      const std::size_t i = r * K.cols + c;
      slope = std::max(slope, std::abs(dist[i + 1] - dist[i]) / ds);
    }
  for (std::size_t r = 0; r + 1 < K.rows; ++r)
    for (std::size_t c = 0; c < K.cols; ++c) {
      const std::size_t i = r * K.cols + c;
      slope = std::max(slope, std::abs(dist[i + K.cols] - dist[i]) / dt);
    }
  out.margin = K.h * 2.0 * slope;
  out.value = out.grid_max + out.margin;
  return out;
}

double circle_distance(double x) {
  return std::abs(std::remainder(x, 2.0 * std::numbers::pi));
}

}  // namespace

double strip_left_edge(const DirichletSeriesSpec& spec) {
  if (spec.poly.has_value() &&
      spec.freq.generator() != FrequencyGenerator::Explicit) {
    const int d = spec.poly->degree();
    if (spec.freq.generator() == FrequencyGenerator::PolyOfPrimes && d == 1)
      return 2.0 / 3.0;
    if (d >= 1) return 1.0 - 1.0 / (2.0 * d);
  }
  return -kInf;  // finite explicit sums are entire
}

double CompactGrid::spacing_sigma() const {
  return cols > 1 ? (sigma_hi - sigma_lo) / static_cast<double>(cols - 1)
                  : 0.0;
}

double CompactGrid::spacing_t() const {
  return rows > 1 ? (t_hi - t_lo) / static_cast<double>(rows - 1) : 0.0;
}

CompactGrid make_grid(const DirichletSeriesSpec& spec, double sigma_lo,
                      double sigma_hi, double t_lo, double t_hi, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("grid spacing");
  if (!(sigma_lo <= sigma_hi) || !(t_lo <= t_hi))
    throw DomainError("grid rectangle is empty");
  if (!(sigma_hi < 1.0))
    throw DomainError("rectangle must stay left of the sigma = 1 line");
  if (!(sigma_lo > strip_left_edge(spec)))
    throw DomainError("rectangle reaches below the family's strip");

  const auto count = [h](double lo, double hi) -> std::size_t {
    if (hi <= lo) return 1;
    return static_cast<std::size_t>(std::ceil((hi - lo) / h - 1e-12)) + 1;
  };
  CompactGrid K;
  K.sigma_lo = sigma_lo;
  K.sigma_hi = sigma_hi;
  K.t_lo = t_lo;
  K.t_hi = t_hi;
  K.h = h;
  K.cols = count(sigma_lo, sigma_hi);
  K.rows = count(t_lo, t_hi);
  K.points.reserve(K.cols * K.rows);
  for (std::size_t r = 0; r < K.rows; ++r) {
    const double t =
        r + 1 == K.rows ? t_hi : t_lo + static_cast<double>(r) * K.spacing_t();
    for (std::size_t c = 0; c < K.cols; ++c) {
      const double sigma =
          c + 1 == K.cols
              ? sigma_hi
              : sigma_lo + static_cast<double>(c) * K.spacing_sigma();
      K.points.emplace_back(sigma, t);
    }
  }
  return K;
}

TargetFunction TargetFunction::polynomial(std::vector<Complex> coefficients) {
  if (coefficients.empty()) throw DomainError("polynomial target");
  TargetFunction f;
  f.kind = TargetKind::Polynomial;
  f.coefficients = std::move(coefficients);
  return f;
}

TargetFunction TargetFunction::exp_polynomial(
    std::vector<Complex> coefficients) {
  if (coefficients.empty()) throw DomainError("exp-polynomial target");
  TargetFunction f;
  f.kind = TargetKind::ExpPolynomial;
  f.coefficients = std::move(coefficients);
  return f;
}

TargetFunction TargetFunction::translate(double tau0) {
  if (!std::isfinite(tau0)) throw DomainError("translate offset");
  TargetFunction f;
  f.kind = TargetKind::Translate;
  f.tau0 = tau0;
  return f;
}

TargetFunction TargetFunction::constant_value(Complex value) {
  TargetFunction f;
  f.kind = TargetKind::Constant;
  f.constant = value;
  return f;
}

bool TargetFunction::nonvanishing_certain() const {
  if (kind == TargetKind::ExpPolynomial) return true;
  if (kind == TargetKind::Constant) return std::abs(constant) > 0.0;
  return false;
}

Complex eval_target(const DirichletSeriesSpec& spec, const TargetFunction& f,
                    Complex s) {
  switch (f.kind) {
    case TargetKind::Constant:
      return f.constant;
    case TargetKind::Polynomial:
      return horner(f.coefficients, s);
    case TargetKind::ExpPolynomial:
      return std::exp(horner(f.coefficients, s));
    case TargetKind::Translate:
      return eval_direct(spec, s + Complex(0.0, f.tau0), spec.freq.size())
          .value;
  }
  throw DomainError("target kind");
}

SupDistance sup_distance_detail(const DirichletSeriesSpec& spec,
                                const TargetFunction& f, const CompactGrid& K,
                                double tau) {
  if (K.points.empty()) throw DomainError("empty grid");
  if (!std::isfinite(tau)) throw DomainError("translate offset");
  return distance_kernel(spec, K, target_field(spec, f, K), tau);
}

double sup_distance(const DirichletSeriesSpec& spec, const TargetFunction& f,
                    const CompactGrid& K, double tau) {
  return sup_distance_detail(spec, f, K, tau).value;
}

TauScanReport tau_scan(const DirichletSeriesSpec& spec,
                       const TargetFunction& f, const CompactGrid& K,
                       double epsilon, double T, double dtau) {
  if (K.points.empty()) throw DomainError("empty grid");
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("scan horizon");
  if (!(dtau > 0.0) || !std::isfinite(dtau)) throw DomainError("scan step");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
    throw DomainError("scan tolerance");
  const double lambda_top = spec.freq.lambda(spec.freq.size());
  const double resolve = std::numbers::pi / (4.0 * lambda_top);
  if (dtau > resolve * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "step " << dtau << " cannot resolve the fastest phase; need <= "
       << resolve;
    throw ResolutionError(os.str());
  }

  const TargetField tf = target_field(spec, f, K);
  const std::size_t M =
      static_cast<std::size_t>(std::floor(T / dtau * (1.0 + 1e-12))) + 1;
  std::vector<SupDistance> dist(M);
  parallel_for(M, [&](std::size_t k) {
    dist[k] = distance_kernel(spec, K, tf, static_cast<double>(k) * dtau);
  });

  TauScanReport rep;
  rep.epsilon = epsilon;
  rep.T = T;
  rep.dtau = dtau;
  rep.histogram.assign(10, 0.0);
  rep.best_error = kInf;
  rep.eval_floor = tf.floor;
  rep.trace.reserve(M);
  for (std::size_t k = 0; k < M; ++k) {
    const double tau = static_cast<double>(k) * dtau;
    rep.trace.emplace_back(tau, dist[k].value);
    rep.eval_floor = std::max(rep.eval_floor, dist[k].eval_floor);
    if (dist[k].value < rep.best_error) {
      rep.best_error = dist[k].value;
      rep.best_tau = tau;
    }
    if (dist[k].value < epsilon) {
      const double cell = std::min(dtau, T - tau);
      if (cell > 0.0) {
        rep.good_measure += cell;
        const auto bin = std::min<std::size_t>(
            9, static_cast<std::size_t>(tau / T * 10.0));
        rep.histogram[bin] += cell;
      }
    }
  }
  rep.ldens_estimate = rep.good_measure / T;
  return rep;
}

double kronecker_witness(const std::vector<double>& freqs,
                         const std::vector<double>& target_phases, double tol,
                         double T) {
  const std::size_t m = freqs.size();
  if (m < 1 || m > 6) throw DomainError("phase count outside 1..6");
  if (target_phases.size() != m) throw DomainError("phase list length");
  if (!(tol > 0.0) || !(T > 0.0)) throw DomainError("tolerance and horizon");
  for (double l : freqs)
    if (!(l > 0.0) || !std::isfinite(l)) throw DomainError("frequencies");

  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  if (m == 1) {
    double phase = std::fmod(target_phases[0], kTwoPi);
    if (phase < 0.0) phase += kTwoPi;
    const double tau = phase / freqs[0];
    if (tau <= T) return tau;
    std::ostringstream os;
    os << "one-phase witness " << tau << " beyond horizon " << T;
    throw NotFoundError(os.str());
  }

  const double top = *std::max_element(freqs.begin(), freqs.end());
  const double step = tol / (2.0 * top);
  const auto steps = static_cast<std::size_t>(std::floor(T / step)) + 1;
  double best_err = kInf;
  double best_tau = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double tau = static_cast<double>(k) * step;
    double err = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      err = std::max(err, circle_distance(freqs[j] * tau - target_phases[j]));
    if (err < tol) return tau;
    if (err < best_err) {
      best_err = err;
      best_tau = tau;
    }
  }
  std::ostringstream os;
  os << "no joint phase alignment in [0, " << T << "]: best tau=" << best_tau
     << " err=" << best_err;
  throw NotFoundError(os.str());
}

}  // namespace dlab
