#include "dlab/random_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dlab {

namespace {

constexpr double kSigmaEdge = 0.5 + 0.01;  // convergence margin for products

// counter-based mix: Weyl step plus a 64-bit finalizer, so entry n needs
// no predecessor state
std::uint64_t mix64(std::uint64_t seed, std::uint64_t n) {
  std::uint64_t z = seed + n * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// factor data w = X_n p_n^{-s}; the product and its log share this
Complex factor_w(const RandomSeriesInstance& inst, const Complex& s,
                 std::size_t n) {
  return inst.spec.coefficient(n) * std::exp(-s * inst.spec.freq.lambda(n));
}

void require_margin(const Complex& s) {
  if (!(s.real() > kSigmaEdge))
    throw DomainError("needs Re s > 0.51 for factorwise convergence");
}

void require_truncation(const RandomSeriesInstance& inst, std::size_t N) {
  if (N == 0 || N > inst.N)
    throw DomainError("truncation outside the sampled range");
}

}  // namespace

Complex RandomSignModel::value(std::uint64_t n) const {
  const std::uint64_t bits = mix64(seed, n);
  if (kind == SignKind::Rademacher)
    return (bits >> 63) ? Complex(-1.0, 0.0) : Complex(1.0, 0.0);
  // 53 uniform bits drive the angle
  const double u =
      static_cast<double>(bits >> 11) * 0x1.0p-53;  // in [0, 1)
  const double ang = 2.0 * std::numbers::pi * u;
  return {std::cos(ang), std::sin(ang)};
}

std::vector<Complex> sample(const RandomSignModel& model, std::size_t N) {
  if (N == 0) throw DomainError("need at least one sample");
  std::vector<Complex> out(N);
  parallel_for(N, [&](std::size_t i) {
    out[i] = model.value(static_cast<std::uint64_t>(i) + 1);
  });
  return out;
}

std::string RandomSeriesInstance::digest() const {
  const std::size_t head = std::min<std::size_t>(N, 64);
  std::vector<double> flat;
  flat.reserve(2 * head);
  for (std::size_t n = 1; n <= head; ++n) {
    const Complex c = spec.coefficient(n);
    flat.push_back(c.real());
    flat.push_back(c.imag());
  }
  const std::uint64_t h =
      fnv1a64(flat.data(), flat.size() * sizeof(double));
  std::string kind_name =
      model.kind == SignKind::Steinhaus ? "steinhaus" : "rademacher";
  return kind_name + ":" + hex64(model.seed) + ":" + std::to_string(N) +
         ":" + hex64(h);
}

RandomSeriesInstance make_instance(const RandomSignModel& model,
                                   std::size_t N) {
  RandomSeriesInstance inst;
  inst.model = model;
  inst.N = N;
  CoefficientModel coeff;
  coeff.kind = CoefficientKind::Random;
  coeff.values = sample(model, N);
  inst.spec = make_series(FrequencyGenerator::PolyOfPrimes,
                          RealPolynomial({0.0, 1.0}), coeff, N);
  return inst;
}

Complex euler_product(const RandomSeriesInstance& inst, const Complex& s,
                      std::size_t N) {
  require_margin(s);
  require_truncation(inst, N);
  Complex prod(1.0, 0.0);
  for (std::size_t n = 1; n <= N; ++n) {
    const Complex factor = Complex(1.0, 0.0) - factor_w(inst, s, n);
    if (std::abs(factor) < 1e-14)
      throw ZeroFactorError("factor vanishes at n = " + std::to_string(n));
    prod /= factor;
  }
  return prod;
}

Complex log_euler_product(const RandomSeriesInstance& inst, const Complex& s,
                          std::size_t N) {
  require_margin(s);
  require_truncation(inst, N);
  KahanComplexSum acc;
  for (std::size_t n = 1; n <= N; ++n) {
    const Complex factor = Complex(1.0, 0.0) - factor_w(inst, s, n);
    if (std::abs(factor) < 1e-14)
      throw ZeroFactorError("factor vanishes at n = " + std::to_string(n));
    acc.add(-std::log(factor));
  }
  return acc.value();
}

Complex correction_factor(const Complex& w) {
  const double r = std::abs(w);
  if (!(r < 1.0)) throw DomainError("correction series needs |w| < 1");
  KahanComplexSum acc;
  Complex pw = w * w;  // w^k, starting at k = 2
  for (int k = 2; k <= 2000; ++k) {
    const Complex term = pw / static_cast<double>(k);
    acc.add(term);
    if (std::abs(term) < 1e-19) break;
    pw *= w;
  }
  return acc.value();
}

Complex correction_series(const RandomSeriesInstance& inst, const Complex& s,
                          std::size_t N) {
  require_margin(s);
  require_truncation(inst, N);
  std::vector<Complex> parts(N);
  parallel_for(N, [&](std::size_t i) {
    parts[i] = correction_factor(factor_w(inst, s, i + 1));
  });
  KahanComplexSum acc;
  for (const Complex& p : parts) acc.add(p);  // fixed index order
  return acc.value();
}

OrderFitResult order_fit(const RandomSeriesInstance& inst, double sigma,
                         const std::vector<double>& t_grid) {
  if (!(sigma > 0.5) || !(sigma < 1.0))
    throw DomainError("sigma must lie in (1/2, 1)");
  if (t_grid.size() < 12)
    throw DomainError("grid too short for a windowed fit");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > std::numbers::e))
      throw DomainError("grid points must exceed e for log log t");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1]))
      throw DomainError("grid must strictly increase");
  }

  std::vector<double> mags(t_grid.size());
  parallel_for(t_grid.size(), [&](std::size_t i) {
    mags[i] =
        std::abs(eval_direct(inst.spec, {sigma, t_grid[i]}, inst.N).value);
  });

  // running-maximum envelope, read at the end of equal-count windows:
  // the growth statement is sup-type, so the envelope never decreases
  const std::size_t windows = std::min<std::size_t>(6, t_grid.size() / 4);
  std::vector<double> xs, ys;
  double peak = 0.0;
  for (std::size_t w = 0; w < windows; ++w) {
    const std::size_t lo = w * t_grid.size() / windows;
    const std::size_t hi = (w + 1) * t_grid.size() / windows;
    for (std::size_t i = lo; i < hi; ++i) peak = std::max(peak, mags[i]);
    xs.push_back(std::log(std::log(t_grid[hi - 1])));
    ys.push_back(std::log(std::max(peak, 1e-300)));
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double den = n * sxx - sx * sx;
  if (den <= 0.0) throw ComputeError("degenerate log log t spread");

  OrderFitResult out;
  out.exponent = (n * sxy - sx * sy) / den;
  out.target = 2.0 - 2.0 * sigma;
  const double intercept = (sy - out.exponent * sx) / n;
  out.residuals.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    out.residuals.push_back(ys[i] - (intercept + out.exponent * xs[i]));
  return out;
}

}  // namespace dlab
