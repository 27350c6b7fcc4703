#include "dlab/frequencies.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace dlab {
namespace {

// Rosser-style upper bound for the nth prime, generous for small n.
std::uint64_t nth_prime_bound(std::size_t n) {
  if (n < 6) return 13;
  double x = static_cast<double>(n);
  return static_cast<std::uint64_t>(x * (std::log(x) + std::log(std::log(x))) *
                                    1.10) +
         16;
}

}  // namespace

double FrequencySequence::theta(std::size_t n) const {
  if (size() < 2) throw DomainError("gap statistic needs two terms");
  if (n == 0 || n > size()) throw DomainError("gap index out of range");
  double left = (n >= 2) ? lambda_[n - 1] - lambda_[n - 2] : 1e308;
  double right = (n < size()) ? lambda_[n] - lambda_[n - 1] : 1e308;
  return std::min(left, right);
}

GapCertificate FrequencySequence::gap_certificate() const {
  if (size() < 3) throw DomainError("gap certificate needs three terms");

  // when consecutive scales are at least one apart, beta = 1 works:
  // lambda_{n+1} - lambda_n >= log(1 + 1/e^{lambda_n}) >= e^{-lambda_n}/2,
  // and we report the exact best constant for it
  bool unit_spaced = true;
  for (std::size_t i = 0; i + 1 < size(); ++i)
    if (scale_[i + 1] - scale_[i] < 1.0) {
      unit_spaced = false;
      break;
    }

  GapCertificate cert;
  if (unit_spaced) {
    cert.beta = 1.0;
  } else {
    // least-squares slope of log theta_n against lambda_n
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = size();
    for (std::size_t n = 1; n <= m; ++n) {
      double x = lambda_[n - 1], y = std::log(theta(n));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    double denom = m * sxx - sx * sx;
    double slope = (denom != 0.0) ? (m * sxy - sx * sy) / denom : 0.0;
    cert.beta = std::max(0.0, -slope);
  }
  // largest c valid for the chosen beta, with the index attaining it
  double cmin = 1e308;
  for (std::size_t n = 1; n <= size(); ++n) {
    double c = theta(n) * std::exp(cert.beta * lambda_[n - 1]);
    if (c < cmin) {
      cmin = c;
      cert.witness = n;
    }
  }
  cert.c = cmin;
  return cert;
}

void FrequencySequence::write_csv(std::ostream& os) const {
  os << "index,lambda,gap\n";
  char line[96];
  for (std::size_t n = 1; n <= size(); ++n) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g\n", n, lambda_[n - 1],
                  size() >= 2 ? theta(n) : 0.0);
    os << line;
  }
}

FrequencySequence FrequencySequence::explicit_list(
    std::vector<double> lambdas) {
  FrequencySequence seq;
  seq.gen_ = FrequencyGenerator::Explicit;
  for (double l : lambdas)
    if (!std::isfinite(l)) throw DomainError("frequency not finite");
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    if (!(lambdas[i] > lambdas[i - 1]))
      throw NonMonotoneError("explicit frequencies must strictly increase");
  seq.scale_.reserve(lambdas.size());
  for (double l : lambdas) seq.scale_.push_back(std::exp(l));
  seq.arg_ = seq.scale_;
  seq.lambda_ = std::move(lambdas);
  return seq;
}

FrequencySequence lambda_values(FrequencyGenerator gen,
                                const RealPolynomial& P, std::size_t N) {
  if (gen == FrequencyGenerator::Explicit)
    throw DomainError("explicit sequences are built from a list");
  if (N == 0) throw DomainError("need at least one frequency");
  if (P.degree() == 0 || P.leading() <= 0.0)
    throw NonMonotoneError("generator polynomial must grow to +infinity");

  // P is strictly increasing past its largest critical point; start the
  // stream at the first argument past it with P positive, and record how
  // many indices that dropped
  double start_at = P.increasing_from() - 1.0;

  FrequencySequence seq;
  seq.gen_ = gen;
  seq.lambda_.reserve(N);
  seq.scale_.reserve(N);

  auto emit_from = [&](auto next_arg) {
    std::size_t dropped = 0;
    while (seq.lambda_.size() < N) {
      double x = next_arg();
      if (x < start_at || P(x) <= 0.0) {
        ++dropped;
        // a generator that never turns the corner is unusable; anything
        // still negative this deep is treated as not yet increasing
        if (dropped > 4096 + static_cast<std::size_t>(std::max(0.0, start_at)))
          throw NonMonotoneError(
              "polynomial not yet increasing on the generated range");
        continue;
      }
      double v = P(x);
      double l = std::log(v);
      if (!seq.lambda_.empty() && !(l > seq.lambda_.back()))
        throw NonMonotoneError("frequencies failed to strictly increase");
      seq.lambda_.push_back(l);
      seq.scale_.push_back(v);
      seq.arg_.push_back(x);
    }
    seq.offset_ = dropped;
  };

  if (gen == FrequencyGenerator::PolyOfPrimes) {
    // the table must cover the first N primes past the dropped prefix;
    // grow it if the drop was deeper than the initial sizing allowed
    std::size_t want = N + 64;
    PrimeTable table = primes_up_to(nth_prime_bound(want));
    std::size_t idx = 0;
    auto next_prime = [&]() -> double {
      if (idx >= table.primes.size()) {
        want *= 2;
        table = primes_up_to(nth_prime_bound(want));
      }
      return static_cast<double>(table.primes[idx++]);
    };
    emit_from(next_prime);
  } else {
    double n = 1.0;
    auto next_int = [&]() -> double { return ++n; };
    emit_from(next_int);
  }
  return seq;
}

std::size_t prime_interval_count(double x, double alpha,
                                 const RealPolynomial& P,
                                 const PrimeTable& table) {
  if (!(x > 0.0)) throw DomainError("interval base must be positive");
  double lo = poly_inverse(P, std::exp(x));
  double hi = poly_inverse(P, std::exp(x + alpha / (x * x)));
  return table.count_in(lo, hi);
}

}  // namespace dlab
