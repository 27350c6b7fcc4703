#pragma once

// Frequency sequences lambda_n for general Dirichlet series. Generators:
// log P(p_n) over primes, log P(n) over integers from 2, or an explicit
// list. Sequences cache both lambda_n and the plain scale e^{lambda_n}
// (the polynomial value itself when generated) so smoothed sums avoid
// exp/log round-trips. The gap statistic is
//   theta_n = min(lambda_n - lambda_{n-1}, lambda_{n+1} - lambda_n),
// and a gap certificate is a pair (c, beta) with theta_n >= c exp(-beta
// lambda_n) for every cached n, together with the index that attains
// equality worst.

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "dlab/common.hpp"
#include "dlab/polynomial.hpp"
#include "dlab/primes.hpp"

namespace dlab {

enum class FrequencyGenerator { PolyOfPrimes, PolyOfIntegers, Explicit };

struct GapCertificate {
  double c = 0.0;
  double beta = 1.0;
  std::size_t witness = 1;  // 1-based index attaining the minimum slack
};

class FrequencySequence {
 public:
  std::size_t size() const { return lambda_.size(); }
  FrequencyGenerator generator() const { return gen_; }
  // indices dropped from the front of the generator stream before the
  // first emitted term (where P was not yet positive and increasing)
  std::size_t offset() const { return offset_; }

  // 1-based accessors
  double lambda(std::size_t n) const { return lambda_.at(n - 1); }
  double scale(std::size_t n) const { return scale_.at(n - 1); }
  // generator argument: the prime or integer fed to P; equals the scale
  // for explicit lists
  double argument(std::size_t n) const { return arg_.at(n - 1); }
  double theta(std::size_t n) const;

  const std::vector<double>& lambdas() const { return lambda_; }
  const std::vector<double>& scales() const { return scale_; }
  const std::vector<double>& arguments() const { return arg_; }

  GapCertificate gap_certificate() const;
  void write_csv(std::ostream& os) const;  // index, lambda, gap

  static FrequencySequence explicit_list(std::vector<double> lambdas);

  friend FrequencySequence lambda_values(FrequencyGenerator gen,
                                         const RealPolynomial& P,
                                         std::size_t N);

 private:
  FrequencyGenerator gen_ = FrequencyGenerator::Explicit;
  std::size_t offset_ = 0;
  std::vector<double> lambda_;
  std::vector<double> scale_;
  std::vector<double> arg_;
};

// Builds the first N frequencies for the chosen generator. The prime
// table is sized internally. Throws NonMonotoneError when P does not
// become positive and increasing early enough in the generated range.
FrequencySequence lambda_values(FrequencyGenerator gen,
                                const RealPolynomial& P, std::size_t N);

// Count of primes p_n whose frequency log P(p_n) lies in the window
// [x, x + alpha/x^2], resolved through the polynomial inverse.
std::size_t prime_interval_count(double x, double alpha,
                                 const RealPolynomial& P,
                                 const PrimeTable& table);

}  // namespace dlab
