#pragma once

// Shared basics: complex alias, error taxonomy, compensated summation,
// a tiny deterministic parallel-for, and FNV hashing for digests.

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace dlab {

inline constexpr const char* kToolVersion = "0.1.0";

using Complex = std::complex<double>;

inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(const Complex& z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// ---- error taxonomy ----------------------------------------------------
// One exception type per failure mode that callers are expected to
// distinguish; everything derives from Error so the CLI can map any of
// them onto a compute-failure report.

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define DLAB_ERROR_TYPE(NAME)                                   \
  struct NAME : Error {                                         \
    explicit NAME(const std::string& msg) : Error(msg) {}       \
  }

DLAB_ERROR_TYPE(PoleError);          // evaluation at a pole
DLAB_ERROR_TYPE(BranchCutError);     // argument on the negative real cut
DLAB_ERROR_TYPE(DomainError);        // outside an operation's supported domain
DLAB_ERROR_TYPE(OverflowError);      // result not representable in double
DLAB_ERROR_TYPE(CapacityError);      // table would exceed the memory budget
DLAB_ERROR_TYPE(NonMonotoneError);   // frequency values fail to increase
DLAB_ERROR_TYPE(TableRangeError);    // query past the cached table
DLAB_ERROR_TYPE(ZeroGapError);       // duplicate frequencies
DLAB_ERROR_TYPE(HypothesisError);    // an estimate's hypothesis fails numerically
DLAB_ERROR_TYPE(ResolutionError);    // scan step too coarse for the frequencies
DLAB_ERROR_TYPE(NotFoundError);      // search exhausted without a witness
DLAB_ERROR_TYPE(ZeroFactorError);    // product factor too close to zero
DLAB_ERROR_TYPE(DivergenceError);    // series diverges at the requested point
DLAB_ERROR_TYPE(EmptyIntervalError); // counting window contains no frequencies
DLAB_ERROR_TYPE(ParseError);         // malformed job/spec input
DLAB_ERROR_TYPE(ComputeError);       // generic runtime failure

#undef DLAB_ERROR_TYPE

// ---- compensated summation ----------------------------------------------

// Kahan-Neumaier accumulator; the correction matters in the long slowly
// decaying tails this code spends most of its time summing.
class KahanSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

class KahanComplexSum {
 public:
  void add(const Complex& z) {
    re_.add(z.real());
    im_.add(z.imag());
  }
  Complex value() const { return {re_.value(), im_.value()}; }

 private:
  KahanSum re_, im_;
};

// ---- deterministic parallelism -------------------------------------------

// Global worker cap, settable from the CLI. 0 = hardware concurrency.
void set_thread_cap(unsigned n);
unsigned thread_cap();

// Runs fn(i) for i in [0, n). Work items write into their own slots;
// any reduction over the results must happen afterwards, in index order,
// so the outcome is bit-identical for every thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// ---- digests --------------------------------------------------------------

inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t seed = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  return fnv1a64(s.data(), s.size());
}

std::string hex64(std::uint64_t v);

}  // namespace dlab
