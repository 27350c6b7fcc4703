#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dlab/common.hpp"

namespace dlab {

// Complete list of primes below a limit. Built once, queried read-only.
struct PrimeTable {
  std::vector<std::uint64_t> primes;
  std::uint64_t limit = 0;

  std::size_t count() const { return primes.size(); }
  // 1-based: nth(1) = 2
  std::uint64_t nth(std::size_t n) const;
  // number of primes p with lo <= p <= hi
  std::size_t count_in(double lo, double hi) const;
};

// Segmented sieve of Eratosthenes. Throws CapacityError when the
// estimated table size would exceed max_bytes.
PrimeTable primes_up_to(std::uint64_t limit,
                        std::uint64_t max_bytes = 2ull << 30);

// Flat binary format: 16-byte header (8-byte magic, 4-byte version,
// 4-byte count), then count little-endian 64-bit entries.
void save_prime_table(const PrimeTable& table, const std::string& path);
PrimeTable load_prime_table(const std::string& path);

}  // namespace dlab
