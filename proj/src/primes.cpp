#include "dlab/primes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

namespace dlab {
namespace {

constexpr std::uint64_t kMagic = 0x31314d5250424c44ull;  // "DLBPRM11"
constexpr std::uint32_t kVersion = 1;

void put_u32(unsigned char* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}
void put_u64(unsigned char* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}
std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}
std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

}  // namespace

std::uint64_t PrimeTable::nth(std::size_t n) const {
  if (n == 0 || n > primes.size())
    throw TableRangeError("prime index out of table");
  return primes[n - 1];
}

std::size_t PrimeTable::count_in(double lo, double hi) const {
  if (hi < lo) return 0;
  if (hi > static_cast<double>(limit))
    throw TableRangeError("interval end beyond table limit");
  auto cmp = [](std::uint64_t p, double x) {
    return static_cast<double>(p) < x;
  };
  auto first = std::lower_bound(primes.begin(), primes.end(), lo, cmp);
  auto last = std::lower_bound(primes.begin(), primes.end(),
                               std::nextafter(hi, 1e308), cmp);
  return static_cast<std::size_t>(last - first);
}

PrimeTable primes_up_to(std::uint64_t limit, std::uint64_t max_bytes) {
  if (limit < 2) throw DomainError("sieve limit must be at least 2");
  // estimated storage: pi(limit) ~ limit/log(limit), 8 bytes per entry,
  // plus the fixed segment buffer
  double est = 8.0 * static_cast<double>(limit) /
                   std::max(std::log(static_cast<double>(limit)), 1.0) * 1.2 +
               (1 << 20);
  if (est > static_cast<double>(max_bytes))
    throw CapacityError("prime table would exceed the memory budget");

  PrimeTable out;
  out.limit = limit;

  // base primes up to sqrt(limit) by a plain sieve
  std::uint64_t root =
      static_cast<std::uint64_t>(std::sqrt(static_cast<double>(limit))) + 2;
  while (root * root > limit + 1) --root;
  std::vector<unsigned char> base(root + 1, 1);
  base[0] = 0;
  if (root >= 1) base[1] = 0;
  for (std::uint64_t i = 2; i * i <= root; ++i)
    if (base[i])
      for (std::uint64_t j = i * i; j <= root; j += i) base[j] = 0;
  std::vector<std::uint64_t> small;
  for (std::uint64_t i = 2; i <= root; ++i)
    if (base[i]) small.push_back(i);

  const std::uint64_t seg_len = 1u << 20;
  std::vector<unsigned char> seg(seg_len);
  for (std::uint64_t lo = 2; lo <= limit; lo += seg_len) {
    std::uint64_t hi = std::min(limit, lo + seg_len - 1);
    std::fill(seg.begin(), seg.begin() + (hi - lo + 1), 1);
    for (std::uint64_t p : small) {
      if (p * p > hi) break;
      std::uint64_t start = std::max(p * p, ((lo + p - 1) / p) * p);
      for (std::uint64_t j = start; j <= hi; j += p) seg[j - lo] = 0;
    }
    for (std::uint64_t v = lo; v <= hi; ++v)
      if (seg[v - lo] && !(v < 2)) out.primes.push_back(v);
  }
  // the base sieve already excluded 0 and 1; segments starting at 2 are
  // correct because composites below 4 do not exist
  return out;
}

void save_prime_table(const PrimeTable& table, const std::string& path) {
  if (table.primes.size() > 0xffffffffull)
    throw CapacityError("prime table too large for the file format");
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "wb"));
  if (!f) throw ComputeError("cannot open prime table file for writing");
  unsigned char header[16];
  put_u64(header, kMagic);
  put_u32(header + 8, kVersion);
  put_u32(header + 12, static_cast<std::uint32_t>(table.primes.size()));
  if (std::fwrite(header, 1, 16, f.get()) != 16)
    throw ComputeError("prime table header write failed");
  std::vector<unsigned char> buf(8 * 4096);
  std::size_t i = 0;
  while (i < table.primes.size()) {
    std::size_t n = std::min<std::size_t>(4096, table.primes.size() - i);
    for (std::size_t k = 0; k < n; ++k)
      put_u64(buf.data() + 8 * k, table.primes[i + k]);
    if (std::fwrite(buf.data(), 8, n, f.get()) != n)
      throw ComputeError("prime table write failed");
    i += n;
  }
}

PrimeTable load_prime_table(const std::string& path) {
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "rb"));
  if (!f) throw ParseError("cannot open prime table file");
  unsigned char header[16];
  if (std::fread(header, 1, 16, f.get()) != 16)
    throw ParseError("prime table header truncated");
  if (get_u64(header) != kMagic) throw ParseError("prime table magic mismatch");
  if (get_u32(header + 8) != kVersion)
    throw ParseError("prime table version unsupported");
  std::uint32_t count = get_u32(header + 12);
  PrimeTable out;
  out.primes.resize(count);
  std::vector<unsigned char> buf(8 * 4096);
  std::size_t i = 0;
  while (i < count) {
    std::size_t n = std::min<std::size_t>(4096, count - i);
    if (std::fread(buf.data(), 8, n, f.get()) != n)
      throw ParseError("prime table entries truncated");
    for (std::size_t k = 0; k < n; ++k)
      out.primes[i + k] = get_u64(buf.data() + 8 * k);
    i += n;
  }
  for (std::size_t k = 1; k < out.primes.size(); ++k)
    if (out.primes[k] <= out.primes[k - 1])
      throw ParseError("prime table entries not increasing");
  out.limit = out.primes.empty() ? 2 : out.primes.back();
  return out;
}

}  // namespace dlab
