#include "growthlab/rng.hpp"

namespace growthlab {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t path, std::uint64_t period) {
  // Fold the key fields through the mixer one at a time; this keeps distinct
  // (seed, path, period) triples in distinct streams.
  std::uint64_t k = splitmix64(seed);
  k = splitmix64(k ^ (path + 0xd6e8feb86659fd93ULL));
  k = splitmix64(k ^ (period + 0xa5a5a5a5a5a5a5a5ULL));
  key_ = k;
}

std::uint64_t RngStream::next_u64() { return splitmix64(key_ + counter_++); }

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::next_below(std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = n * ((~0ULL) / n);
  std::uint64_t v = next_u64();
  while (v >= limit) v = next_u64();
  return v % n;
}

}  // namespace growthlab
