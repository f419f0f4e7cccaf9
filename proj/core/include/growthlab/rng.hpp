#pragma once

#include <cstdint>
#include <string_view>

namespace growthlab {

// Counter-based deterministic generator.  Every stream is addressed by
// (seed, path, period): draws are a pure function of the key and a draw
// counter, so simulation paths can be generated in any order -- or in
// parallel -- and reproduce bit-identically.  The mixer is splitmix64
// applied to the keyed counter, which is the standard stateless way to
// turn that mixer into a PRF-style generator.
class RngStream {
 public:
  static constexpr std::string_view kName = "splitmix64-counter";

  RngStream(std::uint64_t seed, std::uint64_t path, std::uint64_t period);

  std::uint64_t next_u64();
  double next_double();  // uniform on [0,1), 53 bits
  // uniform integer on [0, n), n >= 1, via rejection (unbiased)
  std::uint64_t next_below(std::uint64_t n);

  std::uint64_t draws_used() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace growthlab
