#pragma once

#include <array>
#include <cstdint>

namespace probfp {

// Philox4x32-10 counter-based generator (Salmon et al., Random123).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  static Counter block(Counter ctr, Key key);
};

// Stream of doubles for one (seed, stream) pair; draw i depends only on
// (seed, stream, i).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}
  // Uniform in the open interval (0, 1), 53-bit resolution.
  double uniform(std::uint64_t index) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace probfp
