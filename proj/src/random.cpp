#include "probfp/random.hpp"

namespace probfp {

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t(M0) * ctr[0];
    const std::uint64_t p1 = std::uint64_t(M1) * ctr[2];
    ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1), std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1],
           std::uint32_t(p0)};
    key[0] += W0;
    key[1] += W1;
  }
  return ctr;
}

double CounterRng::uniform(std::uint64_t index) const {
  const Philox4x32::Counter ctr{std::uint32_t(index), std::uint32_t(index >> 32), std::uint32_t(stream_),
                                std::uint32_t(stream_ >> 32)};
  const Philox4x32::Key key{std::uint32_t(seed_), std::uint32_t(seed_ >> 32)};
  const auto out = Philox4x32::block(ctr, key);
  const std::uint64_t bits = ((std::uint64_t(out[0]) << 32) | out[1]) >> 11;
  return (double(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace probfp
