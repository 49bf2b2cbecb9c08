#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

#include "nmixprev/errors.hpp"

namespace nmixprev {

// Every randomized routine in this project draws from xoshiro256**
// (Blackman & Vigna) seeded through splitmix64. The algorithm is fixed and
// named so that a seed written into a run manifest reproduces the same
// stream in any reimplementation. Uniform doubles take the top 53 bits,
// bounded integers use Lemire's multiply-shift with rejection, and binomial
// draws use chunked CDF inversion. No method depends on platform-specific
// distributions.

inline constexpr std::string_view kGeneratorName = "xoshiro256**";

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Independent stream seed for a replicate/task index under a master seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t state = seed + (index + 1) * 0x9e3779b97f4a7c15ULL;
  return splitmix64_next(state);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64_next(sm);
    // xoshiro's all-zero state is absorbing; splitmix64 cannot emit four
    // zero words from any seed, but guard anyway.
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in {0, ..., n-1}. Unbiased (Lemire 2019).
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw DomainError("next_below: n must be positive");
    std::uint64_t x = next_u64();
    unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        x = next_u64();
        m = static_cast<unsigned __int128>(x) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Binomial(n, p) by CDF inversion over blocks of at most 512 trials,
  // with p flipped to min(p, 1-p) first. Block draws are exact: the
  // leading pmf (1-q)^block stays far above the subnormal range and the
  // walk uses the standard multiplicative recurrence. Binomials add across
  // blocks, so the chunking changes nothing but the term magnitudes.
  long binomial(long n, double p) {
    if (n < 0) throw DomainError("binomial: n must be nonnegative");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial: p must lie in [0,1]");
    if (n == 0 || p == 0.0) return 0;
    if (p == 1.0) return n;
    const bool flipped = p > 0.5;
    const double q = flipped ? 1.0 - p : p;
    long total = 0;
    long remaining = n;
    while (remaining > 0) {
      const long block = remaining < 512 ? remaining : 512;
      total += invert_block(block, q);
      remaining -= block;
    }
    return flipped ? n - total : total;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  long invert_block(long n, double q) {
    const double u = next_double();
    const double ratio = q / (1.0 - q);
    double pmf = std::exp(static_cast<double>(n) * std::log1p(-q));
    double cum = pmf;
    long k = 0;
    while (cum < u && k < n) {
      pmf *= ratio * static_cast<double>(n - k) / static_cast<double>(k + 1);
      cum += pmf;
      ++k;
    }
    return k;
  }

  std::array<std::uint64_t, 4> state_;
};

}  // namespace nmixprev
