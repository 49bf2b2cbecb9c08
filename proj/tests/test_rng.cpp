#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>
#include <vector>

#include "nmixprev/errors.hpp"
#include "nmixprev/rng.hpp"
#include "support/oracles.hpp"

using namespace nmixprev;

TEST_CASE("streams are deterministic and seed-dependent") {
  Rng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    const auto va = a.next_u64();
    all_equal = all_equal && va == b.next_u64();
    any_diff = any_diff || va != c.next_u64();
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("uniform doubles stay in [0, 1)") {
  Rng rng(7);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  constexpr int kDraws = 200000;
  for (int i = 0; i < kDraws; ++i) {
    const double u = rng.next_double();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(sum / kDraws == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("bounded draws cover the range without bias") {
  Rng rng(99);
  std::vector<int> freq(10, 0);
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i)
    freq[static_cast<std::size_t>(rng.next_below(10))] += 1;
  for (int count : freq) {
    // each cell ~ Binomial(1e5, 0.1); 5 sigma ~ 475
    CHECK(std::abs(count - 10000) < 500);
  }
  CHECK_THROWS_AS(rng.next_below(0), DomainError);
}

TEST_CASE("derived seeds differ across indices") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i)
    seen.insert(derive_seed(12345, i));
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(12345, 7) == derive_seed(12345, 7));
  CHECK(derive_seed(12345, 7) != derive_seed(12346, 7));
}

TEST_CASE("binomial edge cases") {
  Rng rng(1);
  CHECK(rng.binomial(0, 0.4) == 0);
  CHECK(rng.binomial(17, 0.0) == 0);
  CHECK(rng.binomial(17, 1.0) == 17);
  CHECK_THROWS_AS(rng.binomial(-1, 0.5), DomainError);
  CHECK_THROWS_AS(rng.binomial(5, 1.5), DomainError);
  CHECK_THROWS_AS(rng.binomial(5, -0.5), DomainError);
}

TEST_CASE("binomial matches the exact pmf on a small case") {
  Rng rng(2024);
  constexpr int kDraws = 100000;
  std::vector<int> freq(4, 0);
  for (int i = 0; i < kDraws; ++i)
    freq[static_cast<std::size_t>(rng.binomial(3, 0.5))] += 1;
  for (int k = 0; k <= 3; ++k) {
    const double pmf = oracle::binom_pmf(k, 3, 0.5);
    const double se = std::sqrt(pmf * (1.0 - pmf) / kDraws);
    const double observed = static_cast<double>(freq[k]) / kDraws;
    CHECK(std::abs(observed - pmf) <= 4.0 * se);
  }
}

TEST_CASE("binomial moments survive the chunked path") {
  // n = 5000 crosses many 512-trial blocks; p = 0.9 exercises the flip.
  Rng rng(31337);
  constexpr int kDraws = 20000;
  constexpr long kN = 5000;
  constexpr double kP = 0.9;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const auto k = static_cast<double>(rng.binomial(kN, kP));
    sum += k;
    sumsq += k * k;
  }
  const double mean = sum / kDraws;
  const double var = sumsq / kDraws - mean * mean;
  const double expect_mean = kN * kP;
  const double expect_var = kN * kP * (1.0 - kP);
  CHECK(std::abs(mean - expect_mean) <=
        4.0 * std::sqrt(expect_var / kDraws));
  CHECK(var == doctest::Approx(expect_var).epsilon(0.1));
}
