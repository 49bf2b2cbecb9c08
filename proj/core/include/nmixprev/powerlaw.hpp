#pragma once

#include <span>
#include <utility>
#include <vector>

#include "nmixprev/rng.hpp"

namespace nmixprev {

// Discrete power law on {1, ..., n_max}: pmf(n) = n^(-s) / sum_i i^(-s).
// Sign convention: s >= 0 and the mass decays as n grows (s = 0 is uniform).
struct PowerLawParams {
  double s = 1.0;
  int n_max = 1;

  // Throws DomainError when n_max < 1 or s is negative or non-finite.
  void validate() const;
};

// log sum_{i=1}^{n_max} i^(-s), compensated summation.
double pl_log_normalizer(const PowerLawParams& params);

// Out-of-support n throws DomainError rather than returning 0; a silent zero
// would hide indexing bugs in the mixture sums built on top of this.
double pl_log_pmf(int n, const PowerLawParams& params);
double pl_pmf(int n, const PowerLawParams& params);

// Same, against a caller-precomputed pl_log_normalizer(params). Full-support
// sweeps should use these; the one-argument forms recompute the normalizer.
double pl_log_pmf(int n, const PowerLawParams& params, double log_normalizer);
double pl_pmf(int n, const PowerLawParams& params, double log_normalizer);

// E[N] = sum n * pmf(n), always in [1, n_max].
double pl_mean(const PowerLawParams& params);

// Inverse-CDF sampler over a precomputed cumulative table, binary search
// per draw. n_max is at most a few tens of thousands here, so the table is
// small and the draws are exact.
class PowerLawSampler {
 public:
  explicit PowerLawSampler(const PowerLawParams& params);
  int draw(Rng& rng) const;
  const PowerLawParams& params() const { return params_; }

 private:
  PowerLawParams params_;
  std::vector<double> cdf_;
};

std::vector<int> pl_sample(const PowerLawParams& params, Rng& rng,
                           std::size_t count);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Ordinary least squares of log(count) on log(value) over bins with
// count > 0. Natural log internally; the slope is base-invariant. This is a
// straight-line diagnostic only and carries no inferential weight.
// Throws InsufficientDataError with fewer than two positive bins and
// DomainError if a positive bin has value <= 0.
LogLogFit loglog_slope(std::span<const std::pair<double, double>> bins);

}  // namespace nmixprev
