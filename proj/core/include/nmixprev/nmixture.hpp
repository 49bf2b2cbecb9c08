#pragma once

#include <vector>

#include "nmixprev/histogram.hpp"
#include "nmixprev/powerlaw.hpp"

namespace nmixprev {

// Full N-mixture parameterization: targets-per-offender follow the power
// law, each target reports independently with probability p.
struct ModelParams {
  PowerLawParams pl;
  double p = 1.0;

  void validate() const;
};

// log Binomial(k; n, p) via log-gamma. p = 0 and p = 1 are handled exactly
// (0 or -inf, never NaN). Throws DomainError for k < 0 or k > n.
double binom_log_pmf(int k, int n, double p);

// Scratch space shared across likelihood evaluations within one call tree:
// log(i) and log(i!) tables plus the power-law normalizer cached per
// (s, n_max). Never share one workspace between threads; each concurrent
// evaluation owns its own (the tables are call-local memoization, not
// global state).
class LikelihoodWorkspace {
 public:
  void reserve(int n_max);

  double log_n(int i) const { return log_n_[static_cast<std::size_t>(i)]; }
  double log_fact(int i) const {
    return log_fact_[static_cast<std::size_t>(i)];
  }
  double log_normalizer(const PowerLawParams& params);

 private:
  std::vector<double> log_n_;    // log_n_[i] = log(i), index 0 unused
  std::vector<double> log_fact_; // log_fact_[i] = log(i!)
  double cached_s_ = -1.0;
  int cached_n_max_ = -1;
  double cached_log_z_ = 0.0;
};

// f(k) = sum_{n=max(k,1)}^{n_max} Binomial(k; n, p) * PL(n; s, n_max).
// Evaluated as a streaming log-sum-exp over n: with n_max up to 20,000 and
// small p the individual terms underflow double precision in linear space.
// Terms with n < k are zero and never touched. k outside [0, n_max] throws
// DomainError.
double nmix_log_pmf(int k, const ModelParams& params,
                    LikelihoodWorkspace& ws);
double nmix_log_pmf(int k, const ModelParams& params);
double nmix_pmf(int k, const ModelParams& params, LikelihoodWorkspace& ws);
double nmix_pmf(int k, const ModelParams& params);

// log(1 - f(0)), stable when f(0) is close to 1: computed as
// log sum_n g(n) * (-expm1(n * log1p(-p))) instead of log1p(-exp(log f0)),
// whose cancellation would corrupt the truncated likelihood at small p.
double log_one_minus_f0(const ModelParams& params, LikelihoodWorkspace& ws);
double log_one_minus_f0(const ModelParams& params);

// Zero-truncated pmf f(k | k > 0) = f(k) / (1 - f(0)). Throws
// DegenerateModelError when f(0) >= 1 - 1e-12 (p ~ 0: nobody reports) and
// DomainError for k < 1.
double nmix_pmf_truncated(int k, const ModelParams& params,
                          LikelihoodWorkspace& ws);
double nmix_pmf_truncated(int k, const ModelParams& params);

// Observed-data log-likelihood sum_i k_i log f(i | i > 0); with
// truncated = false the truncation normalizer is dropped, which reads as
// sum_i k_i log f(i) over the raw mixture pmf. A bin with f(i) = 0 yields
// -inf, not an error. Throws InfeasibleSupportError when the histogram's
// M exceeds n_max.
double log_likelihood(const ReportHistogram& hist, const ModelParams& params,
                      bool truncated, LikelihoodWorkspace& ws);
double log_likelihood(const ReportHistogram& hist, const ModelParams& params,
                      bool truncated = true);

}  // namespace nmixprev
