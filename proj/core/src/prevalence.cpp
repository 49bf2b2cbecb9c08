#include "nmixprev/prevalence.hpp"

#include <cmath>

#include "nmixprev/errors.hpp"
#include "nmixprev/mle.hpp"

namespace nmixprev {

double p_never_reported(const ModelParams& params) {
  return nmix_pmf(0, params);
}

double estimate_offenders(std::int64_t r, const ModelParams& params) {
  if (r < 0) throw DomainError("estimate_offenders: r must be >= 0");
  const double log_denom = log_one_minus_f0(params);
  if (log_denom < std::log(1e-12))
    throw DegenerateModelError(
        "estimate_offenders: f(0) >= 1 - 1e-12, offender count unbounded");
  return static_cast<double>(r) * std::exp(-log_denom);
}

double estimate_targets(double o_hat, const ModelParams& params) {
  if (!(o_hat >= 0.0))
    throw DomainError("estimate_targets: o_hat must be >= 0");
  return o_hat * pl_mean(params.pl);
}

PrevalenceEstimate estimate_prevalence(const ReportHistogram& hist,
                                       const ModelParams& params) {
  PrevalenceEstimate est;
  est.r = hist.r();
  est.p_zero = p_never_reported(params);
  est.o_hat = estimate_offenders(est.r, params);
  est.t_hat = estimate_targets(est.o_hat, params);
  return est;
}

PrevalenceEstimate estimate_prevalence(const ReportHistogram& hist,
                                       const FitResult& fitted) {
  if (!fitted.converged)
    throw DomainError("estimate_prevalence: fit did not converge");
  return estimate_prevalence(hist, fitted.params);
}

}  // namespace nmixprev
