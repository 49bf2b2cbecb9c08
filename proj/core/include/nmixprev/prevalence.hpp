#pragma once

#include <cstdint>

#include "nmixprev/histogram.hpp"
#include "nmixprev/nmixture.hpp"

namespace nmixprev {

struct FitResult;  // mle.hpp

// Point estimates derived from fitted model parameters. o_hat >= r and
// t_hat >= o_hat always (every offender has at least one target).
struct PrevalenceEstimate {
  double p_zero = 0.0;  // estimated P(K = 0)
  double o_hat = 0.0;   // estimated total offenders
  double t_hat = 0.0;   // estimated total targets
  std::int64_t r = 0;   // observed reported offenders, carried for provenance
};

// P(K = 0) = f(0) under the fitted model.
double p_never_reported(const ModelParams& params);

// O_hat = r / (1 - f(0)). Throws DegenerateModelError when f(0) is
// numerically 1. r = 0 gives 0.
double estimate_offenders(std::int64_t r, const ModelParams& params);

// T_hat = O_hat * E[N]. Estimators stay real-valued; rounding for display
// is the caller's concern.
double estimate_targets(double o_hat, const ModelParams& params);

PrevalenceEstimate estimate_prevalence(const ReportHistogram& hist,
                                       const ModelParams& params);
// Requires fitted.converged.
PrevalenceEstimate estimate_prevalence(const ReportHistogram& hist,
                                       const FitResult& fitted);

}  // namespace nmixprev
