#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nmixprev/histogram.hpp"
#include "nmixprev/nmixture.hpp"
#include "nmixprev/prevalence.hpp"

namespace nmixprev {

// Everything the fit needs beyond the data. Optimizer, bounds, starting
// points, and the n_max search are all policy choices; every default here
// is overridable.
struct FitConfig {
  std::pair<double, double> s_bounds{0.05, 6.0};
  std::pair<double, double> p_bounds{1e-6, 1.0};
  // Empty means derive {M, 2M, 4M, ...} capped at n_max_ceiling (the
  // ceiling itself is appended when the doubling does not land on it).
  // n_max stays on an integer grid: the normalizer sum changes discretely
  // and rounding a continuous optimum would be unprincipled.
  std::vector<int> n_max_grid;
  int n_max_ceiling = 50000;
  int multistart_points = 8;
  double rel_tol = 1e-8;
  int max_iters = 1000;
  bool truncated = true;
  double interval_level = 0.95;  // bootstrap percentile intervals
  int threads = 1;               // bootstrap replicate parallelism
  // Extra optimizer start, used by bootstrap refits (the original MLE).
  std::optional<ModelParams> warm_start;

  void validate() const;
};

struct ProfilePoint {
  int n_max = 0;
  double s = 0.0;
  double p = 0.0;
  double loglik = -std::numeric_limits<double>::infinity();
  bool converged = false;
};

struct FitResult {
  ModelParams params;
  double loglik = -std::numeric_limits<double>::infinity();
  bool converged = false;
  // The winning n_max's likelihood was flat across all multistart points
  // (e.g. single-bin data under the truncated model, where every (s, p)
  // fits perfectly).
  bool flat_likelihood = false;
  // Profile argmax sits on the largest grid entry; the grid ceiling, not
  // the data, may be what stopped the search.
  bool boundary = false;
  std::vector<ProfilePoint> profile;
  long n_evaluations = 0;
};

// All starts failed to converge for every n_max. Carries the best partial
// result seen.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, FitResult partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const FitResult& partial() const { return partial_; }

 private:
  FitResult partial_;
};

std::vector<int> default_n_max_grid(int m, int ceiling);

// The deterministic multistart lattice: s at linear midpoints of its
// bounds, p at log-spaced midpoints of its bounds (the optimizer's working
// scale for p). The fit never returns a likelihood below any of these
// points.
std::vector<std::pair<double, double>> multistart_lattice(
    const FitConfig& config);

// Profile MLE: for each n_max in the grid, maximize the log-likelihood over
// (s, p) with projected Nelder-Mead on transformed coordinates (s affinely
// rescaled, p through a clamped logit) from a deterministic multistart
// lattice; the triple with the highest likelihood wins, ties broken toward
// smaller n_max. Deterministic given (hist, config).
FitResult fit(const ReportHistogram& hist, const FitConfig& config = {});

// The (n_max, loglik) profile trace, exposed for diagnostics and plotting.
std::vector<std::pair<int, double>> profile_n_max(const ReportHistogram& hist,
                                                  const FitConfig& config = {});

struct BootstrapReplicate {
  FitResult fit;
  PrevalenceEstimate prevalence;
  bool converged = false;
};

struct Interval {
  double lo = std::numeric_limits<double>::quiet_NaN();
  double hi = std::numeric_limits<double>::quiet_NaN();
};

struct BootstrapIntervals {
  Interval s, p, n_max, p_zero, o_hat, t_hat;
};

struct BootstrapResult {
  std::vector<BootstrapReplicate> replicates;
  BootstrapIntervals intervals;  // percentile, from converged replicates
  double level = 0.95;
  int n_failed = 0;        // non-convergent replicates, recorded not dropped
  bool unreliable = false; // more than 20% of replicates failed
};

// Parametric bootstrap conditioned on the observed number of reported
// offenders R: each replicate draws target counts from the fitted power
// law, thins by the fitted p, discards zero-report offenders, and repeats
// until R reported offenders accumulate; then re-fits. Conditioning on R
// matches the observed-data dimension instead of propagating O_hat's own
// noise into replicate sizes. Replicates use independent streams derived
// from (seed, index), so results are identical at any thread count.
BootstrapResult bootstrap(const ReportHistogram& hist, const FitResult& fitted,
                          const FitConfig& config, int b, std::uint64_t seed);

}  // namespace nmixprev
