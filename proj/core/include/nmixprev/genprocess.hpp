#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nmixprev/histogram.hpp"
#include "nmixprev/mle.hpp"
#include "nmixprev/nmixture.hpp"

namespace nmixprev {

// Pair-list attachment process: each step either introduces a brand-new
// offender (probability q) or picks an existing offender-target pair
// uniformly at random and hands its offender a new target. Uniform over
// pairs is a size-biased pick over offenders, which is what drives the
// power-law steady state.
struct CrpConfig {
  double q = 0.1;   // new-offender probability per step
  long steps = 1;   // offender-target pairs generated

  void validate() const;
};

// Ground truth for recovery tests: the latent per-offender target counts.
struct SyntheticTruth {
  std::vector<int> target_counts;       // creation order
  std::optional<ModelParams> params;    // set when model-generated

  std::int64_t o_true() const {
    return static_cast<std::int64_t>(target_counts.size());
  }
  std::int64_t t_true() const {
    std::int64_t sum = 0;
    for (int c : target_counts) sum += c;
    return sum;
  }
};

SyntheticTruth simulate_attachment(const CrpConfig& config,
                                   std::uint64_t seed);

struct ReportDraw {
  ReportHistogram hist;          // offenders with >= 1 report
  std::int64_t zero_count = 0;   // offenders nobody reported (truncated away)
};

// Binomial(n_i, p) reports per offender; zero-report offenders are counted
// and excluded, exactly the truncation the estimator has to undo.
ReportDraw simulate_reports(const SyntheticTruth& truth, double p,
                            std::uint64_t seed);

// o_true i.i.d. target counts from the power law.
SyntheticTruth generate_model_truth(const ModelParams& params,
                                    std::int64_t o_true, std::uint64_t seed);

struct StudySetting {
  double s = 1.0;
  double p = 1.0;
};

struct StudyRow {
  double s_true = 0.0;
  double p_true = 0.0;
  int replica = 0;  // 1-based
  double s_hat = 0.0;
  double p_hat = 0.0;
  int n_max_hat = 0;
  double o_ratio = 0.0;  // o_hat / true O
  double t_ratio = 0.0;  // t_hat / true T
  bool converged = false;
};

struct StudyOptions {
  int n_max = 1;
  std::int64_t o_true = 1;
  int replicas = 1;
  std::uint64_t seed = 0;
  FitConfig fit;
  int threads = 1;

  void validate() const;
};

// For each (s, p) setting and replica: generate truth, thin into reports,
// fit, estimate prevalence. Replica failures are recorded in their row and
// never abort the study. Rows are keyed by (setting, replica) with
// per-replica derived seeds, so the table is identical at any thread count.
// When the caller left the fit grid unset, the profile ceiling defaults to
// 2 * n_max: the harness knows the generative truth, and profiling far past
// it only spends time on a tail the data cannot inform.
std::vector<StudyRow> run_study(const std::vector<StudySetting>& settings,
                                const StudyOptions& options);

}  // namespace nmixprev
