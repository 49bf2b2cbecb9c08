#include "nmixprev/genprocess.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <thread>

#include "nmixprev/errors.hpp"
#include "nmixprev/prevalence.hpp"
#include "nmixprev/rng.hpp"

namespace nmixprev {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void striped_for(std::size_t count, int threads,
                 const std::function<void(std::size_t)>& body) {
  const int t = threads < 1 ? 1 : threads;
  if (t == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(t));
  for (int w = 0; w < t; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = static_cast<std::size_t>(w); i < count;
           i += static_cast<std::size_t>(t))
        body(i);
    });
  }
  for (auto& th : pool) th.join();
}
}  // namespace

void CrpConfig::validate() const {
  if (!(q > 0.0 && q <= 1.0))
    throw DomainError("CrpConfig: q must lie in (0, 1]");
  if (steps < 1) throw DomainError("CrpConfig: steps must be >= 1");
}

void StudyOptions::validate() const {
  if (n_max < 1) throw DomainError("StudyOptions: n_max must be >= 1");
  if (o_true < 1) throw DomainError("StudyOptions: o_true must be >= 1");
  if (replicas < 1) throw DomainError("StudyOptions: replicas must be >= 1");
  if (threads < 1) throw DomainError("StudyOptions: threads must be >= 1");
  fit.validate();
}

SyntheticTruth simulate_attachment(const CrpConfig& config,
                                   std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  std::vector<std::int32_t> pair_offenders;
  pair_offenders.reserve(static_cast<std::size_t>(config.steps));
  std::vector<int> counts;
  for (long step = 0; step < config.steps; ++step) {
    const double u = rng.next_double();
    std::int32_t offender;
    if (pair_offenders.empty() || u < config.q) {
      offender = static_cast<std::int32_t>(counts.size());
      counts.push_back(0);
    } else {
      offender = pair_offenders[rng.next_below(pair_offenders.size())];
    }
    pair_offenders.push_back(offender);
    counts[static_cast<std::size_t>(offender)] += 1;
  }
  SyntheticTruth truth;
  truth.target_counts = std::move(counts);
  return truth;
}

ReportDraw simulate_reports(const SyntheticTruth& truth, double p,
                            std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0))
    throw DomainError("simulate_reports: p must lie in [0, 1]");
  Rng rng(seed);
  ReportDraw draw;
  for (int n : truth.target_counts) {
    const long k = rng.binomial(n, p);
    if (k == 0)
      ++draw.zero_count;
    else
      draw.hist.add(static_cast<int>(k));
  }
  return draw;
}

SyntheticTruth generate_model_truth(const ModelParams& params,
                                    std::int64_t o_true, std::uint64_t seed) {
  params.validate();
  if (o_true < 1)
    throw DomainError("generate_model_truth: o_true must be >= 1");
  Rng rng(seed);
  SyntheticTruth truth;
  truth.params = params;
  truth.target_counts =
      pl_sample(params.pl, rng, static_cast<std::size_t>(o_true));
  return truth;
}

std::vector<StudyRow> run_study(const std::vector<StudySetting>& settings,
                                const StudyOptions& options) {
  if (settings.empty()) return {};
  options.validate();
  for (const auto& setting : settings) {
    ModelParams check{{setting.s, options.n_max}, setting.p};
    check.validate();
  }

  FitConfig cfg = options.fit;
  if (cfg.n_max_grid.empty() &&
      cfg.n_max_ceiling == FitConfig{}.n_max_ceiling) {
    cfg.n_max_ceiling = 2 * options.n_max;
  }

  const std::size_t replicas = static_cast<std::size_t>(options.replicas);
  std::vector<StudyRow> rows(settings.size() * replicas);

  striped_for(rows.size(), options.threads, [&](std::size_t idx) {
    const std::size_t setting_idx = idx / replicas;
    const int replica = static_cast<int>(idx % replicas);
    const StudySetting& setting = settings[setting_idx];

    StudyRow& row = rows[idx];
    row.s_true = setting.s;
    row.p_true = setting.p;
    row.replica = replica + 1;
    row.s_hat = kNaN;
    row.p_hat = kNaN;
    row.o_ratio = kNaN;
    row.t_ratio = kNaN;

    const ModelParams truth_params{{setting.s, options.n_max}, setting.p};
    const SyntheticTruth truth = generate_model_truth(
        truth_params, options.o_true, derive_seed(options.seed, 2 * idx));
    const ReportDraw draw = simulate_reports(
        truth, setting.p, derive_seed(options.seed, 2 * idx + 1));
    if (draw.hist.empty()) return;  // nobody reported; recorded as failure

    auto record = [&](const FitResult& fr) {
      row.s_hat = fr.params.pl.s;
      row.p_hat = fr.params.p;
      row.n_max_hat = fr.params.pl.n_max;
      row.converged = fr.converged;
      if (fr.converged) {
        const PrevalenceEstimate est = estimate_prevalence(draw.hist, fr);
        row.o_ratio = est.o_hat / static_cast<double>(truth.o_true());
        row.t_ratio = est.t_hat / static_cast<double>(truth.t_true());
      }
    };
    try {
      record(fit(draw.hist, cfg));
    } catch (const ConvergenceError& e) {
      record(e.partial());
      row.converged = false;
    } catch (const std::exception&) {
      row.converged = false;
    }
  });

  return rows;
}

}  // namespace nmixprev
