#include "nmixprev/mle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <thread>

#include "nmixprev/errors.hpp"
#include "nmixprev/rng.hpp"

namespace nmixprev {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// The optimizer works on z = (z_s, z_p): s rescaled affinely to [0, 1] and
// clamped, p through the logit of its rescaled value with |z_p| <= 40.
// sigma(40) rounds to 1 in double, so the p upper bound is reachable
// exactly; the clamp also keeps the lattice and simplex finite.
struct BoxTransform {
  double s_lo, s_hi, p_lo, p_hi;
  static constexpr double kZClamp = 40.0;

  static double clamp(double x, double lo, double hi) {
    return x < lo ? lo : (x > hi ? hi : x);
  }
  static double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

  std::array<double, 2> project(std::array<double, 2> z) const {
    z[0] = clamp(z[0], 0.0, 1.0);
    z[1] = clamp(z[1], -kZClamp, kZClamp);
    return z;
  }
  double s_from_z(double zs) const {
    return s_lo + clamp(zs, 0.0, 1.0) * (s_hi - s_lo);
  }
  double p_from_z(double zp) const {
    return p_lo + (p_hi - p_lo) * sigmoid(clamp(zp, -kZClamp, kZClamp));
  }
  double z_from_s(double s) const {
    return clamp((s - s_lo) / (s_hi - s_lo), 0.0, 1.0);
  }
  double z_from_p(double p) const {
    double q = (p - p_lo) / (p_hi - p_lo);
    q = clamp(q, sigmoid(-kZClamp), sigmoid(kZClamp));
    return clamp(std::log(q / (1.0 - q)), -kZClamp, kZClamp);
  }
};

struct NmOutcome {
  std::array<double, 2> z{};
  double value = kInf;  // minimized objective = -loglik
  bool converged = false;
};

// Deterministic 2-D Nelder-Mead with projection onto the transformed box.
// Standard coefficients (reflect 1, expand 2, contract 0.5, shrink 0.5).
// Convergence: value spread of the simplex within rel_tol relative to the
// best value.
template <typename F>
NmOutcome nelder_mead_2d(F&& objective, const BoxTransform& box,
                         std::array<double, 2> z0,
                         std::array<double, 2> steps, double rel_tol,
                         int max_iters) {
  auto safe = [&](std::array<double, 2> z) {
    const double v = objective(z);
    return std::isnan(v) ? kInf : v;
  };

  std::array<std::array<double, 2>, 3> pts;
  std::array<double, 3> vals;
  pts[0] = box.project(z0);
  pts[1] = box.project({z0[0] + steps[0], z0[1]});
  pts[2] = box.project({z0[0], z0[1] + steps[1]});
  // A step that projects back onto z0 (start on the boundary) would
  // degenerate the simplex; flip it inward.
  if (pts[1][0] == pts[0][0]) pts[1][0] = box.project({z0[0] - steps[0], 0})[0];
  if (pts[2][1] == pts[0][1]) pts[2][1] = box.project({0, z0[1] - steps[1]})[1];
  for (int i = 0; i < 3; ++i) vals[i] = safe(pts[i]);

  NmOutcome out;
  for (int iter = 0; iter < max_iters; ++iter) {
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return vals[a] < vals[b]; });
    const int best = order[0], mid = order[1], worst = order[2];

    const double spread = vals[worst] - vals[best];
    if (spread <= rel_tol * (std::abs(vals[best]) + rel_tol)) {
      out.converged = true;
      break;
    }

    const std::array<double, 2> centroid{
        0.5 * (pts[best][0] + pts[mid][0]),
        0.5 * (pts[best][1] + pts[mid][1])};
    auto along = [&](double coef) {
      return box.project({centroid[0] + coef * (centroid[0] - pts[worst][0]),
                          centroid[1] + coef * (centroid[1] - pts[worst][1])});
    };

    const auto reflected = along(1.0);
    const double fr = safe(reflected);
    if (fr < vals[best]) {
      const auto expanded = along(2.0);
      const double fe = safe(expanded);
      if (fe < fr) {
        pts[worst] = expanded;
        vals[worst] = fe;
      } else {
        pts[worst] = reflected;
        vals[worst] = fr;
      }
    } else if (fr < vals[mid]) {
      pts[worst] = reflected;
      vals[worst] = fr;
    } else {
      const auto contracted = fr < vals[worst] ? along(0.5) : along(-0.5);
      const double fc = safe(contracted);
      if (fc < std::min(fr, vals[worst])) {
        pts[worst] = contracted;
        vals[worst] = fc;
      } else {
        for (int i : {mid, worst}) {
          pts[i] = box.project({0.5 * (pts[i][0] + pts[best][0]),
                                0.5 * (pts[i][1] + pts[best][1])});
          vals[i] = safe(pts[i]);
        }
      }
    }
  }

  const int best = static_cast<int>(
      std::min_element(vals.begin(), vals.end()) - vals.begin());
  out.z = pts[best];
  out.value = vals[best];
  return out;
}

std::vector<std::array<double, 2>> start_lattice(const FitConfig& config,
                                                 const BoxTransform& box) {
  std::vector<std::array<double, 2>> starts;
  for (const auto& [s, p] : multistart_lattice(config))
    starts.push_back({box.z_from_s(s), box.z_from_p(p)});
  return starts;
}

std::vector<int> sanitize_grid(std::vector<int> grid) {
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return kNaN;
  if (sorted.size() == 1) return sorted.front();
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

Interval percentile_interval(std::vector<double> values, double level) {
  std::sort(values.begin(), values.end());
  const double alpha = 1.0 - level;
  return {quantile(values, alpha / 2.0), quantile(values, 1.0 - alpha / 2.0)};
}

// Static striping over replicate indices; results land in index-keyed
// slots, so output is identical at any thread count.
void parallel_for_index(std::size_t count, int threads,
                        const std::function<void(std::size_t)>& body) {
  const int t = std::max(1, threads);
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

void FitConfig::validate() const {
  if (!(s_bounds.first < s_bounds.second) || s_bounds.first < 0.0 ||
      !std::isfinite(s_bounds.second))
    throw DomainError("FitConfig: s_bounds must be ordered and nonnegative");
  if (!(p_bounds.first < p_bounds.second) || p_bounds.first <= 0.0 ||
      p_bounds.second > 1.0)
    throw DomainError("FitConfig: p_bounds must satisfy 0 < lo < hi <= 1");
  if (multistart_points < 1)
    throw DomainError("FitConfig: multistart_points must be >= 1");
  if (!(rel_tol > 0.0)) throw DomainError("FitConfig: rel_tol must be > 0");
  if (max_iters < 0) throw DomainError("FitConfig: max_iters must be >= 0");
  if (!(interval_level > 0.0 && interval_level < 1.0))
    throw DomainError("FitConfig: interval_level must lie in (0, 1)");
  if (threads < 1) throw DomainError("FitConfig: threads must be >= 1");
  if (n_max_ceiling < 1)
    throw DomainError("FitConfig: n_max_ceiling must be >= 1");
  for (int n : n_max_grid)
    if (n < 1) throw DomainError("FitConfig: n_max grid entries must be >= 1");
  if (warm_start) warm_start->validate();
}

std::vector<int> default_n_max_grid(int m, int ceiling) {
  if (m < 1) m = 1;
  if (ceiling < m) ceiling = m;
  std::vector<int> grid;
  for (long long v = m; v <= ceiling; v *= 2)
    grid.push_back(static_cast<int>(v));
  if (grid.empty() || grid.back() != ceiling) grid.push_back(ceiling);
  return grid;
}

// s linear, p log-spaced: a linear p lattice would put every start in the
// large-p corner although the data usually lives at small p.
std::vector<std::pair<double, double>> multistart_lattice(
    const FitConfig& config) {
  const int m = config.multistart_points;
  const int mp = std::max(1, static_cast<int>(std::floor(std::sqrt(m / 2.0))));
  const int ms = (m + mp - 1) / mp;
  std::vector<std::pair<double, double>> starts;
  starts.reserve(static_cast<std::size_t>(m));
  const double log_p_lo = std::log(config.p_bounds.first);
  const double log_p_hi = std::log(config.p_bounds.second);
  for (int i = 0; i < ms && static_cast<int>(starts.size()) < m; ++i) {
    for (int j = 0; j < mp && static_cast<int>(starts.size()) < m; ++j) {
      const double s = config.s_bounds.first +
                       (i + 0.5) / ms *
                           (config.s_bounds.second - config.s_bounds.first);
      const double p =
          std::exp(log_p_lo + (j + 0.5) / mp * (log_p_hi - log_p_lo));
      starts.emplace_back(s, p);
    }
  }
  return starts;
}

FitResult fit(const ReportHistogram& hist, const FitConfig& config) {
  if (hist.empty())
    throw InsufficientDataError("fit: histogram has no reported offenders");
  config.validate();

  const std::vector<int> grid =
      config.n_max_grid.empty()
          ? default_n_max_grid(hist.m(), config.n_max_ceiling)
          : sanitize_grid(config.n_max_grid);
  for (int n_max : grid)
    if (n_max < hist.m())
      throw InfeasibleSupportError(
          "fit: grid n_max " + std::to_string(n_max) +
          " below largest observed report count " + std::to_string(hist.m()));

  const BoxTransform box{config.s_bounds.first, config.s_bounds.second,
                         config.p_bounds.first, config.p_bounds.second};
  const auto lattice = start_lattice(config, box);

  LikelihoodWorkspace ws;
  ws.reserve(grid.back());
  long evals = 0;

  FitResult result;
  result.profile.reserve(grid.size());
  bool any_converged = false;
  double best_ll = -kInf;
  bool best_converged = false;
  double best_min_start_ll = kInf;  // winning n_max's worst lattice start

  std::optional<std::array<double, 2>> carry;  // previous grid point's optimum
  for (int n_max : grid) {
    auto objective = [&](std::array<double, 2> z) {
      const ModelParams mp{{box.s_from_z(z[0]), n_max}, box.p_from_z(z[1])};
      ++evals;
      return -log_likelihood(hist, mp, config.truncated, ws);
    };

    std::vector<std::array<double, 2>> starts = lattice;
    if (config.warm_start)
      starts.push_back({box.z_from_s(config.warm_start->pl.s),
                        box.z_from_p(config.warm_start->p)});
    if (carry) starts.push_back(*carry);

    NmOutcome local;
    double min_start_ll = kInf;
    for (const auto& z0 : starts) {
      const double start_val = objective(z0);
      min_start_ll = std::min(min_start_ll, -start_val);
      NmOutcome run = nelder_mead_2d(objective, box, z0, {0.15, 1.5},
                                     config.rel_tol, config.max_iters);
      if (start_val < run.value) {  // never report worse than the start itself
        run.value = start_val;
        run.z = z0;
      }
      // Polish against the exact p upper bound: the value criterion goes
      // flat long before z reaches the clamp (p within 1e-7 of 1 sits at
      // z ~ 16), but boundary identities such as p = 1 => f(0) = 0 only
      // hold at the exact bound. Ties go to the boundary point.
      if (run.z[1] != BoxTransform::kZClamp) {
        const std::array<double, 2> at_bound{run.z[0], BoxTransform::kZClamp};
        const double v = objective(at_bound);
        if (v <= run.value) {
          run.value = v;
          run.z = at_bound;
        }
      }
      if (run.value < local.value ||
          (run.value == local.value && run.converged && !local.converged))
        local = run;
    }

    ProfilePoint point;
    point.n_max = n_max;
    point.s = box.s_from_z(local.z[0]);
    point.p = box.p_from_z(local.z[1]);
    point.loglik = -local.value;
    point.converged = local.converged;
    result.profile.push_back(point);
    any_converged = any_converged || local.converged;
    carry = local.z;

    if (point.loglik > best_ll) {  // strict: ties stay with smaller n_max
      best_ll = point.loglik;
      best_converged = point.converged;
      best_min_start_ll = min_start_ll;
      result.params = ModelParams{{point.s, n_max}, point.p};
    }
  }

  result.loglik = best_ll;
  result.converged = best_converged;
  result.n_evaluations = evals;
  result.boundary =
      grid.size() >= 2 && result.params.pl.n_max == grid.back();
  result.flat_likelihood =
      std::isfinite(best_ll) &&
      best_ll - best_min_start_ll <= 1e-9 * std::max(1.0, std::abs(best_ll));

  if (!any_converged)
    throw ConvergenceError(
        "fit: no start converged for any n_max in the grid", result);
  return result;
}

std::vector<std::pair<int, double>> profile_n_max(const ReportHistogram& hist,
                                                  const FitConfig& config) {
  const FitResult result = fit(hist, config);
  std::vector<std::pair<int, double>> trace;
  trace.reserve(result.profile.size());
  for (const auto& point : result.profile)
    trace.emplace_back(point.n_max, point.loglik);
  return trace;
}

BootstrapResult bootstrap(const ReportHistogram& hist, const FitResult& fitted,
                          const FitConfig& config, int b, std::uint64_t seed) {
  if (b < 1) throw DomainError("bootstrap: B must be >= 1");
  if (!fitted.converged)
    throw DomainError("bootstrap: requires a converged fit");
  config.validate();
  fitted.params.validate();

  const std::vector<int> base_grid =
      config.n_max_grid.empty()
          ? default_n_max_grid(hist.m(), config.n_max_ceiling)
          : sanitize_grid(config.n_max_grid);

  // Refits warm-start at the MLE with a trimmed lattice; 200 replicates at
  // the full multistart budget would dominate the runtime without changing
  // the intervals.
  FitConfig replicate_config = config;
  replicate_config.multistart_points = std::min(config.multistart_points, 2);
  replicate_config.warm_start = fitted.params;
  replicate_config.threads = 1;

  const PowerLawSampler sampler(fitted.params.pl);
  const double p_hat = fitted.params.p;
  const std::int64_t r_target = hist.r();

  BootstrapResult result;
  result.level = config.interval_level;
  result.replicates.resize(static_cast<std::size_t>(b));

  parallel_for_index(
      static_cast<std::size_t>(b), config.threads, [&](std::size_t idx) {
        BootstrapReplicate& rep = result.replicates[idx];
        rep.prevalence.p_zero = kNaN;
        rep.prevalence.o_hat = kNaN;
        rep.prevalence.t_hat = kNaN;
        Rng rng(derive_seed(seed, idx));
        ReportHistogram synthetic;
        std::int64_t accumulated = 0;
        while (accumulated < r_target) {
          const int n = sampler.draw(rng);
          const long k = rng.binomial(n, p_hat);
          if (k >= 1) {
            synthetic.add(static_cast<int>(k));
            ++accumulated;
          }
        }

        std::vector<int> grid;
        for (int n_max : base_grid)
          if (n_max >= synthetic.m()) grid.push_back(n_max);
        if (grid.empty()) return;  // replicate outgrew the grid: failed

        FitConfig cfg = replicate_config;
        cfg.n_max_grid = grid;
        try {
          rep.fit = fit(synthetic, cfg);
          rep.converged = rep.fit.converged;
          if (rep.converged)
            rep.prevalence = estimate_prevalence(synthetic, rep.fit);
        } catch (const ConvergenceError& e) {
          rep.fit = e.partial();
          rep.converged = false;
        } catch (const std::exception&) {
          rep.converged = false;
        }
      });

  std::vector<double> s_v, p_v, n_v, pz_v, o_v, t_v;
  for (const auto& rep : result.replicates) {
    if (!rep.converged) {
      ++result.n_failed;
      continue;
    }
    s_v.push_back(rep.fit.params.pl.s);
    p_v.push_back(rep.fit.params.p);
    n_v.push_back(static_cast<double>(rep.fit.params.pl.n_max));
    pz_v.push_back(rep.prevalence.p_zero);
    o_v.push_back(rep.prevalence.o_hat);
    t_v.push_back(rep.prevalence.t_hat);
  }
  result.unreliable = result.n_failed * 5 > b;  // > 20% failed
  const double level = config.interval_level;
  result.intervals.s = percentile_interval(std::move(s_v), level);
  result.intervals.p = percentile_interval(std::move(p_v), level);
  result.intervals.n_max = percentile_interval(std::move(n_v), level);
  result.intervals.p_zero = percentile_interval(std::move(pz_v), level);
  result.intervals.o_hat = percentile_interval(std::move(o_v), level);
  result.intervals.t_hat = percentile_interval(std::move(t_v), level);
  return result;
}

}  // namespace nmixprev
