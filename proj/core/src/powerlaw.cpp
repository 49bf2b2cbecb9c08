#include "nmixprev/powerlaw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nmixprev/errors.hpp"

namespace nmixprev {

void PowerLawParams::validate() const {
  if (n_max < 1) throw DomainError("PowerLawParams: n_max must be >= 1");
  if (!std::isfinite(s) || s < 0.0)
    throw DomainError("PowerLawParams: s must be finite and >= 0");
}

namespace {

// Kahan-compensated sum of f(i) for i = 1..n_max.
template <typename F>
double compensated_sum(int n_max, F&& term) {
  double sum = 0.0;
  double c = 0.0;
  for (int i = 1; i <= n_max; ++i) {
    const double y = term(i) - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace

double pl_log_normalizer(const PowerLawParams& params) {
  params.validate();
  if (params.n_max == 1) return 0.0;
  const double s = params.s;
  const double sum = compensated_sum(
      params.n_max, [s](int i) { return std::exp(-s * std::log(i)); });
  return std::log(sum);
}

double pl_log_pmf(int n, const PowerLawParams& params, double log_normalizer) {
  params.validate();
  if (n < 1 || n > params.n_max)
    throw DomainError("pl_log_pmf: n outside support [1, n_max]");
  return -params.s * std::log(n) - log_normalizer;
}

double pl_log_pmf(int n, const PowerLawParams& params) {
  return pl_log_pmf(n, params, pl_log_normalizer(params));
}

double pl_pmf(int n, const PowerLawParams& params) {
  return std::exp(pl_log_pmf(n, params));
}

double pl_pmf(int n, const PowerLawParams& params, double log_normalizer) {
  return std::exp(pl_log_pmf(n, params, log_normalizer));
}

double pl_mean(const PowerLawParams& params) {
  params.validate();
  if (params.n_max == 1) return 1.0;
  const double s = params.s;
  const double log_z = pl_log_normalizer(params);
  return compensated_sum(params.n_max, [s, log_z](int i) {
    return std::exp((1.0 - s) * std::log(i) - log_z);
  });
}

PowerLawSampler::PowerLawSampler(const PowerLawParams& params)
    : params_(params) {
  params.validate();
  cdf_.resize(static_cast<std::size_t>(params.n_max));
  const double log_z = pl_log_normalizer(params);
  double cum = 0.0;
  double c = 0.0;
  for (int n = 1; n <= params.n_max; ++n) {
    const double y = std::exp(-params.s * std::log(n) - log_z) - c;
    const double t = cum + y;
    c = (t - cum) - y;
    cum = t;
    cdf_[static_cast<std::size_t>(n - 1)] = cum;
  }
  cdf_.back() = 1.0;  // absorb the last rounding residue
}

int PowerLawSampler::draw(Rng& rng) const {
  const double u = rng.next_double();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<int>(it - cdf_.begin()) + 1;
}

std::vector<int> pl_sample(const PowerLawParams& params, Rng& rng,
                           std::size_t count) {
  PowerLawSampler sampler(params);
  std::vector<int> draws;
  draws.reserve(count);
  for (std::size_t i = 0; i < count; ++i) draws.push_back(sampler.draw(rng));
  return draws;
}

LogLogFit loglog_slope(std::span<const std::pair<double, double>> bins) {
  std::vector<std::pair<double, double>> pts;  // (log value, log count)
  for (const auto& [value, count] : bins) {
    if (count <= 0.0) continue;
    if (value <= 0.0)
      throw DomainError("loglog_slope: positive-count bin with value <= 0");
    pts.emplace_back(std::log(value), std::log(count));
  }
  if (pts.size() < 2)
    throw InsufficientDataError(
        "loglog_slope: need at least 2 bins with count > 0");

  const double n = static_cast<double>(pts.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (sxx == 0.0)
    throw InsufficientDataError("loglog_slope: all bin values identical");

  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy == 0.0) {
    fit.r_squared = 1.0;  // horizontal data fits its own flat line
  } else {
    double ss_res = 0.0;
    for (const auto& [x, y] : pts) {
      const double r = y - (fit.intercept + fit.slope * x);
      ss_res += r * r;
    }
    fit.r_squared = 1.0 - ss_res / syy;
  }
  return fit;
}

}  // namespace nmixprev
