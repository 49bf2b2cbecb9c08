#include "nmixprev/nmixture.hpp"

#include <cmath>
#include <limits>

#include "nmixprev/errors.hpp"

namespace nmixprev {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// f(0) above 1 - 1e-12 means the truncated model is undefined.
const double kLogDegenerate = std::log(1e-12);
// Contributions more than 45 nats below the running max are below 3e-20
// relative and are not worth an exp().
constexpr double kSkipWindow = -45.0;
}  // namespace

void ModelParams::validate() const {
  pl.validate();
  if (!(p >= 0.0 && p <= 1.0))
    throw DomainError("ModelParams: p must lie in [0, 1]");
}

double binom_log_pmf(int k, int n, double p) {
  if (k < 0 || k > n)
    throw DomainError("binom_log_pmf: k must lie in [0, n]");
  if (!(p >= 0.0 && p <= 1.0))
    throw DomainError("binom_log_pmf: p must lie in [0, 1]");
  if (p == 0.0) return k == 0 ? 0.0 : kNegInf;
  if (p == 1.0) return k == n ? 0.0 : kNegInf;
  const double coef = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                      std::lgamma(n - k + 1.0);
  return coef + k * std::log(p) + (n - k) * std::log1p(-p);
}

void LikelihoodWorkspace::reserve(int n_max) {
  const auto need = static_cast<std::size_t>(n_max) + 1;
  if (log_n_.size() >= need) return;
  std::size_t old = log_n_.size();
  if (old < 2) {
    log_n_.assign(2, 0.0);
    log_fact_.assign(2, 0.0);
    old = 2;
  }
  log_n_.resize(need);
  log_fact_.resize(need);
  for (std::size_t i = old; i < need; ++i) {
    log_n_[i] = std::log(static_cast<double>(i));
    log_fact_[i] = log_fact_[i - 1] + log_n_[i];
  }
}

double LikelihoodWorkspace::log_normalizer(const PowerLawParams& params) {
  if (params.s == cached_s_ && params.n_max == cached_n_max_)
    return cached_log_z_;
  reserve(params.n_max);
  double sum = 0.0;
  double c = 0.0;
  for (int i = 1; i <= params.n_max; ++i) {
    const double y = std::exp(-params.s * log_n_[static_cast<std::size_t>(i)]) - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  cached_s_ = params.s;
  cached_n_max_ = params.n_max;
  cached_log_z_ = std::log(sum);
  return cached_log_z_;
}

double nmix_log_pmf(int k, const ModelParams& params,
                    LikelihoodWorkspace& ws) {
  params.validate();
  const int n_max = params.pl.n_max;
  if (k < 0 || k > n_max)
    throw DomainError("nmix_log_pmf: k outside [0, n_max]");
  const double p = params.p;
  const double s = params.pl.s;

  if (p == 0.0) return k == 0 ? 0.0 : kNegInf;
  if (p == 1.0) {
    // Every target reports, so report counts equal target counts.
    if (k == 0) return kNegInf;
    ws.reserve(n_max);
    return -s * ws.log_n(k) - ws.log_normalizer(params.pl);
  }
  if (n_max == 1) return k == 1 ? std::log(p) : std::log1p(-p);

  ws.reserve(n_max);
  const double log_z = ws.log_normalizer(params.pl);
  const double l1mp = std::log1p(-p);
  const int n0 = k > 1 ? k : 1;

  // t(n) = log C(n,k) + k log p + (n-k) log(1-p) + log g(n). The binomial
  // log-coefficient is carried by an incremental recurrence in n, so the
  // sweep does no log-gamma work: log C(n0,k) = 0 because n0 is k or 1.
  double t = (k > 0 ? k * std::log(p) : 0.0) + (n0 - k) * l1mp -
             s * ws.log_n(n0) - log_z;
  double running_max = t;
  double acc = 1.0;
  for (int n = n0 + 1; n <= n_max; ++n) {
    t += ws.log_n(n) - ws.log_n(n - k) + l1mp -
         s * (ws.log_n(n) - ws.log_n(n - 1));
    double w;
    if (t > running_max) {
      acc = acc * std::exp(running_max - t) + 1.0;
      running_max = t;
      w = 1.0;
    } else {
      const double d = t - running_max;
      w = d > kSkipWindow ? std::exp(d) : 0.0;
      acc += w;
    }
    // Remaining-tail bound: for n' >= n the term ratio is at most
    // rho = (1-p)(n+1)/(n+1-k) (the (n/(n+1))^s factor is <= 1 for s >= 0
    // and (n+1)/(n+1-k) decreases in n). Once the geometric bound on the
    // tail is negligible against the accumulated sum, stop.
    const double rho =
        (1.0 - p) * (static_cast<double>(n) + 1.0) /
        (static_cast<double>(n) + 1.0 - static_cast<double>(k));
    if (rho < 1.0) {
      const double wt = w > 0.0 ? w : std::exp(t - running_max);
      if (wt * rho < (1.0 - rho) * acc * 1e-17) break;
    }
  }
  return running_max + std::log(acc);
}

double nmix_log_pmf(int k, const ModelParams& params) {
  LikelihoodWorkspace ws;
  return nmix_log_pmf(k, params, ws);
}

double nmix_pmf(int k, const ModelParams& params, LikelihoodWorkspace& ws) {
  params.validate();
  if (k < 0 || k > params.pl.n_max)
    throw DomainError("nmix_pmf: k outside [0, n_max]");
  // Exact in linear space where the answer is a plain expression of p;
  // exp(log(...)) would cost an ulp on identities the tests pin down.
  if (params.p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (params.pl.n_max == 1) return k == 1 ? params.p : 1.0 - params.p;
  return std::exp(nmix_log_pmf(k, params, ws));
}

double nmix_pmf(int k, const ModelParams& params) {
  LikelihoodWorkspace ws;
  return nmix_pmf(k, params, ws);
}

double log_one_minus_f0(const ModelParams& params, LikelihoodWorkspace& ws) {
  params.validate();
  const double p = params.p;
  if (p == 1.0) return 0.0;
  if (p == 0.0) return kNegInf;
  if (params.pl.n_max == 1) return std::log(p);

  const double log_f0 = nmix_log_pmf(0, params, ws);
  if (log_f0 < std::log(0.9)) return std::log1p(-std::exp(log_f0));

  // f(0) close to 1: 1 - f(0) = sum_n g(n) (1 - (1-p)^n), summed in linear
  // space; every factor lies in (0, 1] so nothing cancels.
  const int n_max = params.pl.n_max;
  const double log_z = ws.log_normalizer(params.pl);
  const double s = params.pl.s;
  const double l1mp = std::log1p(-p);
  double sum = 0.0;
  double c = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    const double e = static_cast<double>(n) * l1mp;
    const double w = e < -40.0 ? 1.0 : -std::expm1(e);
    const double term = std::exp(-s * ws.log_n(n) - log_z) * w;
    const double y = term - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  return std::log(sum);
}

double log_one_minus_f0(const ModelParams& params) {
  LikelihoodWorkspace ws;
  return log_one_minus_f0(params, ws);
}

double nmix_pmf_truncated(int k, const ModelParams& params,
                          LikelihoodWorkspace& ws) {
  if (k < 1) throw DomainError("nmix_pmf_truncated: k must be >= 1");
  const double log_num = nmix_log_pmf(k, params, ws);
  const double log_denom = log_one_minus_f0(params, ws);
  if (log_denom < kLogDegenerate)
    throw DegenerateModelError(
        "nmix_pmf_truncated: f(0) >= 1 - 1e-12, truncated model undefined");
  return std::exp(log_num - log_denom);
}

double nmix_pmf_truncated(int k, const ModelParams& params) {
  LikelihoodWorkspace ws;
  return nmix_pmf_truncated(k, params, ws);
}

double log_likelihood(const ReportHistogram& hist, const ModelParams& params,
                      bool truncated, LikelihoodWorkspace& ws) {
  params.validate();
  if (hist.m() > params.pl.n_max)
    throw InfeasibleSupportError(
        "log_likelihood: observed report count exceeds n_max");
  double ll = 0.0;
  for (const auto& [i, k_i] : hist.counts()) {
    const double lf = nmix_log_pmf(i, params, ws);
    if (lf == kNegInf) return kNegInf;
    ll += static_cast<double>(k_i) * lf;
  }
  if (truncated && !hist.empty()) {
    const double log_denom = log_one_minus_f0(params, ws);
    if (log_denom < kLogDegenerate)
      throw DegenerateModelError(
          "log_likelihood: f(0) >= 1 - 1e-12, truncated model undefined");
    ll -= static_cast<double>(hist.r()) * log_denom;
  }
  return ll;
}

double log_likelihood(const ReportHistogram& hist, const ModelParams& params,
                      bool truncated) {
  LikelihoodWorkspace ws;
  return log_likelihood(hist, params, truncated, ws);
}

}  // namespace nmixprev
