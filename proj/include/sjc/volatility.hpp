#pragma once

// GARCH(1,1) quasi-maximum-likelihood filter and Engle's ARCH LM test.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "sjc/optimize.hpp"
#include "sjc/random.hpp"

namespace sjc {

/// r_t = mu + e_t,  sigma_t^2 = omega + alpha e_{t-1}^2 + beta sigma_{t-1}^2.
struct GarchParams {
  double mu = 0.0;
  double omega = 1.0;
  double alpha = 0.0;
  double beta = 0.0;

  bool stationary() const noexcept { return alpha + beta < 1.0; }
  double unconditional_variance() const noexcept { return omega / (1.0 - alpha - beta); }

  void validate() const {
    if (!(omega > 0.0) || !(alpha >= 0.0) || !(beta >= 0.0) || !stationary() || !std::isfinite(mu)) {
      throw std::invalid_argument("GARCH(1,1) parameters must satisfy omega > 0, alpha, beta >= 0, alpha + beta < 1");
    }
  }
};

struct GarchFit {
  GarchParams params;
  double loglik = 0.0;
  std::vector<double> residuals;  // standardized, (r_t - mu) / sigma_t
  bool converged = false;
};

struct GarchOptions {
  std::size_t min_length = 250;
  NelderMeadOptions simplex{.initial_step = 0.5, .x_tolerance = 1e-7, .f_tolerance = 1e-12,
                            .max_evaluations = 3000};
};

struct ArchTestResult {
  double statistic = 0.0;
  std::size_t lags = 0;
  double p_value = 1.0;
  bool degenerate = false;  // zero-variance regression; p_value forced to 1
};

namespace detail {

inline constexpr double kMaxPersistence = 0.9999;

// Multistart (alpha, beta) pairs; omega is matched to the sample variance.
inline constexpr std::array<std::array<double, 2>, 5> kGarchStarts{{
    {0.05, 0.90}, {0.10, 0.80}, {0.02, 0.97}, {0.15, 0.60}, {0.05, 0.50}}};

// Gaussian log-likelihood; fills sigma2 when non-null.
inline double garch_loglik(std::span<const double> r, const GarchParams& p, std::vector<double>* sigma2) {
  const std::size_t n = r.size();
  double var0 = 0.0, mean_e = 0.0;
  for (double x : r) mean_e += x - p.mu;
  mean_e /= static_cast<double>(n);
  for (double x : r) var0 += (x - p.mu - mean_e) * (x - p.mu - mean_e);
  var0 /= static_cast<double>(n);
  if (!(var0 > 0.0)) var0 = p.omega;

  if (sigma2) sigma2->resize(n);
  double s2 = var0;
  double ll = 0.0;
  double prev_e = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) s2 = p.omega + p.alpha * prev_e * prev_e + p.beta * s2;
    const double e = r[t] - p.mu;
    ll -= 0.5 * (std::log(2.0 * std::numbers::pi * s2) + e * e / s2);
    if (sigma2) (*sigma2)[t] = s2;
    prev_e = e;
  }
  return ll;
}

inline GarchParams garch_from_unconstrained(const std::vector<double>& th) {
  const double persistence = kMaxPersistence * logistic(th[2]);
  const double share = logistic(th[3]);
  return {th[0], std::exp(th[1]), persistence * (1.0 - share), persistence * share};
}

inline std::vector<double> garch_to_unconstrained(const GarchParams& p) {
  const double persistence = p.alpha + p.beta;
  return {p.mu, std::log(p.omega), logit(persistence / kMaxPersistence), logit(p.beta / persistence)};
}

inline void require_finite(std::span<const double> r, const char* who) {
  for (double x : r) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(who) + ": non-finite value");
  }
}

}  // namespace detail

/// Gaussian log-likelihood of `returns` under `params`, with sigma_0^2 set to
/// the sample variance of the demeaned series.
inline double garch11_loglik(std::span<const double> returns, const GarchParams& params) {
  return detail::garch_loglik(returns, params, nullptr);
}

/// The deterministic multistart points used by garch11_fit, on the scale of `returns`.
inline std::vector<GarchParams> garch11_start_points(std::span<const double> returns) {
  double mean = 0.0, var = 0.0;
  for (double x : returns) mean += x;
  mean /= static_cast<double>(returns.size());
  for (double x : returns) var += (x - mean) * (x - mean);
  var /= static_cast<double>(returns.size());
  std::vector<GarchParams> out;
  for (const auto& [a, b] : detail::kGarchStarts) out.push_back({mean, var * (1.0 - a - b), a, b});
  return out;
}

inline GarchFit garch11_fit(std::span<const double> returns, const GarchOptions& options = {}) {
  if (returns.size() < options.min_length) {
    throw std::invalid_argument("garch11_fit: series too short (" + std::to_string(returns.size()) +
                                " < " + std::to_string(options.min_length) + ")");
  }
  detail::require_finite(returns, "garch11_fit");

  // Work on the standardized series so the simplex steps are scale free.
  double mean = 0.0, var = 0.0;
  for (double r : returns) mean += r;
  mean /= static_cast<double>(returns.size());
  for (double r : returns) var += (r - mean) * (r - mean);
  var /= static_cast<double>(returns.size());
  const auto [lo, hi] = std::minmax_element(returns.begin(), returns.end());
  if (*lo == *hi || !(var > 0.0) || !std::isfinite(var)) {
    throw std::domain_error("garch11_fit: zero-variance series");
  }
  const double scale = std::sqrt(var);
  std::vector<double> x(returns.size());
  for (std::size_t t = 0; t < x.size(); ++t) x[t] = (returns[t] - mean) / scale;

  auto objective = [&](const std::vector<double>& th) {
    return -detail::garch_loglik(x, detail::garch_from_unconstrained(th), nullptr);
  };

  NelderMeadResult best;
  for (const auto& [a, b] : detail::kGarchStarts) {
    const GarchParams start{0.0, 1.0 - a - b, a, b};
    NelderMeadResult run = nelder_mead(objective, detail::garch_to_unconstrained(start), options.simplex);
    if (run.value < best.value) best = std::move(run);
  }

  const GarchParams std_params = detail::garch_from_unconstrained(best.x);
  std::vector<double> sigma2;
  const double ll_std = detail::garch_loglik(x, std_params, &sigma2);

  GarchFit fit;
  fit.params = {mean + scale * std_params.mu, var * std_params.omega, std_params.alpha, std_params.beta};
  fit.loglik = ll_std - static_cast<double>(x.size()) * std::log(scale);
  fit.residuals.resize(x.size());
  double zm = 0.0, zv = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    fit.residuals[t] = (x[t] - std_params.mu) / std::sqrt(sigma2[t]);
    zm += fit.residuals[t];
  }
  zm /= static_cast<double>(x.size());
  for (double z : fit.residuals) zv += (z - zm) * (z - zm);
  zv /= static_cast<double>(x.size() - 1);
  fit.converged = best.converged && std::isfinite(fit.loglik) && zv >= 0.8 && zv <= 1.2;
  return fit;
}

/// Simulates T observations; deterministic given seed.
inline std::vector<double> garch11_simulate(const GarchParams& params, std::size_t T, std::uint64_t seed) {
  params.validate();
  constexpr std::size_t kBurnIn = 500;
  CounterRng rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> out;
  out.reserve(T);
  double s2 = params.unconditional_variance();
  double e = 0.0;
  for (std::size_t t = 0; t < T + kBurnIn; ++t) {
    s2 = params.omega + params.alpha * e * e + params.beta * s2;
    e = std::sqrt(s2) * normal(rng);
    if (t >= kBurnIn) out.push_back(params.mu + e);
  }
  return out;
}

/// Engle's LM test: regress squared demeaned values on a constant and `lags`
/// of themselves; (T - lags) R^2 is asymptotically chi-squared(lags).
inline ArchTestResult arch_lm_test(std::span<const double> series, std::size_t lags = 5) {
  if (lags == 0) throw std::invalid_argument("arch_lm_test: lags must be positive");
  if (series.size() <= lags + 1) throw std::invalid_argument("arch_lm_test: series too short");
  detail::require_finite(series, "arch_lm_test");

  const auto n = static_cast<Eigen::Index>(series.size());
  const auto p = static_cast<Eigen::Index>(lags);
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(n);
  Eigen::VectorXd e2(n);
  for (Eigen::Index t = 0; t < n; ++t) e2(t) = (series[static_cast<std::size_t>(t)] - mean) *
                                                 (series[static_cast<std::size_t>(t)] - mean);

  const Eigen::Index rows = n - p;
  Eigen::VectorXd y = e2.tail(rows);
  Eigen::MatrixXd X(rows, p + 1);
  X.col(0).setOnes();
  for (Eigen::Index j = 1; j <= p; ++j) X.col(j) = e2.segment(p - j, rows);

  ArchTestResult res;
  res.lags = lags;
  const double sst = (y.array() - y.mean()).square().sum();
  if (!(sst > 1e-300 * static_cast<double>(rows)) || sst <= 1e-24 * y.squaredNorm()) {
    res.degenerate = true;
    return res;
  }
  const Eigen::VectorXd coef = X.colPivHouseholderQr().solve(y);
  const double ssr = (y - X * coef).squaredNorm();
  const double r2 = std::clamp(1.0 - ssr / sst, 0.0, 1.0);
  res.statistic = static_cast<double>(rows) * r2;
  res.p_value = boost::math::gamma_q(0.5 * static_cast<double>(lags), 0.5 * res.statistic);
  return res;
}

}  // namespace sjc
