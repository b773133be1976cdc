#pragma once

// Rank-based probability integral transform and Kolmogorov-Smirnov tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sjc {

/// Pseudo-observations: rank(x) / (n + 1) with mid-ranks for ties.
///
/// The result depends on the ordering of the sample only, and every value
/// lies strictly inside (0, 1).
inline std::vector<double> empirical_pit(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) {
    throw std::invalid_argument("insufficient sample: empirical_pit needs at least 2 values");
  }
  for (double x : samples) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("empirical_pit: non-finite sample value");
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return samples[a] < samples[b]; });

  std::vector<double> pit(n);
  const double scale = 1.0 / static_cast<double>(n + 1);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && samples[order[j]] == samples[order[i]]) ++j;
    // ranks i+1 .. j share their average
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) pit[order[t]] = mid_rank * scale;
    i = j;
  }
  return pit;
}

/// Paired pseudo-observations (u_i, v_i), all strictly inside the unit square.
class PseudoObservations {
 public:
  PseudoObservations(std::vector<double> u, std::vector<double> v) : u_(std::move(u)), v_(std::move(v)) {
    if (u_.size() != v_.size()) {
      throw std::invalid_argument("pseudo-observation margins differ in length");
    }
    if (u_.size() < 2) {
      throw std::invalid_argument("insufficient sample: need at least 2 pseudo-observations");
    }
    for (std::size_t i = 0; i < u_.size(); ++i) {
      if (!(u_[i] > 0.0 && u_[i] < 1.0 && v_[i] > 0.0 && v_[i] < 1.0)) {
        throw std::invalid_argument("pseudo-observation outside the open unit square at row " +
                                    std::to_string(i));
      }
    }
  }

  /// Two-step construction from raw data: each margin is replaced by its PIT.
  static PseudoObservations from_raw(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
      throw std::invalid_argument("raw margins differ in length");
    }
    return PseudoObservations(empirical_pit(x), empirical_pit(y));
  }

  std::size_t size() const noexcept { return u_.size(); }
  std::span<const double> u() const noexcept { return u_; }
  std::span<const double> v() const noexcept { return v_; }

 private:
  std::vector<double> u_;
  std::vector<double> v_;
};

struct KsResult {
  double statistic;
  double p_value;
};

/// Asymptotic Kolmogorov distribution: P(sqrt(n) D > sqrt(n) d) for effective size n.
///
/// Uses 2 sum_k (-1)^(k-1) exp(-2 k^2 x^2), x = sqrt(n) d, truncated once terms
/// drop below 1e-12. Below x = 1 that series alternates slowly and loses
/// the last digits near p = 1, so the equivalent theta-function form
/// 1 - sqrt(2 pi) / x sum_k exp(-(2k - 1)^2 pi^2 / (8 x^2)) is used there.
inline double kolmogorov_p_value(double n, double d) {
  if (d <= 0.0) return 1.0;
  const double x = std::sqrt(n) * d;
  if (x < 1.0) {
    const double c = std::numbers::pi * std::numbers::pi / (8.0 * x * x);
    double cdf = 0.0;
    for (int k = 1; k < 1000; ++k) {
      const double term = std::exp(-c * (2 * k - 1) * (2 * k - 1));
      cdf += term;
      if (term < 1e-12 * cdf || term == 0.0) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / x * cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k < 1000000; ++k) {
    const double term = std::exp(-2.0 * x * x * k * static_cast<double>(k));
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-12) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// One-sample KS test of `pits` against Uniform(0, 1).
inline KsResult ks_uniform_test(std::span<const double> pits) {
  if (pits.empty()) {
    throw std::invalid_argument("ks_uniform_test: empty sample");
  }
  std::vector<double> sorted(pits.begin(), pits.end());
  for (double x : sorted) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw std::invalid_argument("ks_uniform_test: value outside [0,1]");
    }
  }
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max({d, hi - sorted[i], sorted[i] - lo});
  }
  return {d, kolmogorov_p_value(n, d)};
}

/// Two-sample KS test with the asymptotic p-value at n1 n2 / (n1 + n2).
inline KsResult ks_two_sample_test(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("ks_two_sample_test: empty sample");
  }
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= t) ++i;
    while (j < y.size() && y[j] <= t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return {d, kolmogorov_p_value(nx * ny / (nx + ny), d)};
}

}  // namespace sjc
