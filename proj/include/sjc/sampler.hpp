#pragma once

// Exact SJC sampling by inversion of the conditional distribution h(v | u).

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sjc/copula.hpp"
#include "sjc/parallel.hpp"
#include "sjc/random.hpp"

namespace sjc {

struct SampleBatch {
  std::vector<UnitPair> pairs;
  TailParams params;
  std::uint64_t seed;
  Reflection reflection = Reflection::swapped;

  std::vector<double> us() const {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(p.u());
    return out;
  }
  std::vector<double> vs() const {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(p.v());
    return out;
  }
};

namespace detail {

inline constexpr double kInversionTolerance = 1e-10;
inline constexpr int kInversionMaxIterations = 60;

// Solves h(v | u) = w on [eps, 1 - eps]. Newton steps are taken when they stay
// inside the current bracket, otherwise the bracket is bisected.
inline double invert_conditional(const SjcKernel& kernel, double u, double w) {
  double lo = kUnitEps, hi = 1.0 - kUnitEps;
  if (w <= kernel.conditional(u, lo)) return lo;
  if (w >= kernel.conditional(u, hi)) return hi;
  double v = w;
  for (int it = 0; it < kInversionMaxIterations; ++it) {
    const double f = kernel.conditional(u, v) - w;
    if (std::abs(f) <= kInversionTolerance) return v;
    if (f < 0.0) {
      lo = v;
    } else {
      hi = v;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return 0.5 * (lo + hi);
    const double slope = kernel.pdf(u, v);
    double next = v - f / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    v = next;
  }
  return v;
}

}  // namespace detail

/// Draws a single pair from (u, w) uniforms: v = h^{-1}(w | u).
inline UnitPair sjc_draw(double u, double w, const TailParams& params,
                         Reflection reflection = Reflection::swapped) {
  const detail::SjcKernel kernel(params, reflection);
  const UnitPair p(u, 0.5);
  return UnitPair(p.u(), detail::invert_conditional(kernel, p.u(), w));
}

/// n i.i.d. draws from the SJC copula. Draw i depends only on (seed, i).
inline SampleBatch sample_sjc(std::size_t n, const TailParams& params, std::uint64_t seed,
                              Reflection reflection = Reflection::swapped) {
  if (n == 0) throw std::invalid_argument("sample_sjc: n must be positive");
  const detail::SjcKernel kernel(params, reflection);
  std::vector<UnitPair> pairs(n, UnitPair(0.5, 0.5));
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      const double u = UnitPair::clamp_unit(uniform_at(seed, 2 * i));
      const double w = uniform_at(seed, 2 * i + 1);
      pairs[i] = UnitPair(u, detail::invert_conditional(kernel, u, w));
    }
  });
  return {std::move(pairs), params, seed, reflection};
}

/// Independence copula draws, used where a subsample has no planted dependence.
inline SampleBatch sample_independent(std::size_t n, std::uint64_t seed) {
  std::vector<UnitPair> pairs;
  pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pairs.emplace_back(uniform_at(seed, 2 * i), uniform_at(seed, 2 * i + 1));
  return {std::move(pairs), TailParams(kLambdaMin, kLambdaMin), seed, Reflection::swapped};
}

}  // namespace sjc
