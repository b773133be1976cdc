#pragma once

// Extended-precision evaluation of the copula distribution function, used as
// a finite-difference oracle for the analytic density. Double precision
// cannot resolve densities near 1e-10 from differences of a distribution
// function of order 1e-2.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "sjc/copula.hpp"

namespace sjc::testing {

using Quad = boost::multiprecision::cpp_bin_float_quad;

/// Mixed second central difference of the SJC distribution function.
inline double fd_density(double u, double v, const TailParams& params, double step = 1e-4,
                         Reflection reflection = Reflection::swapped) {
  const detail::BasicSjcKernel<Quad> kernel(params, reflection);
  const Quad h(step), qu(u), qv(v);
  const Quad d = kernel.cdf(qu + h, qv + h) - kernel.cdf(qu + h, qv - h) - kernel.cdf(qu - h, qv + h) +
                 kernel.cdf(qu - h, qv - h);
  return static_cast<double>(d / (4 * h * h));
}

}  // namespace sjc::testing
