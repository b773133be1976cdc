#pragma once

// Joe-Clayton (BB7) and symmetrized Joe-Clayton copulas: distribution
// functions, densities, conditional distributions and tail diagnostics.
//
// All evaluation happens in log space on (x, 1 - x) pairs so that neither
// corner of the unit square loses precision.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sjc {

inline constexpr double kUnitEps = 1e-12;
inline constexpr double kDensityFloor = 1e-300;
inline constexpr double kLambdaMin = 1e-6;
inline constexpr double kLambdaMax = 1.0 - 1e-6;

/// Upper and lower tail-dependence coefficients, both in the open unit interval.
class TailParams {
 public:
  TailParams(double lambda_u, double lambda_l) : lambda_u_(lambda_u), lambda_l_(lambda_l) {
    if (!(lambda_u > 0.0 && lambda_u < 1.0) || !(lambda_l > 0.0 && lambda_l < 1.0)) {
      throw std::invalid_argument("tail parameters must lie in (0,1), got (" +
                                  std::to_string(lambda_u) + ", " + std::to_string(lambda_l) + ")");
    }
  }

  double lambda_u() const noexcept { return lambda_u_; }
  double lambda_l() const noexcept { return lambda_l_; }

  /// (lambda_l, lambda_u): the parameters of the survival copula.
  TailParams swapped() const noexcept { return TailParams(lambda_l_, lambda_u_, Unchecked{}); }

  friend bool operator==(const TailParams&, const TailParams&) = default;

 private:
  struct Unchecked {};
  TailParams(double u, double l, Unchecked) noexcept : lambda_u_(u), lambda_l_(l) {}

  double lambda_u_;
  double lambda_l_;
};

/// Joe-Clayton shape parameters: k >= 1 drives the upper tail, r > 0 the lower.
struct ShapeParams {
  double k;
  double r;
};

inline ShapeParams shape_from_tail(const TailParams& params) noexcept {
  const double lu = std::clamp(params.lambda_u(), kLambdaMin, kLambdaMax);
  const double ll = std::clamp(params.lambda_l(), kLambdaMin, kLambdaMax);
  return {1.0 / std::log2(2.0 - lu), -1.0 / std::log2(ll)};
}

inline TailParams tail_from_shape(const ShapeParams& shape) {
  return TailParams(2.0 - std::exp2(1.0 / shape.k), std::exp2(-1.0 / shape.r));
}

/// A point of the open unit square; coordinates are clamped to [eps, 1 - eps].
class UnitPair {
 public:
  UnitPair(double u, double v) : u_(clamp_unit(u)), v_(clamp_unit(v)) {}

  double u() const noexcept { return u_; }
  double v() const noexcept { return v_; }
  UnitPair reflected() const noexcept { return UnitPair(1.0 - u_, 1.0 - v_); }
  UnitPair transposed() const noexcept { return UnitPair(v_, u_); }

  static double clamp_unit(double x) {
    if (std::isnan(x)) {
      throw std::invalid_argument("unit-interval coordinate is NaN");
    }
    return std::clamp(x, kUnitEps, 1.0 - kUnitEps);
  }

 private:
  double u_;
  double v_;
};

/// How the reflected Joe-Clayton term of the symmetrized copula is parameterised.
///
/// `swapped` evaluates C_JC(1-u, 1-v | lambda_l, lambda_u), which makes lambda_u and
/// lambda_l the actual upper and lower tail coefficients of the mixture. `literal`
/// keeps the parameters in place; both tails then equal (lambda_u + lambda_l) / 2.
enum class Reflection { swapped, literal };

inline std::string to_string(Reflection r) {
  return r == Reflection::swapped ? "swapped" : "literal";
}

inline Reflection reflection_from_string(const std::string& s) {
  if (s == "swapped") return Reflection::swapped;
  if (s == "literal" || s == "paper_literal") return Reflection::literal;
  throw std::invalid_argument("unknown reflection convention: " + s);
}

namespace detail {

// log(1 - exp(x)) for x < 0.
template <class Real>
Real log1mexp(const Real& x) {
  using std::expm1, std::log, std::log1p, std::exp;
  return x > Real(-0.6931471805599453) ? Real(log(-expm1(x))) : Real(log1p(-exp(x)));
}

// Coordinate with its complement carried separately, so both 0 and 1 are
// resolved. The logs do not depend on the copula parameters and can be cached.
template <class Real>
struct BasicCoord {
  Real x;
  Real xbar;
  Real log_x;
  Real log_xbar;
};
using Coord = BasicCoord<double>;

template <class Real>
BasicCoord<Real> basic_coord(const Real& x) {
  using std::log;
  const Real xbar = Real(1) - x;
  return {x, xbar, log(x), log(xbar)};
}
inline Coord coord(double x) noexcept { return basic_coord(x); }

template <class Real>
BasicCoord<Real> flip(const BasicCoord<Real>& c) {
  return {c.xbar, c.x, c.log_xbar, c.log_x};
}

/// Joe-Clayton evaluation with the shape transforms precomputed. The scalar
/// type is a template parameter so tests can run the same algebra in extended
/// precision.
template <class Real>
class BasicJcKernel {
 public:
  using C = BasicCoord<Real>;

  explicit BasicJcKernel(const TailParams& params) : BasicJcKernel(shape(params)) {}
  BasicJcKernel(Real k, Real r) : k_(k), r_(r), inv_k_(Real(1) / k), inv_r_(Real(1) / r) {}

  struct Margin {
    Real log_xbar;  // log(1 - x)
    Real log_a;     // log(1 - (1 - x)^k)
  };

  struct Joint {
    Margin mu;
    Margin mv;
    Real log_s;    // log(a^-r + b^-r - 1), >= 0
    Real w;        // S^(-1/r)
    Real log_1mw;  // log(1 - w)
  };

  Margin margin(const C& c) const { return {c.log_xbar, log1mexp(Real(k_ * c.log_xbar))}; }

  Joint joint(const C& u, const C& v) const {
    using std::exp, std::expm1, std::log, std::log1p, std::max;
    Joint j{margin(u), margin(v), Real(0), Real(0), Real(0)};
    const Real la = -r_ * j.mu.log_a;
    const Real lb = -r_ * j.mv.log_a;
    const Real m = max(la, lb);
    if (m < Real(30)) {
      j.log_s = log1p(Real(expm1(la) + expm1(lb)));
    } else {
      j.log_s = m + log(Real(exp(Real(la - m)) + exp(Real(lb - m)) - exp(Real(-m))));
    }
    j.log_s = max(j.log_s, Real(std::numeric_limits<double>::min()));
    j.w = exp(Real(-j.log_s * inv_r_));
    j.log_1mw = log1mexp(Real(-j.log_s * inv_r_));
    return j;
  }

  Real cdf(const C& u, const C& v) const {
    using std::expm1, std::max, std::min;
    const Joint j = joint(u, v);
    const Real c = -expm1(Real(inv_k_ * j.log_1mw));
    return min(max(c, Real(0)), min(u.x, v.x));
  }

  Real log_pdf(const C& u, const C& v) const {
    using std::expm1, std::log;
    const Joint j = joint(u, v);
    const Real bracket = (k_ - Real(1)) * j.w + k_ * (Real(1) + r_) * Real(-expm1(Real(-j.log_s * inv_r_)));
    return (-r_ - Real(1)) * (j.mu.log_a + j.mv.log_a) + (k_ - Real(1)) * (j.mu.log_xbar + j.mv.log_xbar) +
           (inv_k_ - Real(2)) * j.log_1mw + (-inv_r_ - Real(2)) * j.log_s + log(bracket);
  }

  // dC/du at (u, v): the conditional distribution of V given U = u.
  Real conditional(const C& u, const C& v) const {
    using std::exp, std::isnan, std::max, std::min;
    const Joint j = joint(u, v);
    const Real lh = (inv_k_ - Real(1)) * j.log_1mw + (-inv_r_ - Real(1)) * j.log_s +
                    (-r_ - Real(1)) * j.mu.log_a + (k_ - Real(1)) * j.mu.log_xbar;
    const Real h = exp(lh);
    return isnan(h) ? Real(0) : min(max(h, Real(0)), Real(1));
  }

 private:
  // Same clamping as shape_from_tail, carried out in Real.
  static BasicJcKernel shape(const TailParams& params) {
    using std::log;
    const Real lu = std::clamp(params.lambda_u(), kLambdaMin, kLambdaMax);
    const Real ll = std::clamp(params.lambda_l(), kLambdaMin, kLambdaMax);
    const Real ln2 = log(Real(2));
    return BasicJcKernel(ln2 / log(Real(Real(2) - lu)), -ln2 / log(ll));
  }

  Real k_;
  Real r_;
  Real inv_k_;
  Real inv_r_;
};
using JcKernel = BasicJcKernel<double>;

inline double floor_density(double log_density) noexcept {
  const double d = std::exp(log_density);
  return (std::isnan(d) || d < kDensityFloor) ? kDensityFloor : d;
}

/// Symmetrized Joe-Clayton with both component kernels precomputed.
template <class Real>
class BasicSjcKernel {
 public:
  using C = BasicCoord<Real>;

  explicit BasicSjcKernel(const TailParams& params, Reflection reflection = Reflection::swapped)
      : direct_(params), reflected_(reflection == Reflection::swapped ? params.swapped() : params) {}

  Real cdf(const Real& u, const Real& v) const {
    using std::max, std::min;
    const C cu = basic_coord(u), cv = basic_coord(v);
    const Real c = Real(0.5) * (direct_.cdf(cu, cv) + reflected_.cdf(flip(cu), flip(cv)) + u + v - Real(1));
    return min(max(c, max(Real(0), Real(u + v - Real(1)))), min(u, v));
  }

  // dC/du: distribution function of V given U = u.
  Real conditional(const Real& u, const Real& v) const {
    using std::max, std::min;
    const C cu = basic_coord(u), cv = basic_coord(v);
    const Real h =
        Real(0.5) * (direct_.conditional(cu, cv) + Real(1) - reflected_.conditional(flip(cu), flip(cv)));
    return min(max(h, Real(0)), Real(1));
  }

  const BasicJcKernel<Real>& direct() const noexcept { return direct_; }
  const BasicJcKernel<Real>& reflected() const noexcept { return reflected_; }

 private:
  BasicJcKernel<Real> direct_;
  BasicJcKernel<Real> reflected_;
};

/// Double-precision kernel with the floored density used by the likelihood.
class SjcKernel : public BasicSjcKernel<double> {
 public:
  using BasicSjcKernel<double>::BasicSjcKernel;

  double pdf(const Coord& cu, const Coord& cv) const noexcept {
    const double d = 0.5 * (floor_density(direct().log_pdf(cu, cv)) +
                            floor_density(reflected().log_pdf(flip(cu), flip(cv))));
    return std::max(d, kDensityFloor);
  }
  double pdf(double u, double v) const noexcept { return pdf(coord(u), coord(v)); }

  double log_pdf(const Coord& cu, const Coord& cv) const noexcept { return std::log(pdf(cu, cv)); }
  double log_pdf(double u, double v) const noexcept { return std::log(pdf(u, v)); }
};

}  // namespace detail

inline double jc_cdf(const UnitPair& p, const TailParams& params) noexcept {
  return detail::JcKernel(params).cdf(detail::coord(p.u()), detail::coord(p.v()));
}

inline double jc_pdf(const UnitPair& p, const TailParams& params) noexcept {
  return detail::floor_density(
      detail::JcKernel(params).log_pdf(detail::coord(p.u()), detail::coord(p.v())));
}

inline double sjc_cdf(const UnitPair& p, const TailParams& params,
                      Reflection reflection = Reflection::swapped) noexcept {
  return detail::SjcKernel(params, reflection).cdf(p.u(), p.v());
}

inline double sjc_pdf(const UnitPair& p, const TailParams& params,
                      Reflection reflection = Reflection::swapped) noexcept {
  return detail::SjcKernel(params, reflection).pdf(p.u(), p.v());
}

/// h(v | u) = dC_SJC(u, v) / du, nondecreasing in v from 0 to 1.
inline double sjc_conditional(double u, double v, const TailParams& params,
                              Reflection reflection = Reflection::swapped) {
  const UnitPair p(u, v);
  return detail::SjcKernel(params, reflection).conditional(p.u(), p.v());
}

struct TailSequences {
  std::vector<double> upper;
  std::vector<double> lower;
};

/// Finite-threshold versions of the tail-dependence limits along the diagonal:
/// lower[i] = C(e, e) / e and upper[i] = (1 - 2(1 - e) + C(1 - e, 1 - e)) / e.
inline TailSequences tail_coefficient_diagnostic(const TailParams& params,
                                                 std::span<const double> eps_grid,
                                                 Reflection reflection = Reflection::swapped) {
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0.0 && eps_grid[i] < 0.5)) {
      throw std::invalid_argument("threshold grid values must lie in (0, 0.5)");
    }
    if (i > 0 && !(eps_grid[i] < eps_grid[i - 1])) {
      throw std::invalid_argument("threshold grid must be strictly decreasing");
    }
  }
  const detail::SjcKernel kernel(params, reflection);
  TailSequences out;
  out.upper.reserve(eps_grid.size());
  out.lower.reserve(eps_grid.size());
  for (double e : eps_grid) {
    out.lower.push_back(kernel.cdf(e, e) / e);
    // C(1-e, 1-e) - (1 - 2e), written through the survival form to avoid
    // subtracting two numbers close to 1.
    const double hi = 1.0 - e;
    out.upper.push_back((kernel.cdf(hi, hi) - (1.0 - 2.0 * e)) / e);
  }
  return out;
}

}  // namespace sjc
