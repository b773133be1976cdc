#pragma once

// Two-step (canonical maximum likelihood) estimation of the SJC tail
// parameters from pseudo-observations, with Hessian and bootstrap inference.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sjc/copula.hpp"
#include "sjc/margins.hpp"
#include "sjc/optimize.hpp"
#include "sjc/parallel.hpp"
#include "sjc/random.hpp"

namespace sjc {

struct FitConfig {
  Reflection reflection = Reflection::swapped;
  std::vector<double> start_grid{0.05, 0.25, 0.5, 0.75};
  // Every start is run to the screening tolerance; the best one is then
  // polished to the final tolerance.
  NelderMeadOptions screening{.initial_step = 0.5, .x_tolerance = 1e-3, .f_tolerance = 1e-6,
                              .max_evaluations = 1000};
  NelderMeadOptions simplex{.initial_step = 0.05, .x_tolerance = 1e-8, .f_tolerance = 1e-13,
                            .max_evaluations = 2000};
  double hessian_step = 1e-4;
  std::size_t min_n = 50;
  bool compute_hessian = true;
  std::string label;
};

struct BootstrapResult {
  double se_u = 0.0;
  double se_l = 0.0;
  std::array<double, 2> ci_u{};
  std::array<double, 2> ci_l{};
  std::size_t replicates = 0;  // requested
  std::size_t used = 0;
  std::size_t dropped = 0;
  std::uint64_t seed = 0;
};

struct FitReport {
  double lambda_u_hat = 0.0;
  double lambda_l_hat = 0.0;
  double se_u = std::numeric_limits<double>::quiet_NaN();
  double se_l = std::numeric_limits<double>::quiet_NaN();
  double t_u = std::numeric_limits<double>::quiet_NaN();
  double t_l = std::numeric_limits<double>::quiet_NaN();
  double loglik = 0.0;
  double aic = 0.0;
  std::size_t n = 0;
  bool converged = false;
  bool hessian_ok = false;
  bool boundary_u = false;
  bool boundary_l = false;
  std::size_t evaluations = 0;
  std::string subsample_label;
  std::optional<BootstrapResult> bootstrap;

  TailParams estimate() const { return TailParams(lambda_u_hat, lambda_l_hat); }
};

namespace detail {

// Parameter-free per-observation quantities, computed once per fit.
class CachedSample {
 public:
  explicit CachedSample(const PseudoObservations& obs) {
    u_.reserve(obs.size());
    v_.reserve(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) {
      u_.push_back(coord(obs.u()[i]));
      v_.push_back(coord(obs.v()[i]));
    }
  }

  double loglik(const TailParams& params, Reflection reflection) const {
    const SjcKernel kernel(params, reflection);
    double sum = 0.0;
    for (std::size_t i = 0; i < u_.size(); ++i) sum += kernel.log_pdf(u_[i], v_[i]);
    return sum;
  }

 private:
  std::vector<Coord> u_;
  std::vector<Coord> v_;
};

}  // namespace detail

/// Sum of log SJC densities over the sample.
inline double sjc_loglik(const PseudoObservations& obs, const TailParams& params,
                         Reflection reflection = Reflection::swapped) {
  const detail::SjcKernel kernel(params, reflection);
  const auto u = obs.u();
  const auto v = obs.v();
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sum += kernel.log_pdf(u[i], v[i]);
  return sum;
}

namespace detail {

struct SearchPoint {
  double lambda_u;
  double lambda_l;
  bool boundary_u;
  bool boundary_l;
};

inline SearchPoint from_search_scale(const std::vector<double>& th) {
  const double lu = logistic(th[0]);
  const double ll = logistic(th[1]);
  return {std::clamp(lu, kLambdaMin, kLambdaMax), std::clamp(ll, kLambdaMin, kLambdaMax),
          !(lu > kLambdaMin && lu < kLambdaMax), !(ll > kLambdaMin && ll < kLambdaMax)};
}

inline FitReport fit_from_starts(const PseudoObservations& obs, const FitConfig& config,
                                 const std::vector<std::array<double, 2>>& starts) {
  const CachedSample sample(obs);
  auto objective = [&](const std::vector<double>& th) {
    const SearchPoint p = from_search_scale(th);
    return -sample.loglik(TailParams(p.lambda_u, p.lambda_l), config.reflection);
  };

  NelderMeadResult screened;
  std::size_t evaluations = 0;
  for (const auto& s : starts) {
    NelderMeadResult run = nelder_mead(objective, {logit(s[0]), logit(s[1])}, config.screening);
    evaluations += run.evaluations;
    if (run.value < screened.value) screened = std::move(run);
  }
  NelderMeadResult best = nelder_mead(objective, screened.x, config.simplex);
  evaluations += best.evaluations;
  if (screened.value < best.value) {
    best.x = screened.x;
    best.value = screened.value;
  }

  const SearchPoint p = from_search_scale(best.x);
  FitReport rep;
  rep.lambda_u_hat = p.lambda_u;
  rep.lambda_l_hat = p.lambda_l;
  rep.boundary_u = p.boundary_u;
  rep.boundary_l = p.boundary_l;
  rep.loglik = -best.value;
  rep.aic = -2.0 * rep.loglik + 4.0;
  rep.n = obs.size();
  rep.converged = best.converged && std::isfinite(best.value);
  rep.evaluations = evaluations;
  rep.subsample_label = config.label;
  return rep;
}

// Standard errors from the inverse negative Hessian on the natural scale. Near
// the parameter bounds the stencil is moved inward so every node stays valid.
inline void attach_hessian_inference(const PseudoObservations& obs, const FitConfig& config, FitReport& rep) {
  const double h = config.hessian_step;
  const std::vector<double> centre{std::clamp(rep.lambda_u_hat, kLambdaMin + h, kLambdaMax - h),
                                   std::clamp(rep.lambda_l_hat, kLambdaMin + h, kLambdaMax - h)};
  auto ll = [&](const std::vector<double>& x) {
    return sjc_loglik(obs, TailParams(x[0], x[1]), config.reflection);
  };
  const Eigen::MatrixXd info = -numerical_hessian(ll, centre, h);
  Eigen::LLT<Eigen::MatrixXd> llt(info);
  rep.hessian_ok = info.allFinite() && llt.info() == Eigen::Success;
  if (rep.hessian_ok) {
    const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(2, 2));
    rep.hessian_ok = cov(0, 0) > 0.0 && cov(1, 1) > 0.0;
    if (rep.hessian_ok) {
      rep.se_u = std::sqrt(cov(0, 0));
      rep.se_l = std::sqrt(cov(1, 1));
    }
  }
  if (!rep.hessian_ok) {
    // Joint information is singular, typically because one estimate sits on
    // the bound. Interior parameters fall back to their own curvature with the
    // other held fixed; boundary parameters keep the NaN sentinel.
    if (!rep.boundary_u && info(0, 0) > 0.0) rep.se_u = 1.0 / std::sqrt(info(0, 0));
    if (!rep.boundary_l && info(1, 1) > 0.0) rep.se_l = 1.0 / std::sqrt(info(1, 1));
  }
  rep.t_u = rep.lambda_u_hat / rep.se_u;
  rep.t_l = rep.lambda_l_hat / rep.se_l;
}

inline double percentile(std::vector<double> xs, double q) {
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

inline double sample_sd(const std::vector<double>& xs) {
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

}  // namespace detail

/// Maximum-likelihood fit of (lambda_u, lambda_l) from a multistart simplex
/// search over logit-transformed parameters.
inline FitReport fit_sjc(const PseudoObservations& obs, const FitConfig& config = {}) {
  if (obs.size() < config.min_n) {
    throw std::invalid_argument("fit_sjc: need at least " + std::to_string(config.min_n) +
                                " observations, got " + std::to_string(obs.size()));
  }
  std::vector<std::array<double, 2>> starts;
  for (double a : config.start_grid) {
    for (double b : config.start_grid) starts.push_back({a, b});
  }
  FitReport rep = detail::fit_from_starts(obs, config, starts);
  if (config.compute_hessian) detail::attach_hessian_inference(obs, config, rep);
  return rep;
}

/// Nonparametric pairs bootstrap. Each replicate resamples rows, re-ranks both
/// margins and refits from the full-sample estimate; replicate b draws from
/// derive_seed(seed, b) so the result is independent of thread count.
inline BootstrapResult bootstrap_se(const PseudoObservations& obs, std::size_t replicates,
                                    std::uint64_t seed, const FitConfig& config = {}) {
  if (replicates < 2) throw std::invalid_argument("bootstrap_se: need at least 2 replicates");
  FitConfig full_config = config;
  full_config.compute_hessian = false;
  full_config.min_n = std::min<std::size_t>(config.min_n, obs.size());
  const FitReport full = fit_sjc(obs, full_config);
  const std::array<double, 2> warm{std::clamp(full.lambda_u_hat, 1e-4, 1.0 - 1e-4),
                                   std::clamp(full.lambda_l_hat, 1e-4, 1.0 - 1e-4)};

  const std::size_t n = obs.size();
  std::vector<std::optional<std::array<double, 2>>> results(replicates);
  parallel_for(replicates, [&](std::size_t b) {
    CounterRng rng(derive_seed(seed, b));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<double> u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = pick(rng);
      u[i] = obs.u()[j];
      v[i] = obs.v()[j];
    }
    try {
      const auto resampled = PseudoObservations::from_raw(u, v);
      const FitReport r = detail::fit_from_starts(resampled, full_config, {warm});
      if (r.converged) results[b] = std::array<double, 2>{r.lambda_u_hat, r.lambda_l_hat};
    } catch (const std::exception&) {
      // dropped
    }
  });

  BootstrapResult out;
  out.replicates = replicates;
  out.seed = seed;
  std::vector<double> lu, ll;
  for (const auto& r : results) {
    if (!r) continue;
    lu.push_back((*r)[0]);
    ll.push_back((*r)[1]);
  }
  out.used = lu.size();
  out.dropped = replicates - out.used;
  if (out.used >= 2) {
    out.se_u = detail::sample_sd(lu);
    out.se_l = detail::sample_sd(ll);
    out.ci_u = {detail::percentile(lu, 0.025), detail::percentile(lu, 0.975)};
    out.ci_l = {detail::percentile(ll, 0.025), detail::percentile(ll, 0.975)};
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.se_u = out.se_l = nan;
    out.ci_u = out.ci_l = {nan, nan};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {
inline nlohmann::json finite_or_null(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}
inline double number_or_nan(const nlohmann::json& j) {
  return j.is_number() ? j.get<double>() : std::numeric_limits<double>::quiet_NaN();
}
}  // namespace detail

inline nlohmann::json to_json(const BootstrapResult& b) {
  using detail::finite_or_null;
  return {{"se_u", finite_or_null(b.se_u)},
          {"se_l", finite_or_null(b.se_l)},
          {"ci_u", {finite_or_null(b.ci_u[0]), finite_or_null(b.ci_u[1])}},
          {"ci_l", {finite_or_null(b.ci_l[0]), finite_or_null(b.ci_l[1])}},
          {"replicates", b.replicates},
          {"used", b.used},
          {"dropped", b.dropped},
          {"seed", b.seed}};
}

inline nlohmann::json to_json(const FitReport& r) {
  using detail::finite_or_null;
  nlohmann::json j{{"subsample", r.subsample_label},
                   {"lambda_u_hat", r.lambda_u_hat},
                   {"lambda_l_hat", r.lambda_l_hat},
                   {"se_u", finite_or_null(r.se_u)},
                   {"se_l", finite_or_null(r.se_l)},
                   {"t_u", finite_or_null(r.t_u)},
                   {"t_l", finite_or_null(r.t_l)},
                   {"loglik", r.loglik},
                   {"aic", r.aic},
                   {"n", r.n},
                   {"converged", r.converged},
                   {"hessian_ok", r.hessian_ok},
                   {"boundary_u", r.boundary_u},
                   {"boundary_l", r.boundary_l}};
  if (r.bootstrap) j["bootstrap"] = to_json(*r.bootstrap);
  return j;
}

inline FitReport fit_report_from_json(const nlohmann::json& j) {
  using detail::number_or_nan;
  FitReport r;
  r.subsample_label = j.value("subsample", "");
  r.lambda_u_hat = j.at("lambda_u_hat").get<double>();
  r.lambda_l_hat = j.at("lambda_l_hat").get<double>();
  r.se_u = number_or_nan(j.at("se_u"));
  r.se_l = number_or_nan(j.at("se_l"));
  r.t_u = number_or_nan(j.at("t_u"));
  r.t_l = number_or_nan(j.at("t_l"));
  r.loglik = j.at("loglik").get<double>();
  r.aic = j.at("aic").get<double>();
  r.n = j.at("n").get<std::size_t>();
  r.converged = j.at("converged").get<bool>();
  r.hessian_ok = j.value("hessian_ok", false);
  r.boundary_u = j.value("boundary_u", false);
  r.boundary_l = j.value("boundary_l", false);
  if (j.contains("bootstrap")) {
    const auto& b = j.at("bootstrap");
    BootstrapResult br;
    br.se_u = number_or_nan(b.at("se_u"));
    br.se_l = number_or_nan(b.at("se_l"));
    br.ci_u = {number_or_nan(b.at("ci_u")[0]), number_or_nan(b.at("ci_u")[1])};
    br.ci_l = {number_or_nan(b.at("ci_l")[0]), number_or_nan(b.at("ci_l")[1])};
    br.replicates = b.at("replicates").get<std::size_t>();
    br.used = b.at("used").get<std::size_t>();
    br.dropped = b.at("dropped").get<std::size_t>();
    br.seed = b.at("seed").get<std::uint64_t>();
    r.bootstrap = br;
  }
  return r;
}

/// Fixed-width table: one estimate row per report with t-ratios in
/// parentheses on the line beneath, and an AIC column.
inline std::string format_table(const std::vector<FitReport>& reports, bool with_bootstrap = false) {
  std::size_t label_width = 12;
  for (const auto& r : reports) label_width = std::max(label_width, r.subsample_label.size() + 2);
  auto num = [](double x, int prec) {
    std::ostringstream os;
    if (std::isfinite(x)) {
      os << std::fixed << std::setprecision(prec) << x;
    } else {
      os << "n/a";
    }
    return os.str();
  };
  auto paren = [&](double x) { return "(" + num(x, 3) + ")"; };

  std::ostringstream os;
  const std::string rule(label_width + 3 * 12 + 8, '-');
  os << rule << '\n';
  os << std::left << std::setw(static_cast<int>(label_width)) << "" << std::right << std::setw(12)
     << "lambda_u" << std::setw(12) << "lambda_l" << std::setw(12) << "AIC" << std::setw(8) << "n" << '\n';
  os << rule << '\n';
  for (const auto& r : reports) {
    os << std::left << std::setw(static_cast<int>(label_width)) << r.subsample_label << std::right
       << std::setw(12) << num(r.lambda_u_hat, 3) << std::setw(12) << num(r.lambda_l_hat, 3)
       << std::setw(12) << num(r.aic, 2) << std::setw(8) << r.n << '\n';
    os << std::left << std::setw(static_cast<int>(label_width)) << "" << std::right << std::setw(12)
       << paren(r.t_u) << std::setw(12) << paren(r.t_l) << '\n';
    if (with_bootstrap && r.bootstrap) {
      const auto& b = *r.bootstrap;
      os << std::left << std::setw(static_cast<int>(label_width)) << "  bootstrap t" << std::right
         << std::setw(12) << paren(r.lambda_u_hat / b.se_u) << std::setw(12)
         << paren(r.lambda_l_hat / b.se_l) << '\n';
    }
  }
  os << rule << '\n';
  os << "Notes: numbers in parentheses are t-ratios (Hessian"
     << (with_bootstrap ? "; bootstrap where shown" : "") << "). AIC = -2 loglik + 4.\n";
  return os.str();
}

}  // namespace sjc
