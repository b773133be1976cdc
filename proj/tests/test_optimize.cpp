#include "catch_amalgamated.hpp"

#include <cmath>

#include "sjc/optimize.hpp"

using namespace sjc;
using Catch::Matchers::WithinAbs;

TEST_CASE("nelder-mead finds the minimum of a shifted quadratic") {
  auto f = [](const std::vector<double>& x) { return std::pow(x[0] - 1.5, 2) + 3.0 * std::pow(x[1] + 0.5, 2); };
  const auto r = nelder_mead(f, {0.0, 0.0}, {});
  CHECK(r.converged);
  CHECK_THAT(r.x[0], WithinAbs(1.5, 1e-6));
  CHECK_THAT(r.x[1], WithinAbs(-0.5, 1e-6));
}

TEST_CASE("nelder-mead handles the Rosenbrock valley") {
  auto f = [](const std::vector<double>& x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  NelderMeadOptions opt;
  opt.max_evaluations = 10000;
  const auto r = nelder_mead(f, {-1.2, 1.0}, opt);
  CHECK_THAT(r.x[0], WithinAbs(1.0, 1e-4));
  CHECK_THAT(r.x[1], WithinAbs(1.0, 1e-4));
}

TEST_CASE("nelder-mead stops at the evaluation budget") {
  auto f = [](const std::vector<double>& x) { return x[0] * x[0] + 2.0 * x[1] * x[1]; };
  NelderMeadOptions opt;
  opt.max_evaluations = 20;
  opt.x_tolerance = 0.0;
  opt.f_tolerance = 0.0;
  const auto r = nelder_mead(f, {5.0, 5.0}, opt);
  CHECK_FALSE(r.converged);
  CHECK(r.evaluations <= 25);
}

TEST_CASE("numerical hessian of a quadratic form") {
  auto f = [](const std::vector<double>& x) { return 2.0 * x[0] * x[0] + x[0] * x[1] + 0.5 * x[1] * x[1]; };
  const auto h = numerical_hessian(f, {0.3, -0.2}, 1e-4);
  CHECK_THAT(h(0, 0), WithinAbs(4.0, 1e-6));
  CHECK_THAT(h(0, 1), WithinAbs(1.0, 1e-6));
  CHECK_THAT(h(1, 0), WithinAbs(1.0, 1e-6));
  CHECK_THAT(h(1, 1), WithinAbs(1.0, 1e-6));
}

TEST_CASE("logit and logistic are inverse") {
  for (double p : {1e-9, 0.01, 0.5, 0.73, 1.0 - 1e-9}) CHECK_THAT(logistic(logit(p)), WithinAbs(p, 1e-15));
}
