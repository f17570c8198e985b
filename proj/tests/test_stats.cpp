#include <cmath>

#include <doctest.h>

#include "gffperc/stats.hpp"

using namespace gffperc;

TEST_CASE("proportions and exact intervals") {
  auto e = proportion(300, 1000);
  CHECK(e.value == 0.3);
  CHECK(e.se == doctest::Approx(std::sqrt(0.3 * 0.7 / 1000)));
  auto z = proportion(0, 10);
  CHECK(z.lo == 0.0);
  CHECK(z.hi == doctest::Approx(1 - std::pow(0.025, 0.1)).epsilon(1e-10));
  auto f = clopper_pearson(10, 10);
  CHECK(f.hi == 1.0);
  CHECK(f.lo == doctest::Approx(std::pow(0.025, 0.1)).epsilon(1e-10));
}

TEST_CASE("distribution helpers") {
  CHECK(chi2_quantile(0.95, 1) == doctest::Approx(3.841458820694124).epsilon(1e-10));
  CHECK(chi2_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-10));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_sf_value(0.0) == 0.5);
}

TEST_CASE("mean, covariance ratio and z-scores") {
  std::vector<double> a = {1, 2, 3, 4, 5, 6}, b = {0, 1, 0, 1, 0, 1};
  auto m = mean_estimate(a);
  CHECK(m.value == 3.5);
  CHECK(m.se == doctest::Approx(std::sqrt(3.5 / 6)));
  auto c = covariance_estimate(a, b);
  CHECK(c.value == doctest::Approx(0.25));
  auto r = covariance_ratio(b, b);
  CHECK(r.value == doctest::Approx(1.0));
  CHECK(z_score(m, 3.5) == 0.0);
}

TEST_CASE("log-linear fit recovers an exact slope") {
  std::vector<double> x = {1, 2, 3, 4};
  std::vector<std::size_t> n = {100000, 100000, 100000, 100000}, k;
  for (double xi : x) k.push_back(static_cast<std::size_t>(std::lround(100000 * std::exp(-0.3 - 0.5 * xi))));
  auto f = fit_log_linear(x, k, n);
  CHECK(f.converged);
  CHECK(f.c == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(f.a == doctest::Approx(-0.3).epsilon(1e-2));
  CHECK(f.c_lo < 0.5);
  CHECK(f.c_hi > 0.5);
  CHECK(f.df == 2);
  CHECK(f.gof_p > 0.5);
  CHECK(f.lr_c0 > 100);
}

TEST_CASE("exponential decay fit") {
  std::vector<double> x = {4, 8, 16}, y, se = {1e-3, 1e-3, 1e-3};
  for (double xi : x) y.push_back(0.2 * std::exp(-0.25 * xi));
  auto f = fit_exponential_decay(x, y, se);
  CHECK(f.b == doctest::Approx(0.25).epsilon(2e-2));
  CHECK(f.b_lo > 0.0);
  CHECK(f.chi2 < 1e-3);
  std::vector<double> flat = {0.01, 0.0098, 0.0101};
  CHECK(fit_exponential_decay(x, flat, se).b_lo <= 0.0);
}
