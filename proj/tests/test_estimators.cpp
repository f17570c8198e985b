#include <cmath>

#include <doctest.h>

#include "gffperc/estimators.hpp"
#include "gffperc/oracle.hpp"

using namespace gffperc;

TEST_CASE("curve from crossing levels") {
  std::vector<double> levels = {0.1, 0.5, 0.5, 0.9, -1.0};
  CHECK(count_at_least(levels, 0.5) == 3);
  auto t = curve_from_levels(0.5, 4, levels, {0.0, 0.5, 1.0});
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0].est.value == doctest::Approx(0.8));
  CHECK(t.rows[1].est.value == doctest::Approx(0.6));
  CHECK(t.rows[2].est.value == 0.0);
  auto csv = t.to_csv();
  CHECK(csv.rfind("theta,L,h,n,p_hat,se,lo,hi\n", 0) == 0);
  CHECK(t.to_json()["schema"] == "v1");
}

TEST_CASE("crossing levels do not depend on the worker count") {
  CrossingSetup s{3, 0.7, 2, 6};
  auto a = sample_crossing_levels(s, 24, 5, "t", 1);
  auto b = sample_crossing_levels(s, 24, 5, "t", 3);
  CHECK(a == b);
  auto c = sample_crossing_levels(s, 24, 6, "t", 1);
  CHECK(a != c);
  // p-curve is non-increasing by construction
  auto t = curve_from_levels(0.7, 2, a, {-1.0, 0.0, 0.5, 1.0, 2.0});
  for (std::size_t i = 1; i < t.rows.size(); ++i) CHECK(t.rows[i].est.value <= t.rows[i - 1].est.value);
}

TEST_CASE("theta = 1 crossing agrees with the Bernoulli simulator") {
  CrossingSetup s{2, 1.0, 4, 1};
  auto g = sample_crossing_levels(s, 4000, 3, "x", 0);
  auto b = sample_bernoulli_levels(2, 4, 4000, 4, "y", 0);
  for (double h : {-0.5, 0.0, 0.3, 0.6}) {
    auto pg = proportion(count_at_least(g, h), g.size());
    auto pb = proportion(count_at_least(b, h), b.size());
    CHECK(std::abs(z_score(pg, pb)) < 3.5);
  }
}

TEST_CASE("torus q-curve: annulus event dominates the single-centre crossing") {
  TorusSetup s{2, 0.5, 1, 2, 5};
  std::vector<double> grid = {-0.5, 0.0, 0.5, 1.0};
  auto ind = sample_torus_indicators(s, grid, 60, 7, 0);
  for (std::size_t r = 0; r < 60; ++r)
    for (std::size_t j = 0; j < grid.size(); ++j) CHECK(ind.annulus[r][j] >= ind.single[r][j]);
  auto q = estimate_q_curve(s, grid, 60, 7, 0);
  CHECK(q.kind == "q");
  CHECK_THROWS_AS(estimate_q(TorusSetup{2, 0.5, 1, 3, 5}, 0.0, 10, 1), ConfigError);
}

TEST_CASE("influence estimator: dictator and independent site") {
  Eigen::MatrixXd G(2, 2);
  G << 1.0, 0.0, 0.0, 1.0;
  GaussianEventSetup dict{G, as_predicate(BooleanEvent::dictator(2, 0)), Eigen::VectorXd::Ones(2)};
  auto e = estimate_influence(dict, 0, 0.2, 20000, 1, 0);
  CHECK(e.value == doctest::Approx(1.0));
  auto z = estimate_influence(dict, 1, 0.2, 20000, 1, 0);
  CHECK(std::abs(z.value) < 3 * z.se);
}

TEST_CASE("Russo and finite-difference estimators share samples") {
  auto gk = gaussian_zd(3, 0.5, {{0, 0, 0, 0}, {1, 0, 0, 0}, {0, 1, 0, 0}});
  GaussianEventSetup s{gk.G, as_predicate(BooleanEvent::majority(3)), gk.trace.kappa};
  auto r = estimate_russo_derivative(s, 0.2, 40000, 2, 0);
  auto exact = check_russo(gk.G, gk.trace.kappa, BooleanEvent::majority(3), 0.2, 1e-3).expectation;
  CHECK(std::abs(r.value - exact) < 3.5 * r.se);
  auto fd = estimate_fd_derivative(s, 0.2, 0.1, 40000, 2, 0);
  CHECK(std::abs(fd.value - exact) < 3.5 * fd.se + 0.01);
  auto p = estimate_event_probability(s, 0.2, 40000, 2, 0);
  CHECK(std::abs(p.value - exact_event_prob(gk.G, BooleanEvent::majority(3), 0.2)) < 3.5 * p.se);
}

TEST_CASE("h** location on synthetic curves") {
  std::vector<double> grid = {0.0, 0.5, 1.0, 1.5};
  // larger L crosses less often at high levels
  std::vector<LevelCurve> curves = {{4, {}}, {8, {}}, {16, {}}};
  for (int i = 0; i < 100; ++i) {
    curves[0].levels.push_back(0.02 * i);
    curves[1].levels.push_back(0.016 * i);
    curves[2].levels.push_back(0.012 * i);
  }
  auto h = locate_h_double_star(curves, grid, 0.1);
  REQUIRE(h.has_value());
  CHECK(*h == 1.5);
  CHECK(!locate_h_double_star(curves, {0.0, 0.5}, 0.1).has_value());
  CHECK(level_quantile({0, 1, 2, 3, 4}, 0.5) == doctest::Approx(2.0));
}

TEST_CASE("decay and sharpness fits on exact synthetic counts") {
  std::vector<int> Ls = {4, 8, 16};
  std::vector<std::size_t> n = {100000, 100000, 100000}, k, fails;
  for (int L : Ls) k.push_back(static_cast<std::size_t>(std::lround(1e5 * 0.5 * std::exp(-0.2 * L))));
  auto d = fit_decay(Ls, k, n, 1.0);
  CHECK(d.c_positive);
  CHECK(d.c_prime > 0.0);
  for (int L : Ls) fails.push_back(100000 - static_cast<std::size_t>(std::lround(1e5 * 0.6 * std::pow(L, -0.7))));
  auto s = fit_sharpness(Ls, fails, n, 0.0);
  CHECK(s.accepted);
  CHECK(s.eps == doctest::Approx(0.7).epsilon(0.02));
  CHECK(s.raw_monotone);
  std::vector<std::size_t> flat = {5000, 5000, 5000};
  CHECK_FALSE(fit_decay(Ls, flat, n, 1.0).c_positive);
}

TEST_CASE("logit gap diagnostic") {
  std::vector<Estimate> lo = {proportion(500, 1000), proportion(700, 1000)};
  std::vector<Estimate> hi = {proportion(300, 1000), proportion(200, 1000)};
  auto rows = logit_gap_diagnostic({4, 8}, lo, hi, 0.5, 1.0);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].gap > 0.0);
  CHECK(rows[1].gap > rows[0].gap);
  CHECK(rows[0].ordered);
}
