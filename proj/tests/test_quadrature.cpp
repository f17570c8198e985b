#include <cmath>
#include <random>

#include <doctest.h>

#include "gffperc/quadrature.hpp"

using namespace gffperc;

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  Eigen::VectorXd x, w;
  gauss_legendre(8, x, w);
  CHECK(w.sum() == doctest::Approx(2.0).epsilon(1e-14));
  double s = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += w(i) * std::pow(x(i), 14);
  CHECK(s == doctest::Approx(2.0 / 15).epsilon(1e-13));
}

TEST_CASE("normal tail functions") {
  CHECK(normal_sf(0.0) == 0.5);
  CHECK(normal_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-14));
  CHECK(normal_sf(8.0) == doctest::Approx(6.22096057427178e-16).epsilon(1e-10));
}

TEST_CASE("bivariate and trivariate orthants at zero") {
  Eigen::MatrixXd C(3, 3);
  C << 1.0, 0.4, 0.2, 0.4, 1.5, -0.3, 0.2, -0.3, 0.8;
  auto t = orthant_table(C, Eigen::VectorXd::Zero(3));
  CHECK(t.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  Eigen::VectorXd s = C.diagonal().cwiseSqrt();
  auto r = [&](int i, int j) { return C(i, j) / (s(i) * s(j)); };
  double all = 0.125 + (std::asin(r(0, 1)) + std::asin(r(0, 2)) + std::asin(r(1, 2))) / (4 * M_PI);
  CHECK(t.mass[7] == doctest::Approx(all).epsilon(1e-10));
  auto t2 = orthant_table(C.topLeftCorner(2, 2), Eigen::VectorXd::Zero(2));
  CHECK(t2.mass[3] == doctest::Approx(0.25 + std::asin(r(0, 1)) / (2 * M_PI)).epsilon(1e-12));
}

TEST_CASE("independent coordinates factorize") {
  Eigen::VectorXd var(4), h(4);
  var << 1.0, 2.0, 0.5, 1.3;
  h << -0.4, 0.3, 1.1, 0.0;
  auto t = orthant_table(var.asDiagonal().toDenseMatrix(), h);
  for (std::size_t m = 0; m < 16; ++m) {
    double p = 1;
    for (int i = 0; i < 4; ++i) {
      double up = normal_sf(h(i) / std::sqrt(var(i)));
      p *= (m >> i & 1U) ? up : 1 - up;
    }
    CHECK(t.mass[m] == doctest::Approx(p).epsilon(1e-11));
  }
  // E[1{phi_0 >= h_0} phi_0] = sigma pdf(h / sigma)
  auto mom = t.first_moment(BooleanEvent::dictator(4, 0));
  CHECK(mom(0) == doctest::Approx(normal_pdf(h(0))).epsilon(1e-11));
  CHECK(std::abs(mom(1)) < 1e-12);
}

TEST_CASE("five-dimensional table against Monte Carlo") {
  Eigen::MatrixXd B = Eigen::MatrixXd::Random(5, 5);
  Eigen::MatrixXd C = B * B.transpose() + Eigen::MatrixXd::Identity(5, 5);
  Eigen::VectorXd h(5);
  h << 0.2, -0.5, 1.0, 0.0, 0.7;
  auto t = orthant_table(C, h);
  CHECK(t.total_mass() == doctest::Approx(1.0).epsilon(1e-9));
  Eigen::MatrixXd L = C.llt().matrixL();
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  const int N = 200000;
  std::vector<double> count(32, 0.0);
  Eigen::VectorXd z(5), mom = Eigen::VectorXd::Zero(5);
  auto ev = BooleanEvent::majority(5);
  for (int s = 0; s < N; ++s) {
    for (auto& v : z) v = n01(rng);
    Eigen::VectorXd phi = L * z;
    Mask m = 0;
    for (int i = 0; i < 5; ++i)
      if (phi(i) >= h(i)) m |= Mask{1} << i;
    count[m] += 1;
    if (ev(m)) mom += phi;
  }
  for (std::size_t m = 0; m < 32; ++m) {
    double p = t.mass[m];
    CHECK(std::abs(count[m] / N - p) < 4.5 * std::sqrt(p * (1 - p) / N) + 1e-6);
  }
  Eigen::VectorXd exact = t.first_moment(ev);
  for (int i = 0; i < 5; ++i) CHECK(std::abs(mom(i) / N - exact(i)) < 4.5 * std::sqrt(C(i, i) / N));
}

TEST_CASE("invalid input") {
  Eigen::MatrixXd C(2, 2);
  C << 1, 1, 1, 1;
  CHECK_THROWS_AS(orthant_table(C, Eigen::VectorXd::Zero(2)), NumericalError);
  CHECK_THROWS(orthant_table(Eigen::MatrixXd::Identity(7, 7), Eigen::VectorXd::Zero(7)));
}
