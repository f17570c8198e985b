#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "gffperc/events.hpp"

namespace gffperc {

template <class Scalar = double>
Scalar normal_pdf(Scalar x) {
  constexpr Scalar inv_sqrt_2pi = Scalar(0.398942280401432677939946059934381868L);
  return inv_sqrt_2pi * std::exp(-x * x / 2);
}

/// P[N(0,1) <= x].
template <class Scalar = double>
Scalar normal_cdf(Scalar x) {
  return std::erfc(-x / std::sqrt(Scalar(2))) / 2;
}

/// P[N(0,1) >= x], accurate in the upper tail.
template <class Scalar = double>
Scalar normal_sf(Scalar x) {
  return std::erfc(x / std::sqrt(Scalar(2))) / 2;
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
void gauss_legendre(int points, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

/// Composite Gauss-Legendre rule for one whitened coordinate: the real line
/// is truncated to [-cutoff, cutoff] and every split piece is cut into
/// panels of at most `panel_width`.
struct QuadratureRule {
  double panel_width = 0.5;
  int points = 12;
  double cutoff = 8.5;
};

/// Default rule for an n-dimensional orthant table.
QuadratureRule default_rule(int n);

/// Orthant masses and first moments of a centered Gaussian vector with
/// covariance C relative to the levels h. Orthant omega (a mask) is
/// { phi_i >= h_i iff bit i of omega }.
struct OrthantTable {
  int n = 0;
  std::vector<double> mass;
  /// Row omega: E[1_omega phi].
  Eigen::MatrixXd moment;

  double probability(const BooleanEvent& event) const;
  /// E[1_A phi] as a vector over the sites.
  Eigen::VectorXd first_moment(const BooleanEvent& event) const;
  double total_mass() const;
};

/// Nested quadrature after Cholesky whitening phi = L z. Each coordinate is
/// integrated separately below and above its conditional threshold, so the
/// result is smooth in h; the innermost coordinate is done in closed form.
OrthantTable orthant_table(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& levels,
                           const QuadratureRule& rule);
OrthantTable orthant_table(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& levels);

}  // namespace gffperc
