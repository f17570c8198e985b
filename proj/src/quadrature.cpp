#include "gffperc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include <Eigen/Eigenvalues>

#include "gffperc/common.hpp"

namespace gffperc {

void gauss_legendre(int points, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  require(points >= 1, "need at least one quadrature point");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(points, points);
  for (int k = 1; k < points; ++k) {
    double b = k / std::sqrt(4.0 * k * k - 1.0);
    jac(k, k - 1) = jac(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  nodes = es.eigenvalues();
  weights = 2.0 * es.eigenvectors().row(0).transpose().array().square();
}

QuadratureRule default_rule(int n) {
  if (n <= 3) return {0.5, 12, 8.5};
  if (n == 4) return {2.0, 8, 8.5};
  if (n == 5) return {3.0, 8, 8.5};
  return {4.0, 8, 8.5};
}

double OrthantTable::probability(const BooleanEvent& event) const {
  require(event.sites() == n, "event and table have different site counts");
  double p = 0.0;
  for (std::size_t m = 0; m < mass.size(); ++m)
    if (event(m)) p += mass[m];
  return p;
}

Eigen::VectorXd OrthantTable::first_moment(const BooleanEvent& event) const {
  require(event.sites() == n, "event and table have different site counts");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  for (std::size_t m = 0; m < mass.size(); ++m)
    if (event(m)) v += moment.row(static_cast<Eigen::Index>(m)).transpose();
  return v;
}

double OrthantTable::total_mass() const {
  double s = 0.0;
  for (double m : mass) s += m;
  return s;
}

namespace {

struct Nodes {
  Eigen::VectorXd x, w;
};

const Nodes& legendre(int points) {
  static std::mutex mu;
  static std::map<int, Nodes> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(points);
  if (it == cache.end()) {
    Nodes nd;
    gauss_legendre(points, nd.x, nd.w);
    it = cache.emplace(points, std::move(nd)).first;
  }
  return it->second;
}

class Integrator {
 public:
  Integrator(const Eigen::MatrixXd& L, const Eigen::VectorXd& h, const QuadratureRule& rule)
      : L_(L), h_(h), rule_(rule), nodes_(legendre(rule.points)), n_(static_cast<int>(h.size())) {
    mass_.assign(std::size_t{1} << n_, 0.0);
    zmom_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(mass_.size()), n_);
    z_.resize(n_);
    partial_.assign(static_cast<std::size_t>(n_ * n_), 0.0);
  }

  void run() { level(0, 1.0, 0); }
  const std::vector<double>& mass() const { return mass_; }
  const Eigen::MatrixXd& zmoment() const { return zmom_; }

 private:
  // partial_[i * n + j] = sum_{k < i} L(j, k) z_k, valid for j >= i.
  double& partial(int i, int j) { return partial_[static_cast<std::size_t>(i * n_ + j)]; }

  void level(int i, double w, Mask mask) {
    const double t = (h_(i) - partial(i, i)) / L_(i, i);
    if (i == n_ - 1) {
      const double up = normal_sf(t), down = normal_cdf(t), dens = normal_pdf(t);
      const Mask hi = mask | (Mask{1} << i);
      mass_[mask] += w * down;
      mass_[hi] += w * up;
      for (int k = 0; k < i; ++k) {
        zmom_(static_cast<Eigen::Index>(mask), k) += w * down * z_(k);
        zmom_(static_cast<Eigen::Index>(hi), k) += w * up * z_(k);
      }
      zmom_(static_cast<Eigen::Index>(mask), i) -= w * dens;
      zmom_(static_cast<Eigen::Index>(hi), i) += w * dens;
      return;
    }
    const double c = rule_.cutoff;
    const double tc = std::clamp(t, -c, c);
    piece(i, w, mask, -c, tc);
    piece(i, w, mask | (Mask{1} << i), tc, c);
  }

  void piece(int i, double w, Mask mask, double a, double b) {
    if (b <= a) return;
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / rule_.panel_width)));
    const double width = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = a + (p + 0.5) * width, half = width / 2;
      for (Eigen::Index q = 0; q < nodes_.x.size(); ++q) {
        const double z = mid + half * nodes_.x(q);
        const double wz = nodes_.w(q) * half * normal_pdf(z);
        z_(i) = z;
        for (int j = i + 1; j < n_; ++j) partial(i + 1, j) = partial(i, j) + L_(j, i) * z;
        level(i + 1, w * wz, mask);
      }
    }
  }

  const Eigen::MatrixXd& L_;
  const Eigen::VectorXd& h_;
  QuadratureRule rule_;
  const Nodes& nodes_;
  int n_;
  std::vector<double> mass_;
  Eigen::MatrixXd zmom_;
  Eigen::VectorXd z_;
  std::vector<double> partial_;
};

}  // namespace

OrthantTable orthant_table(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& levels,
                           const QuadratureRule& rule) {
  const auto n = covariance.rows();
  require(covariance.cols() == n && levels.size() == n, "covariance and levels disagree in size");
  require(n >= 1 && n <= 6, "exact event probabilities are limited to |K| <= 6");
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
  Eigen::MatrixXd L = llt.matrixL();
  // Levels far outside the cutoff behave like +-inf; keep them finite.
  Eigen::VectorXd h = levels.cwiseMax(-1e6).cwiseMin(1e6);
  Integrator integ(L, h, rule);
  integ.run();
  OrthantTable t;
  t.n = static_cast<int>(n);
  t.mass = integ.mass();
  t.moment = integ.zmoment() * L.transpose();
  return t;
}

OrthantTable orthant_table(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& levels) {
  return orthant_table(covariance, levels, default_rule(static_cast<int>(covariance.rows())));
}

}  // namespace gffperc
