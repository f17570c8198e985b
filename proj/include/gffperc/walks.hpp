#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <json.hpp>

#include "gffperc/lattice.hpp"

namespace gffperc {

/// Killed simple random walk: from x it dies with probability theta and
/// otherwise jumps to a uniform neighbor. Vertices in `killed` absorb.
struct WalkParams {
  double theta = 0.5;
  std::vector<Index> killed;
  /// Box mode only: queried sites must lie at least this many steps inside
  /// the box, so the box stands in for Z^d.
  std::optional<int> zd_margin;
};

/// Green matrix g(x, y) for x, y in an ordered index set.
struct GreenOperator {
  std::vector<Index> index;
  Eigen::MatrixXd g;
};

/// Trace of the killed walk on K: hitting probabilities between K sites.
struct TraceForm {
  std::vector<Index> index;
  /// c(x, y) = P^x[return to K, first at y] for x != y; zero diagonal.
  Eigen::MatrixXd conductance;
  /// kappa(x) = P^x[never return to K].
  Eigen::VectorXd kappa;
  /// r(x) = P^x[return to K, first at x].
  Eigen::VectorXd self_return;

  /// A with A_xx = kappa_x + sum_y c(x,y), A_xy = -c(x,y). Inverse of G on K.
  Eigen::MatrixXd precision() const;
  /// Max over x of |kappa + r + sum_y c(x,y) - 1|.
  double mass_defect() const;
};

/// Sparse system Q = I - (1-theta) P on the free set (vertices not killed).
/// Factorizes once; solves are reused by all walk quantities.
class WalkSystem {
 public:
  WalkSystem(const Geometry& geometry, const WalkParams& params);
  ~WalkSystem();
  WalkSystem(WalkSystem&&) noexcept;
  WalkSystem& operator=(WalkSystem&&) noexcept;

  const Geometry& geometry() const { return geometry_; }
  double theta() const { return theta_; }

  /// Position of vertex v in the free set, or -1 if killed.
  Index free_position(Index v) const { return position_[static_cast<std::size_t>(v)]; }
  const std::vector<Index>& free_vertices() const { return free_; }
  bool is_killed(Index v) const { return free_position(v) < 0; }

  const Eigen::SparseMatrix<double>& matrix() const { return q_; }

  /// Solves Q X = B over the free set (B has one row per free vertex).
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

  /// Columns g(., y) over all vertices for each y in `sources` (zero rows and
  /// columns for killed vertices).
  Eigen::MatrixXd green_columns(const std::vector<Index>& sources) const;

  /// Whether the direct factorization is used (otherwise conjugate gradient).
  bool direct() const { return direct_; }

 private:
  Geometry geometry_;
  double theta_;
  std::vector<Index> free_;
  std::vector<Index> position_;
  Eigen::SparseMatrix<double> q_;
  bool direct_ = true;
  struct Solver;
  std::unique_ptr<Solver> solver_;
};

/// Largest free-set size factorized directly; beyond it solves use CG.
std::size_t direct_solver_cap(int dim);

GreenOperator green_matrix(const Geometry& geometry, const WalkParams& params, const std::vector<Index>& K);

/// H(x, z) = P^x[H_K < inf, X_{H_K} = z] for every vertex x (rows) and z in K.
Eigen::MatrixXd hitting_distribution(const Geometry& geometry, const WalkParams& params,
                                     const std::vector<Index>& K);

double hitting_probability(const Geometry& geometry, const WalkParams& params, Index x,
                           const std::vector<Index>& K);
/// Same quantity via sum_{y in K} g(x, y) P^y[no return to K].
double hitting_probability_via_escape(const Geometry& geometry, const WalkParams& params, Index x,
                                      const std::vector<Index>& K);

TraceForm trace_form(const Geometry& geometry, const WalkParams& params, const std::vector<Index>& K);

/// mu_x = sum_z H(x, z) values_z over all vertices.
Eigen::VectorXd harmonic_extension(const Geometry& geometry, const WalkParams& params,
                                   const std::vector<Index>& K, const Eigen::VectorXd& values);

/// Max over pairs of |g_U(x,y) - g_{U+K}(x,y) - sum_z H_U(x,z) g_U(z,y)|.
double markov_decomposition_check(const Geometry& geometry, const WalkParams& params,
                                  const std::vector<Index>& K,
                                  const std::vector<std::pair<Index, Index>>& pairs);

/// ceil((10/theta) ln 10).
int default_truncation_margin(double theta);
/// Exponential decay rate of g(0, r e_1) in Z^d: acosh(d/(1-theta) - (d-1)).
double axis_decay_rate(double theta, int dim);
/// Margin m with (1/theta) exp(-rate m) <= tol.
int margin_for_tolerance(double theta, int dim, double tol);

nlohmann::json to_json(const GreenOperator& op, const Geometry& geometry, double theta);
GreenOperator green_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TraceForm& tf, const Geometry& geometry, double theta);
TraceForm trace_from_json(const nlohmann::json& j);

}  // namespace gffperc
