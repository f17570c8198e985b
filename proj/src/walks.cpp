#include "gffperc/walks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

namespace gffperc {

struct WalkSystem::Solver {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
};

std::size_t direct_solver_cap(int dim) { return dim == 2 ? 100000 : 20000; }

namespace {

void check_theta(double theta) {
  require(theta > 0.0 && theta <= 1.0, "theta must lie in (0, 1], got " + std::to_string(theta));
}

void check_margin(const Geometry& g, const WalkParams& p, const std::vector<Index>& sites) {
  if (!p.zd_margin || g.is_torus()) return;
  for (Index v : sites) {
    Point x = g.point(v);
    int depth = g.distance_to_halo(x) - 1;
    if (depth < *p.zd_margin)
      throw ConfigError("site at depth " + std::to_string(depth) + " is closer to the box boundary than the margin " +
                        std::to_string(*p.zd_margin) + "; enlarge the box");
  }
}

void check_in_range(const Geometry& g, const std::vector<Index>& K) {
  for (Index v : K)
    require(v >= 0 && static_cast<std::size_t>(v) < g.size(), "vertex index out of range: " + std::to_string(v));
}

std::vector<Index> merged(std::vector<Index> a, const std::vector<Index>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

}  // namespace

WalkSystem::WalkSystem(const Geometry& geometry, const WalkParams& params)
    : geometry_(geometry), theta_(params.theta), solver_(std::make_unique<Solver>()) {
  check_theta(params.theta);
  check_in_range(geometry, params.killed);
  const std::size_t n = geometry.size();
  position_.assign(n, 0);
  for (Index v : params.killed) position_[static_cast<std::size_t>(v)] = -1;
  free_.reserve(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (position_[v] < 0) continue;
    position_[v] = static_cast<Index>(free_.size());
    free_.push_back(static_cast<Index>(v));
  }
  const int d = geometry.dim();
  const double w = (1.0 - theta_) / (2.0 * d);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(free_.size() * static_cast<std::size_t>(2 * d + 1));
  for (std::size_t i = 0; i < free_.size(); ++i) {
    trip.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
    if (w == 0.0) continue;
    for (int dir = 0; dir < 2 * d; ++dir) {
      Index nb = geometry.neighbor(free_[i], dir);
      if (nb == kAbsorbed) continue;
      Index j = position_[static_cast<std::size_t>(nb)];
      if (j < 0) continue;
      trip.emplace_back(static_cast<int>(i), static_cast<int>(j), -w);
    }
  }
  const int m = static_cast<int>(free_.size());
  q_.resize(m, m);
  q_.setFromTriplets(trip.begin(), trip.end());
  q_.prune(0.0);  // theta = 1 leaves explicit zeros
  q_.makeCompressed();
  direct_ = free_.size() <= direct_solver_cap(d);
  if (m == 0) return;
  if (direct_) {
    solver_->ldlt.compute(q_);
    if (solver_->ldlt.info() != Eigen::Success) throw NumericalError("sparse LDLT factorization failed");
  } else {
    solver_->cg.setTolerance(1e-10);
    solver_->cg.setMaxIterations(10000);
    solver_->cg.compute(q_);
  }
}

WalkSystem::~WalkSystem() = default;
WalkSystem::WalkSystem(WalkSystem&&) noexcept = default;
WalkSystem& WalkSystem::operator=(WalkSystem&&) noexcept = default;

Eigen::MatrixXd WalkSystem::solve(const Eigen::MatrixXd& rhs) const {
  if (rhs.rows() == 0) return rhs;
  if (direct_) return solver_->ldlt.solve(rhs);
  Eigen::MatrixXd x(rhs.rows(), rhs.cols());
  for (Eigen::Index c = 0; c < rhs.cols(); ++c) {
    x.col(c) = solver_->cg.solve(rhs.col(c));
    if (solver_->cg.info() != Eigen::Success) throw NumericalError("conjugate gradient did not converge");
  }
  return x;
}

Eigen::MatrixXd WalkSystem::green_columns(const std::vector<Index>& sources) const {
  const auto m = static_cast<Eigen::Index>(free_.size());
  const auto k = static_cast<Eigen::Index>(sources.size());
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    Index p = free_position(sources[static_cast<std::size_t>(c)]);
    if (p >= 0) rhs(p, c) = 1.0;
  }
  Eigen::MatrixXd x = solve(rhs);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(geometry_.size()), k);
  for (Eigen::Index c = 0; c < k; ++c) {
    if (free_position(sources[static_cast<std::size_t>(c)]) < 0) continue;
    for (Eigen::Index i = 0; i < m; ++i) out(free_[static_cast<std::size_t>(i)], c) = x(i, c);
  }
  return out;
}

GreenOperator green_matrix(const Geometry& geometry, const WalkParams& params, const std::vector<Index>& K) {
  check_in_range(geometry, K);
  check_margin(geometry, params, K);
  WalkSystem sys(geometry, params);
  for (Index v : K) require(!sys.is_killed(v), "K must be disjoint from the killed set");
  Eigen::MatrixXd cols = sys.green_columns(K);
  GreenOperator op;
  op.index = K;
  const auto k = static_cast<Eigen::Index>(K.size());
  op.g.resize(k, k);
  for (Eigen::Index i = 0; i < k; ++i) op.g.row(i) = cols.row(K[static_cast<std::size_t>(i)]);
  op.g = 0.5 * (op.g + op.g.transpose()).eval();
  return op;
}

Eigen::MatrixXd hitting_distribution(const Geometry& geometry, const WalkParams& params,
                                     const std::vector<Index>& K) {
  check_in_range(geometry, K);
  check_theta(params.theta);
  WalkParams outer = params;
  outer.killed = merged(params.killed, K);
  WalkSystem sys(geometry, outer);
  std::vector<char> killed(geometry.size(), 0);
  for (Index v : params.killed) killed[static_cast<std::size_t>(v)] = 1;
  for (Index v : K) require(!killed[static_cast<std::size_t>(v)], "K must be disjoint from the killed set");

  std::map<Index, Eigen::Index> column;
  for (std::size_t c = 0; c < K.size(); ++c) column.emplace(K[c], static_cast<Eigen::Index>(c));
  require(column.size() == K.size(), "K must not contain repeated vertices");

  const int d = geometry.dim();
  const double w = (1.0 - params.theta) / (2.0 * d);
  const auto m = static_cast<Eigen::Index>(sys.free_vertices().size());
  const auto k = static_cast<Eigen::Index>(K.size());
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, k);
  for (Eigen::Index i = 0; i < m; ++i) {
    Index v = sys.free_vertices()[static_cast<std::size_t>(i)];
    for (int dir = 0; dir < 2 * d; ++dir) {
      Index nb = geometry.neighbor(v, dir);
      if (nb == kAbsorbed) continue;
      auto it = column.find(nb);
      if (it != column.end()) rhs(i, it->second) += w;
    }
  }
  Eigen::MatrixXd x = sys.solve(rhs);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(geometry.size()), k);
  for (Eigen::Index i = 0; i < m; ++i) h.row(sys.free_vertices()[static_cast<std::size_t>(i)]) = x.row(i);
  for (Eigen::Index c = 0; c < k; ++c) h(K[static_cast<std::size_t>(c)], c) = 1.0;
  return h;
}

double hitting_probability(const Geometry& geometry, const WalkParams& params, Index x,
                           const std::vector<Index>& K) {
  require(!K.empty(), "K must be nonempty");
  check_margin(geometry, params, merged(K, {x}));
  return hitting_distribution(geometry, params, K).row(x).sum();
}

double hitting_probability_via_escape(const Geometry& geometry, const WalkParams& params, Index x,
                                      const std::vector<Index>& K) {
  require(!K.empty(), "K must be nonempty");
  TraceForm tf = trace_form(geometry, params, K);
  WalkSystem sys(geometry, params);
  Eigen::MatrixXd cols = sys.green_columns(K);
  return cols.row(x).dot(tf.kappa);
}

TraceForm trace_form(const Geometry& geometry, const WalkParams& params, const std::vector<Index>& K) {
  check_margin(geometry, params, K);
  Eigen::MatrixXd h = hitting_distribution(geometry, params, K);
  const int d = geometry.dim();
  const double w = (1.0 - params.theta) / (2.0 * d);
  const auto k = static_cast<Eigen::Index>(K.size());
  std::vector<char> killed(geometry.size(), 0);
  for (Index v : params.killed) killed[static_cast<std::size_t>(v)] = 1;

  // First step from x lands in K (hit at once), in the killed set (lost), or
  // in the rest of the free set, from which H gives the entrance law.
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    Index x = K[static_cast<std::size_t>(i)];
    for (int dir = 0; dir < 2 * d; ++dir) {
      Index nb = geometry.neighbor(x, dir);
      if (nb == kAbsorbed || killed[static_cast<std::size_t>(nb)]) continue;
      r.row(i) += w * h.row(nb);
    }
  }
  TraceForm tf;
  tf.index = K;
  tf.self_return = r.diagonal();
  tf.conductance = r;
  tf.conductance.diagonal().setZero();
  tf.conductance = 0.5 * (tf.conductance + tf.conductance.transpose()).eval();
  tf.kappa = (Eigen::VectorXd::Ones(k) - r.rowwise().sum()).cwiseMax(0.0);
  return tf;
}

Eigen::MatrixXd TraceForm::precision() const {
  Eigen::MatrixXd a = -conductance;
  a.diagonal() = kappa + conductance.rowwise().sum();
  return a;
}

double TraceForm::mass_defect() const {
  Eigen::VectorXd total = kappa + self_return + conductance.rowwise().sum();
  return (total.array() - 1.0).abs().maxCoeff();
}

Eigen::VectorXd harmonic_extension(const Geometry& geometry, const WalkParams& params,
                                   const std::vector<Index>& K, const Eigen::VectorXd& values) {
  require(values.size() == static_cast<Eigen::Index>(K.size()), "one boundary value per site of K");
  require(values.allFinite(), "boundary values must be finite");
  return hitting_distribution(geometry, params, K) * values;
}

double markov_decomposition_check(const Geometry& geometry, const WalkParams& params,
                                  const std::vector<Index>& K,
                                  const std::vector<std::pair<Index, Index>>& pairs) {
  if (pairs.empty()) return 0.0;
  std::vector<Index> ys;
  for (auto [x, y] : pairs) ys.push_back(y);
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  auto col_of = [&](Index y) { return std::lower_bound(ys.begin(), ys.end(), y) - ys.begin(); };

  WalkSystem base(geometry, params);
  Eigen::MatrixXd g_u = base.green_columns(ys);
  WalkParams inner = params;
  inner.killed = merged(params.killed, K);
  WalkSystem reduced(geometry, inner);
  Eigen::MatrixXd g_uk = reduced.green_columns(ys);

  Eigen::MatrixXd h;
  Eigen::MatrixXd g_ky;
  if (!K.empty()) {
    h = hitting_distribution(geometry, params, K);
    g_ky.resize(static_cast<Eigen::Index>(K.size()), static_cast<Eigen::Index>(ys.size()));
    for (std::size_t i = 0; i < K.size(); ++i) g_ky.row(static_cast<Eigen::Index>(i)) = g_u.row(K[i]);
  }
  double worst = 0.0;
  for (auto [x, y] : pairs) {
    auto c = col_of(y);
    double res = g_u(x, c) - g_uk(x, c);
    if (!K.empty()) res -= h.row(x).dot(g_ky.col(c));
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

int default_truncation_margin(double theta) {
  check_theta(theta);
  return static_cast<int>(std::ceil((10.0 / theta) * std::log(10.0)));
}

double axis_decay_rate(double theta, int dim) {
  check_theta(theta);
  if (theta >= 1.0) return std::numeric_limits<double>::infinity();
  return std::acosh(dim / (1.0 - theta) - (dim - 1));
}

int margin_for_tolerance(double theta, int dim, double tol) {
  require(tol > 0.0 && tol < 1.0, "tolerance must lie in (0, 1)");
  double rate = axis_decay_rate(theta, dim);
  if (!std::isfinite(rate)) return 1;
  return std::max(1, static_cast<int>(std::ceil(std::log(1.0 / (theta * tol)) / rate)));
}

namespace {

nlohmann::json points_json(const std::vector<Index>& index, const Geometry& g) {
  nlohmann::json pts = nlohmann::json::array();
  for (Index v : index) {
    Point p = g.point(v);
    pts.push_back(std::vector<int>(p.begin(), p.begin() + g.dim()));
  }
  return pts;
}

std::vector<double> row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  return out;
}

Eigen::MatrixXd from_row_major(const std::vector<double>& v, Eigen::Index n) {
  require(static_cast<Eigen::Index>(v.size()) == n * n, "matrix payload has the wrong length");
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = v[static_cast<std::size_t>(i * n + j)];
  return m;
}

}  // namespace

nlohmann::json to_json(const GreenOperator& op, const Geometry& geometry, double theta) {
  return {{"schema", "gffperc.green/v1"},
          {"theta", theta},
          {"dim", geometry.dim()},
          {"mode", geometry.is_torus() ? "torus" : "box"},
          {"extent", geometry.extent()},
          {"index", op.index},
          {"points", points_json(op.index, geometry)},
          {"g", row_major(op.g)}};
}

GreenOperator green_from_json(const nlohmann::json& j) {
  require(j.at("schema") == "gffperc.green/v1", "unknown Green operator schema");
  GreenOperator op;
  op.index = j.at("index").get<std::vector<Index>>();
  op.g = from_row_major(j.at("g").get<std::vector<double>>(), static_cast<Eigen::Index>(op.index.size()));
  return op;
}

nlohmann::json to_json(const TraceForm& tf, const Geometry& geometry, double theta) {
  return {{"schema", "gffperc.trace/v1"},
          {"theta", theta},
          {"dim", geometry.dim()},
          {"mode", geometry.is_torus() ? "torus" : "box"},
          {"extent", geometry.extent()},
          {"index", tf.index},
          {"points", points_json(tf.index, geometry)},
          {"conductance", row_major(tf.conductance)},
          {"kappa", std::vector<double>(tf.kappa.begin(), tf.kappa.end())},
          {"self_return", std::vector<double>(tf.self_return.begin(), tf.self_return.end())}};
}

TraceForm trace_from_json(const nlohmann::json& j) {
  require(j.at("schema") == "gffperc.trace/v1", "unknown trace form schema");
  TraceForm tf;
  tf.index = j.at("index").get<std::vector<Index>>();
  const auto n = static_cast<Eigen::Index>(tf.index.size());
  tf.conductance = from_row_major(j.at("conductance").get<std::vector<double>>(), n);
  auto kappa = j.at("kappa").get<std::vector<double>>();
  auto r = j.at("self_return").get<std::vector<double>>();
  require(static_cast<Eigen::Index>(kappa.size()) == n && static_cast<Eigen::Index>(r.size()) == n,
          "trace form vectors have the wrong length");
  tf.kappa = Eigen::Map<Eigen::VectorXd>(kappa.data(), n);
  tf.self_return = Eigen::Map<Eigen::VectorXd>(r.data(), n);
  return tf;
}

}  // namespace gffperc
