#include "gffperc/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "gffperc/field.hpp"
#include "gffperc/levelset.hpp"
#include "gffperc/rng.hpp"

namespace gffperc {

GaussianK gaussian_on(const Geometry& geometry, const WalkParams& params, const std::vector<Index>& K) {
  GaussianK gk;
  gk.K = K;
  gk.G = green_matrix(geometry, params, K).g;
  gk.trace = trace_form(geometry, params, K);
  return gk;
}

namespace {

int reach_of(int dim, const std::vector<Point>& K) {
  int reach = 0;
  for (const Point& p : K)
    for (int a = 0; a < dim; ++a) reach = std::max(reach, std::abs(p[a]));
  return reach;
}

}  // namespace

GaussianK gaussian_zd(int dim, double theta, const std::vector<Point>& K, double tol) {
  const int reach = reach_of(dim, K);
  const int margin = margin_for_tolerance(theta, dim, tol);
  const double sites = std::pow(2.0 * (reach + margin) + 1.0, dim);
  if (sites > static_cast<double>(direct_solver_cap(dim))) {
    GaussianK gk;
    for (std::size_t i = 0; i < K.size(); ++i) gk.K.push_back(static_cast<Index>(i));
    gk.G = green_zd_fourier(dim, theta, K, tol);
    gk.trace = trace_from_green(gk.K, gk.G);
    return gk;
  }
  const Geometry box = Geometry::box(dim, reach + margin);
  std::vector<Index> idx;
  for (const Point& p : K) idx.push_back(box.index(p));
  return gaussian_on(box, WalkParams{theta, {}, margin}, idx);
}

Eigen::MatrixXd green_zd_fourier(int dim, double theta, const std::vector<Point>& K, double tol) {
  require(dim >= 2 && dim <= kMaxDim, "dimension out of range");
  require(theta > 0.0 && theta <= 1.0, "theta must lie in (0, 1]");
  require(!K.empty(), "K is empty");
  const auto k = static_cast<Eigen::Index>(K.size());
  if (theta == 1.0) return Eigen::MatrixXd::Identity(k, k);
  // Images sit at distance >= n - 2 reach; allow for 4d of them.
  const int reach = reach_of(dim, K);
  const int half = (margin_for_tolerance(theta, dim, tol / (4.0 * dim)) + 2 * reach) / 2 + 1;
  const int n = 2 * half;
  require(std::pow(static_cast<double>(n), dim) <= 4e8, "Fourier torus too large for this theta and tolerance");

  // g depends on |offset| per axis up to permutation: one sum per class.
  std::vector<std::array<int, kMaxDim>> classes;
  std::vector<std::vector<int>> cls(static_cast<std::size_t>(k), std::vector<int>(static_cast<std::size_t>(k)));
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      std::array<int, kMaxDim> off{};
      for (int a = 0; a < dim; ++a) off[a] = std::abs(K[i][a] - K[j][a]);
      std::sort(off.begin(), off.begin() + dim);
      auto it = std::find(classes.begin(), classes.end(), off);
      if (it == classes.end()) it = classes.insert(classes.end(), off);
      cls[i][j] = static_cast<int>(it - classes.begin());
    }

  std::vector<double> cosv(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) cosv[m] = std::cos(2.0 * M_PI * m / n);
  const double w = (1.0 - theta) / dim;
  const std::size_t nc = classes.size();
  std::vector<double> total(nc, 0.0), row(nc);
  std::array<int, kMaxDim> m{};
  // Odometer over the first dim-1 axes; innermost axis summed per row.
  while (true) {
    std::fill(row.begin(), row.end(), 0.0);
    double base = 0.0;
    for (int a = 0; a + 1 < dim; ++a) base += cosv[m[a]];
    for (int last = 0; last < n; ++last) {
      m[dim - 1] = last;
      const double inv = 1.0 / (1.0 - w * (base + cosv[last]));
      for (std::size_t c = 0; c < nc; ++c) {
        double num = 1.0;
        for (int a = 0; a < dim; ++a) num *= cosv[static_cast<std::size_t>((static_cast<long>(m[a]) * classes[c][a]) % n)];
        row[c] += num * inv;
      }
    }
    for (std::size_t c = 0; c < nc; ++c) total[c] += row[c];
    int a = dim - 2;
    while (a >= 0 && m[a] == n - 1) m[a--] = 0;
    if (a < 0) break;
    ++m[a];
  }
  const double N = std::pow(static_cast<double>(n), dim);
  Eigen::MatrixXd G(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) G(i, j) = total[cls[i][j]] / N;
  return G;
}

TraceForm trace_from_green(const std::vector<Index>& K, const Eigen::MatrixXd& G) {
  require(G.rows() == G.cols() && G.rows() == static_cast<Eigen::Index>(K.size()), "G must be |K| x |K|");
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) throw NumericalError("Green matrix is not positive definite");
  const Eigen::MatrixXd A = llt.solve(Eigen::MatrixXd::Identity(G.rows(), G.cols()));
  TraceForm tf;
  tf.index = K;
  tf.conductance = -0.5 * (A + A.transpose());
  tf.conductance.diagonal().setZero();
  tf.kappa = A.rowwise().sum();
  tf.self_return = Eigen::VectorXd::Ones(G.rows()) - A.diagonal();
  return tf;
}

double exact_event_prob(const Eigen::MatrixXd& G, const BooleanEvent& event, const Eigen::VectorXd& levels) {
  require(event.sites() == G.rows(), "event and covariance disagree on |K|");
  if (event.is_constant()) return event(0) ? 1.0 : 0.0;
  return orthant_table(G, levels).probability(event);
}

double exact_event_prob(const Eigen::MatrixXd& G, const BooleanEvent& event, double level) {
  return exact_event_prob(G, event, Eigen::VectorXd::Constant(G.rows(), level));
}

double exact_influence(const OrthantTable& t, const BooleanEvent& event, int x) {
  double a1 = 0, a0 = 0, p1 = 0, p0 = 0;
  for (std::size_t m = 0; m < t.mass.size(); ++m) {
    const bool open = (m >> x) & 1U;
    (open ? p1 : p0) += t.mass[m];
    if (event(m)) (open ? a1 : a0) += t.mass[m];
  }
  require(p1 > 0 && p0 > 0, "site is almost surely open or closed");
  return a1 / p1 - a0 / p0;
}

FkgReport check_fkg_lattice(const Eigen::MatrixXd& G, const Eigen::VectorXd& levels, double tol) {
  require(G.rows() <= 3, "lattice-condition check is limited to |K| <= 3");
  OrthantTable t = orthant_table(G, levels);
  FkgReport r;
  r.min_margin = std::numeric_limits<double>::infinity();
  const std::size_t n = t.mass.size();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      const double m = t.mass[a | b] * t.mass[a & b] - t.mass[a] * t.mass[b];
      r.min_margin = std::min(r.min_margin, m);
      ++r.pairs;
    }
  r.pass = r.min_margin >= -tol;
  return r;
}

double v_plus(double t) { return t < 0.0 ? -t : 0.0; }
double v_minus(double t) { return v_plus(-t); }

double HolleyInstance::hamiltonian(const Eigen::VectorXd& phi, bool plus) const {
  double pot = 0.0;
  for (int y : open) pot += v_plus(phi(y) - levels(y));
  for (int z : closed) pot += v_minus(phi(z) - levels(z));
  pot += plus ? v_plus(phi(x) - levels(x)) : v_minus(phi(x) - levels(x));
  return phi.dot(precision * phi) + lambda * pot;
}

double check_holley_hamiltonian(const HolleyInstance& inst, std::size_t samples, std::uint64_t seed) {
  const auto n = inst.precision.rows();
  require(inst.levels.size() == n, "levels must match the instance");
  Rng rng = make_rng({seed, experiment_id("holley"), 0});
  Eigen::VectorXd a(n), b(n);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples; ++s) {
    fill_normal(rng, a.data(), static_cast<std::size_t>(n));
    fill_normal(rng, b.data(), static_cast<std::size_t>(n));
    a = 2.0 * a + inst.levels;
    b = 2.0 * b + inst.levels;
    const Eigen::VectorXd hi = a.cwiseMax(b), lo = a.cwiseMin(b);
    const double lhs = inst.hamiltonian(hi, true) + inst.hamiltonian(lo, false);
    const double rhs = inst.hamiltonian(a, true) + inst.hamiltonian(b, false);
    worst = std::max(worst, lhs - rhs);
  }
  return worst;
}

DominationCheck check_stochastic_domination(const Eigen::MatrixXd& G, int k, const Eigen::VectorXd& levels,
                                            Mask omega, int x, const std::vector<BooleanEvent>& probe_events,
                                            double tol) {
  const int n = static_cast<int>(G.rows());
  require(k >= 1 && k <= 3 && n <= 5 && n > k, "need |K| <= 3 and |K + K'| <= 5");
  require(x >= 0 && x < k, "x must lie in K");
  const Mask kmask = (Mask{1} << k) - 1;
  omega &= kmask;
  const Mask lifted = omega | (Mask{1} << x);
  OrthantTable t = orthant_table(G, levels);
  double base0 = 0, base1 = 0;
  for (std::size_t m = 0; m < t.mass.size(); ++m) {
    if ((m & kmask) == omega) base0 += t.mass[m];
    if ((m & kmask) == lifted) base1 += t.mass[m];
  }
  require(base0 >= 1e-8 && base1 >= 1e-8, "conditioning event has negligible probability");
  DominationCheck r;
  r.min_difference = std::numeric_limits<double>::infinity();
  for (const auto& ev : probe_events) {
    require(ev.sites() == n - k, "probe events must live on K'");
    double p0 = 0, p1 = 0;
    for (std::size_t m = 0; m < t.mass.size(); ++m) {
      if (!ev(m >> k)) continue;
      if ((m & kmask) == omega) p0 += t.mass[m];
      if ((m & kmask) == lifted) p1 += t.mass[m];
    }
    r.min_difference = std::min(r.min_difference, p1 / base1 - p0 / base0);
    ++r.events;
  }
  r.pass = r.min_difference >= -tol;
  return r;
}

RussoCheck check_russo(const Eigen::MatrixXd& G, const Eigen::VectorXd& kappa, const BooleanEvent& event, double h,
                       double dh) {
  require(G.rows() <= 5, "Russo check is limited to |K| <= 5");
  require(kappa.size() == G.rows(), "killing weights must match K");
  require(dh > 0.0, "finite-difference step must be positive");
  const auto n = G.rows();
  auto prob = [&](double level) { return exact_event_prob(G, event, level); };
  auto fd = [&](double step) { return (prob(h - step) - prob(h + step)) / (2.0 * step); };
  RussoCheck r;
  r.finite_difference = fd(dh);
  const double half = fd(dh / 2);
  r.richardson_coefficient = (r.finite_difference - half) / (0.75 * dh * dh);
  r.expectation = event.is_constant()
                      ? 0.0
                      : orthant_table(G, Eigen::VectorXd::Constant(n, h)).first_moment(event).dot(kappa);
  r.residual = std::abs(r.finite_difference - r.expectation);
  r.tolerance = std::abs(r.richardson_coefficient) * dh * dh + 2e-6;
  r.pass = r.residual <= r.tolerance;
  return r;
}

PivotalCheck check_theta1_pivotal(const BooleanEvent& event, double h, double tol) {
  const int n = event.sites();
  require(n >= 1 && n <= 12, "pivotal enumeration is limited to |K| <= 12");
  require(event.is_increasing(), "pivotality check needs an increasing event");
  // Truncated first moments of N(0,1) on either side of h by quadrature.
  Eigen::VectorXd xs, ws;
  gauss_legendre(20, xs, ws);
  auto moment = [&](double a, double b) {
    double s = 0.0;
    if (b <= a) return s;
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / 0.25)));
    const double w = (b - a) / panels;
    for (int p = 0; p < panels; ++p)
      for (Eigen::Index q = 0; q < xs.size(); ++q) {
        const double t = a + (p + 0.5) * w + 0.5 * w * xs(q);
        s += 0.5 * w * ws(q) * t * normal_pdf(t);
      }
    return s;
  };
  const double hc = std::clamp(h, -12.0, 12.0);
  const double m_up = moment(hc, 12.0), m_down = moment(-12.0, hc);
  const double p = normal_sf(h);
  PivotalCheck r;
  for (int x = 0; x < n; ++x) {
    double lhs = 0.0, piv = 0.0;
    const Mask bit = Mask{1} << x;
    for (Mask m = 0; m < (Mask{1} << n); ++m) {
      if (m & bit) continue;
      const int ones = std::popcount(m);
      const double w = std::pow(p, ones) * std::pow(1.0 - p, n - 1 - ones);
      const bool up = event(m | bit), down = event(m);
      lhs += w * ((up ? m_up : 0.0) + (down ? m_down : 0.0));
      if (up != down) piv += w;
    }
    const double rhs = normal_pdf(h) * piv;
    r.lhs.push_back(lhs);
    r.rhs.push_back(rhs);
    r.max_residual = std::max(r.max_residual, std::abs(lhs - rhs));
  }
  r.pass = r.max_residual <= tol;
  return r;
}

DominationRatio check_domination(const Eigen::MatrixXd& G, const Eigen::VectorXd& kappa, const BooleanEvent& event,
                                 const std::vector<double>& levels, double min_influence) {
  require(G.rows() <= 4, "domination check is limited to |K| <= 4");
  require(event.is_increasing(), "domination check needs an increasing event");
  const auto n = G.rows();
  DominationRatio r;
  r.c1 = std::numeric_limits<double>::infinity();
  r.all_positive = true;
  r.summed_holds = true;
  std::vector<std::pair<double, double>> sums;
  for (double h : levels) {
    OrthantTable t = orthant_table(G, Eigen::VectorXd::Constant(n, h));
    Eigen::VectorXd mom = t.first_moment(event);
    double num_sum = 0.0, inf_sum = 0.0;
    for (Eigen::Index x = 0; x < n; ++x) {
      const double num = kappa(x) * mom(x);
      const double inf = exact_influence(t, event, static_cast<int>(x));
      num_sum += num;
      inf_sum += inf;
      if (inf < min_influence) continue;
      const double ratio = num / inf;
      ++r.ratios;
      if (!(ratio > 0.0)) r.all_positive = false;
      r.c1 = std::min(r.c1, ratio);
    }
    sums.emplace_back(num_sum, inf_sum);
  }
  if (r.ratios == 0) r.c1 = 0.0;
  for (auto [num, inf] : sums)
    if (num < r.c1 * inf - 1e-12) r.summed_holds = false;
  r.pass = r.ratios > 0 && r.all_positive && r.summed_holds && r.c1 > 0.0;
  return r;
}

InfluenceCalibration check_influence_theorem(const std::vector<InfluenceInstance>& instances) {
  InfluenceCalibration c;
  c.c_inf_min = c.c_l1_min = std::numeric_limits<double>::infinity();
  bool positive = true;
  for (const auto& inst : instances) {
    const int n = static_cast<int>(inst.G.rows());
    require(n <= 4, "influence calibration is limited to |K| <= 4");
    if (n < 2 || inst.event.is_constant()) continue;
    OrthantTable t = orthant_table(inst.G, Eigen::VectorXd::Constant(n, inst.h));
    const double p = t.probability(inst.event);
    const double var = p * (1.0 - p);
    if (var < 1e-12) continue;
    double imax = 0.0, isum = 0.0;
    for (int x = 0; x < n; ++x) {
      const double i = exact_influence(t, inst.event, x);
      imax = std::max(imax, i);
      isum += i;
    }
    const double ci = imax * n / (var * std::log(static_cast<double>(n)));
    c.c_inf.push_back(ci);
    c.c_inf_min = std::min(c.c_inf_min, ci);
    ++c.used;
    if (!(ci > 0.0)) positive = false;
    if (imax > 0.0 && imax < 0.5) {
      const double cl = isum / (var * std::log(1.0 / (2.0 * imax)));
      c.c_l1.push_back(cl);
      c.c_l1_min = std::min(c.c_l1_min, cl);
      ++c.used_l1;
      if (!(cl > 0.0)) positive = false;
    }
  }
  if (c.used_l1 == 0) c.c_l1_min = 0.0;
  if (c.used == 0) c.c_inf_min = 0.0;
  c.pass = c.used > 0 && positive;
  return c;
}

SqrtTrickCheck check_sqrt_trick(const std::vector<double>& probabilities, double union_probability, double tol) {
  require(!probabilities.empty(), "need at least one event");
  SqrtTrickCheck r;
  r.sup = *std::max_element(probabilities.begin(), probabilities.end());
  r.bound = 1.0 - std::pow(1.0 - union_probability, 1.0 / static_cast<double>(probabilities.size()));
  r.slack = r.sup - r.bound;
  r.pass = r.slack >= -tol;
  return r;
}

SqrtTrickCheck check_sqrt_trick(const Eigen::MatrixXd& G, const std::vector<BooleanEvent>& events, double h) {
  require(!events.empty(), "need at least one event");
  for (const auto& e : events) require(e.is_increasing(), "square-root trick needs increasing events");
  OrthantTable t = orthant_table(G, Eigen::VectorXd::Constant(G.rows(), h));
  std::vector<double> p;
  BooleanEvent u = events.front();
  for (const auto& e : events) {
    p.push_back(t.probability(e));
    u = u | e;
  }
  return check_sqrt_trick(p, t.probability(u));
}

ChangeBcReport check_change_bc(int dim, double theta, const std::vector<int>& Ls, const std::vector<Point>& support,
                               const BooleanEvent& event, double h, std::size_t replicas, std::uint64_t seed,
                               int workers) {
  require(event.sites() == static_cast<int>(support.size()), "event and support disagree");
  require(event.is_increasing(), "boundary comparison needs an increasing event");
  require(!Ls.empty(), "need at least one L");
  int reach = 0;
  for (const Point& p : support)
    for (int a = 0; a < dim; ++a) reach = std::max(reach, std::abs(p[a]));
  const GaussianK zd = gaussian_zd(dim, theta, support);
  const Eigen::MatrixXd Lz = Eigen::LLT<Eigen::MatrixXd>(zd.G).matrixL();
  const auto k = static_cast<Eigen::Index>(support.size());

  ChangeBcReport rep;
  constexpr std::size_t kBlock = 20000;
  const std::size_t blocks = (replicas + kBlock - 1) / kBlock;
  for (int L : Ls) {
    require(2 * reach < L, "event support is too close to the torus boundary for L = " + std::to_string(L));
    const Geometry torus = Geometry::torus(dim, L);
    std::vector<Index> idx;
    for (const Point& p : support) idx.push_back(torus.index(p));
    const Eigen::MatrixXd Gt = green_matrix(torus, WalkParams{theta, {}, std::nullopt}, idx).g;
    const Eigen::MatrixXd Lt = Eigen::LLT<Eigen::MatrixXd>(Gt).matrixL();
    const std::uint64_t eid = experiment_id("change_bc/L" + std::to_string(L));
    std::vector<double> sum(blocks), sq(blocks);
    parallel_for(
        blocks,
        [&](std::size_t b) {
          Rng rng = make_rng({seed, eid, b});
          const std::size_t count = std::min(kBlock, replicas - b * kBlock);
          Eigen::VectorXd z(k), pt(k), pz(k);
          double s = 0, s2 = 0;
          for (std::size_t r = 0; r < count; ++r) {
            fill_normal(rng, z.data(), static_cast<std::size_t>(k));
            pt.noalias() = Lt * z;
            pz.noalias() = Lz * z;
            Mask mt = 0, mz = 0;
            for (Eigen::Index i = 0; i < k; ++i) {
              if (pt(i) >= h) mt |= Mask{1} << i;
              if (pz(i) >= h) mz |= Mask{1} << i;
            }
            const double d = double(event(mt)) - double(event(mz));
            s += d;
            s2 += d * d;
          }
          sum[b] = s;
          sq[b] = s2;
        },
        workers);
    const double total = pairwise_sum(sum), total_sq = pairwise_sum(sq);
    const auto nd = static_cast<double>(replicas);
    Estimate e;
    e.n = replicas;
    e.value = total / nd;
    const double var = nd > 1 ? std::max(0.0, (total_sq - nd * e.value * e.value) / (nd - 1)) : 0.0;
    e.se = std::sqrt(var / nd);
    e.lo = e.value - kZ95 * e.se;
    e.hi = e.value + kZ95 * e.se;
    rep.rows.push_back({L, e});
  }
  rep.non_increasing = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    const auto& a = rep.rows[i - 1].difference;
    const auto& b = rep.rows[i].difference;
    if (std::abs(b.value) > std::abs(a.value) + 3.0 * std::hypot(a.se, b.se)) rep.non_increasing = false;
  }
  if (rep.rows.size() >= 2) {
    std::vector<double> x, y, se;
    for (const auto& r : rep.rows) {
      x.push_back(r.L);
      y.push_back(r.difference.value);
      // A row without discordant samples is resolved to one count.
      se.push_back(std::max(r.difference.se, 1.0 / static_cast<double>(replicas)));
    }
    rep.fit = fit_exponential_decay(x, y, se);
    rep.decay_significant = rep.fit.b_lo > 0.0;
  }
  rep.pass = rep.non_increasing && rep.decay_significant;
  return rep;
}

nlohmann::json to_json(const CheckRecord& r) {
  nlohmann::json j = {{"name", r.name}, {"instance", r.instance}, {"margin", r.margin}, {"pass", r.pass}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

CheckRecord run_check(const std::string& name, const nlohmann::json& instance,
                      const std::function<std::pair<double, bool>()>& body) {
  CheckRecord rec{name, instance, 0.0, false, {}};
  try {
    auto [margin, pass] = body();
    rec.margin = margin;
    rec.pass = pass;
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

}  // namespace gffperc
