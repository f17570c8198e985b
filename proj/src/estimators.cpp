#include "gffperc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "gffperc/quadrature.hpp"
#include "gffperc/walks.hpp"

namespace gffperc {

int effective_margin(const CrossingSetup& s) {
  require(s.margin >= 0, "truncation margin must be non-negative");
  return s.margin > 0 ? s.margin : default_truncation_margin(s.theta);
}

namespace {

void check_crossing(const CrossingSetup& s) {
  require(s.theta > 0.0 && s.theta <= 1.0, "theta must lie in (0, 1]");
  require(s.L >= 1, "L must be at least 1");
  require(s.dim >= 2 && s.dim <= kMaxDim, "dimension out of range");
  const double side = 2.0 * (2 * s.L + effective_margin(s)) + 1.0;
  const double sites = std::pow(side, s.dim);
  if (sites > 6e7)
    throw ConfigError("box of " + std::to_string(static_cast<long long>(sites)) +
                      " sites exceeds the memory cap; use a smaller L or margin");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<double> sample_crossing_levels(const CrossingSetup& setup, std::size_t replicas, std::uint64_t seed,
                                           const std::string& label, int workers) {
  check_crossing(setup);
  require(replicas >= 1, "need at least one replica");
  const int radius = 2 * setup.L + effective_margin(setup);
  SpectralSampler sampler(Geometry::box(setup.dim, radius), setup.theta, 2 * setup.L);
  const Geometry& win = sampler.output_geometry();
  const std::vector<Index> A = ball(win, origin(), setup.L);
  const std::vector<Index> B = sphere(win, origin(), 2 * setup.L);
  const std::uint64_t eid = experiment_id(label + "/L" + std::to_string(setup.L));
  std::vector<double> out(replicas);
  parallel_for(
      replicas,
      [&](std::size_t r) {
        Rng rng = make_rng({seed, eid, r});
        Eigen::VectorXd phi;
        sampler.sample(rng, phi);
        out[r] = crossing_level(win, phi, A, B);
      },
      workers);
  return out;
}

std::vector<double> sample_bernoulli_levels(int dim, int L, std::size_t replicas, std::uint64_t seed,
                                            const std::string& label, int workers) {
  require(L >= 1, "L must be at least 1");
  const Geometry win = Geometry::box(dim, 2 * L);
  const std::vector<Index> A = ball(win, origin(), L);
  const std::vector<Index> B = sphere(win, origin(), 2 * L);
  const std::uint64_t eid = experiment_id(label + "/L" + std::to_string(L));
  std::vector<double> out(replicas);
  parallel_for(
      replicas,
      [&](std::size_t r) {
        Rng rng = make_rng({seed, eid, r});
        Eigen::VectorXd phi(static_cast<Eigen::Index>(win.size()));
        fill_normal(rng, phi.data(), win.size());
        out[r] = crossing_level(win, phi, A, B);
      },
      workers);
  return out;
}

std::size_t count_at_least(const std::vector<double>& levels, double h) {
  return static_cast<std::size_t>(std::count_if(levels.begin(), levels.end(), [h](double v) { return v >= h; }));
}

CurveTable curve_from_levels(double theta, int L, const std::vector<double>& levels, const std::vector<double>& grid) {
  require(!grid.empty(), "level grid must be nonempty");
  CurveTable t;
  for (double h : grid) t.rows.push_back({theta, L, h, proportion(count_at_least(levels, h), levels.size())});
  return t;
}

CurveTable estimate_p_curve(const CrossingSetup& setup, const std::vector<double>& grid, std::size_t replicas,
                            std::uint64_t seed, int workers) {
  return curve_from_levels(setup.theta, setup.L, sample_crossing_levels(setup, replicas, seed, "pcurve", workers), grid);
}

std::string CurveTable::to_csv() const {
  std::ostringstream os;
  os << "theta,L,h,n,p_hat,se,lo,hi\n";
  for (const auto& r : rows)
    os << fmt(r.theta) << ',' << r.L << ',' << fmt(r.h) << ',' << r.est.n << ',' << fmt(r.est.value) << ','
       << fmt(r.est.se) << ',' << fmt(r.est.lo) << ',' << fmt(r.est.hi) << '\n';
  return os.str();
}

nlohmann::json to_json(const Estimate& e) {
  return {{"value", e.value}, {"n", e.n}, {"se", e.se}, {"lo", e.lo}, {"hi", e.hi}, {"interval", e.interval}};
}

nlohmann::json CurveTable::to_json() const {
  nlohmann::json rj = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json e = gffperc::to_json(r.est);
    e["theta"] = r.theta;
    e["L"] = r.L;
    e["h"] = r.h;
    rj.push_back(e);
  }
  return {{"schema", "v1"}, {"kind", kind}, {"shared_seed", shared_seed}, {"rows", rj}};
}

namespace {

void check_torus(const TorusSetup& s) {
  require(s.theta > 0.0 && s.theta <= 1.0, "theta must lie in (0, 1]");
  require(s.L >= 1 && s.ell >= 1 && s.Lbar >= 1, "torus parameters must be positive");
  require(4 * s.ell * s.L < 2 * s.Lbar, "annulus of outer radius 2 ell L wraps around the torus");
}

}  // namespace

TorusIndicators sample_torus_indicators(const TorusSetup& setup, const std::vector<double>& grid,
                                        std::size_t replicas, std::uint64_t seed, int workers) {
  check_torus(setup);
  const Geometry torus = Geometry::torus(setup.dim, setup.Lbar);
  SpectralSampler sampler(torus, setup.theta);
  const std::vector<Index> A = ball(torus, origin(), setup.ell * setup.L);
  const std::vector<Index> B = sphere(torus, origin(), 2 * setup.ell * setup.L);
  const std::uint64_t eid = experiment_id("qcurve/L" + std::to_string(setup.L) + "/Lbar" + std::to_string(setup.Lbar));
  TorusIndicators out;
  out.annulus.assign(replicas, std::vector<std::uint8_t>(grid.size()));
  out.single.assign(replicas, std::vector<std::uint8_t>(grid.size()));
  parallel_for(
      replicas,
      [&](std::size_t r) {
        Rng rng = make_rng({seed, eid, r});
        Eigen::VectorXd phi;
        sampler.sample(rng, phi);
        for (std::size_t j = 0; j < grid.size(); ++j) {
          OccupationField occ = occupation(torus, phi, grid[j]);
          out.annulus[r][j] = annulus_event(occ, setup.L, setup.ell);
          out.single[r][j] = crosses(occ, A, B);
        }
      },
      workers);
  return out;
}

CurveTable estimate_q_curve(const TorusSetup& setup, const std::vector<double>& grid, std::size_t replicas,
                            std::uint64_t seed, int workers) {
  TorusIndicators ind = sample_torus_indicators(setup, grid, replicas, seed, workers);
  CurveTable t;
  t.kind = "q";
  for (std::size_t j = 0; j < grid.size(); ++j) {
    std::size_t k = 0;
    for (std::size_t r = 0; r < replicas; ++r) k += ind.annulus[r][j];
    t.rows.push_back({setup.theta, setup.L, grid[j], proportion(k, replicas)});
  }
  return t;
}

Estimate estimate_q(const TorusSetup& setup, double h, std::size_t replicas, std::uint64_t seed, int workers) {
  return estimate_q_curve(setup, {h}, replicas, seed, workers).rows.front().est;
}

std::vector<Estimate> estimate_annulus_influences(const TorusSetup& setup, double h, const std::vector<Index>& sites,
                                                  std::size_t replicas, std::uint64_t seed, int workers) {
  check_torus(setup);
  const Geometry torus = Geometry::torus(setup.dim, setup.Lbar);
  SpectralSampler sampler(torus, setup.theta);
  const std::uint64_t eid = experiment_id("influence/annulus/L" + std::to_string(setup.L));
  std::vector<double> a(replicas);
  std::vector<std::vector<double>> b(sites.size(), std::vector<double>(replicas));
  parallel_for(
      replicas,
      [&](std::size_t r) {
        Rng rng = make_rng({seed, eid, r});
        Eigen::VectorXd phi;
        sampler.sample(rng, phi);
        OccupationField occ = occupation(torus, phi, h);
        a[r] = annulus_event(occ, setup.L, setup.ell);
        for (std::size_t i = 0; i < sites.size(); ++i) b[i][r] = occ[sites[i]];
      },
      workers);
  std::vector<Estimate> out;
  for (const auto& bi : b) out.push_back(covariance_ratio(a, bi));
  return out;
}

ConfigPredicate as_predicate(const BooleanEvent& event) {
  return [event](const std::vector<std::uint8_t>& w) {
    Mask m = 0;
    for (std::size_t i = 0; i < w.size(); ++i)
      if (w[i]) m |= Mask{1} << i;
    return event(m);
  };
}

namespace {

// Draws phi_K for every replica into a (replicas x |K|) row-major buffer.
std::vector<double> draw_gaussian(const GaussianEventSetup& s, std::size_t replicas, std::uint64_t seed,
                                  const char* label, int workers) {
  MarginalSampler ms(s.covariance);
  const auto k = static_cast<std::size_t>(ms.size());
  std::vector<double> out(replicas * k);
  const std::uint64_t eid = experiment_id(label);
  parallel_for(
      replicas,
      [&](std::size_t r) {
        Rng rng = make_rng({seed, eid, r});
        Eigen::VectorXd phi;
        ms.sample(rng, phi);
        std::copy(phi.data(), phi.data() + k, out.data() + r * k);
      },
      workers);
  return out;
}

bool event_at(const GaussianEventSetup& s, const double* phi, std::size_t k, double h,
              std::vector<std::uint8_t>& scratch) {
  scratch.resize(k);
  for (std::size_t i = 0; i < k; ++i) scratch[i] = phi[i] >= h;
  return s.event(scratch);
}

}  // namespace

Estimate estimate_influence(const GaussianEventSetup& s, std::size_t x, double h, std::size_t replicas,
                            std::uint64_t seed, int workers) {
  const auto k = static_cast<std::size_t>(s.covariance.rows());
  require(x < k, "site outside K");
  std::vector<double> phi = draw_gaussian(s, replicas, seed, "influence", workers);
  std::vector<double> a(replicas), b(replicas);
  std::vector<std::uint8_t> w;
  for (std::size_t r = 0; r < replicas; ++r) {
    a[r] = event_at(s, phi.data() + r * k, k, h, w);
    b[r] = w[x];
  }
  return covariance_ratio(a, b);
}

Estimate estimate_russo_derivative(const GaussianEventSetup& s, double h, std::size_t replicas, std::uint64_t seed,
                                   int workers) {
  const auto k = static_cast<std::size_t>(s.covariance.rows());
  require(s.kappa.size() == static_cast<Eigen::Index>(k), "killing weights must match K");
  std::vector<double> phi = draw_gaussian(s, replicas, seed, "russo", workers);
  std::vector<double> a(replicas), t(replicas);
  std::vector<std::uint8_t> w;
  for (std::size_t r = 0; r < replicas; ++r) {
    const double* p = phi.data() + r * k;
    a[r] = event_at(s, p, k, h, w);
    t[r] = Eigen::Map<const Eigen::VectorXd>(p, static_cast<Eigen::Index>(k)).dot(s.kappa);
  }
  return covariance_estimate(a, t);
}

Estimate estimate_fd_derivative(const GaussianEventSetup& s, double h, double dh, std::size_t replicas,
                                std::uint64_t seed, int workers) {
  require(dh > 0.0, "finite-difference step must be positive");
  const auto k = static_cast<std::size_t>(s.covariance.rows());
  std::vector<double> phi = draw_gaussian(s, replicas, seed, "russo", workers);
  std::vector<double> d(replicas);
  std::vector<std::uint8_t> w;
  for (std::size_t r = 0; r < replicas; ++r) {
    const double* p = phi.data() + r * k;
    d[r] = (double(event_at(s, p, k, h - dh, w)) - double(event_at(s, p, k, h + dh, w))) / (2.0 * dh);
  }
  return mean_estimate(d);
}

Estimate estimate_event_probability(const GaussianEventSetup& s, double h, std::size_t replicas,
                                    std::uint64_t seed, int workers) {
  const auto k = static_cast<std::size_t>(s.covariance.rows());
  std::vector<double> phi = draw_gaussian(s, replicas, seed, "probability", workers);
  std::size_t hits = 0;
  std::vector<std::uint8_t> w;
  for (std::size_t r = 0; r < replicas; ++r) hits += event_at(s, phi.data() + r * k, k, h, w);
  return proportion(hits, replicas);
}

DecayFit fit_decay(const std::vector<int>& Ls, const std::vector<std::size_t>& k, const std::vector<std::size_t>& n,
                   double h, double confidence) {
  require(Ls.size() >= 2 && Ls.size() == k.size() && k.size() == n.size(), "need matching L, k, n lists");
  DecayFit best;
  best.h = h;
  best.c_positive = true;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (int step = 1; step <= 20; ++step) {
    const double rho = 0.05 * step;
    std::vector<double> x;
    for (int L : Ls) x.push_back(std::pow(static_cast<double>(L), rho));
    LogLinearFit f = fit_log_linear(x, k, n, confidence);
    if (!(f.c_lo > 0.0)) best.c_positive = false;
    if (f.loglik > best_ll) {
      best_ll = f.loglik;
      best.a = f.a;
      best.c_prime = f.c;
      best.c_lo = f.c_lo;
      best.c_hi = f.c_hi;
      best.rho = rho;
      best.deviance = f.deviance;
      best.gof_p = f.gof_p;
      best.residuals = f.pearson_residuals;
    }
  }
  for (std::size_t i = 0; i < Ls.size(); ++i) {
    best.p.push_back(proportion(k[i], n[i], confidence));
    if (k[i] == 0) best.flagged_L.push_back(Ls[i]);
  }
  return best;
}

SharpnessFit fit_sharpness(const std::vector<int>& Ls, const std::vector<std::size_t>& k,
                           const std::vector<std::size_t>& n, double h, double confidence, double gof_level) {
  require(Ls.size() >= 2 && Ls.size() == k.size() && k.size() == n.size(), "need matching L, k, n lists");
  std::vector<double> x;
  std::vector<std::size_t> fails;
  SharpnessFit s;
  s.h = h;
  for (std::size_t i = 0; i < Ls.size(); ++i) {
    x.push_back(std::log(static_cast<double>(Ls[i])));
    fails.push_back(n[i] - k[i]);
    s.one_minus_p.push_back(proportion(n[i] - k[i], n[i], confidence));
  }
  LogLinearFit f = fit_log_linear(x, fails, n, confidence);
  s.C0 = std::exp(f.a);
  s.eps = f.c;
  s.eps_lo = f.c_lo;
  s.eps_hi = f.c_hi;
  s.deviance = f.deviance;
  s.gof_p = f.gof_p;
  s.raw_monotone = true;
  for (std::size_t i = 1; i < Ls.size(); ++i)
    if (!(s.one_minus_p[i].value < s.one_minus_p[i - 1].value)) s.raw_monotone = false;
  s.accepted = f.converged && s.eps_lo > 0.0 && s.gof_p > gof_level;
  return s;
}

std::vector<LogitGapRow> logit_gap_diagnostic(const std::vector<int>& Ls, const std::vector<Estimate>& q_low,
                                              const std::vector<Estimate>& q_high, double h, double h2) {
  require(h < h2, "diagnostic needs h < h2");
  require(Ls.size() == q_low.size() && Ls.size() == q_high.size(), "one estimate per L at each level");
  auto logit = [](const Estimate& e, double& se) {
    // Keep the empirical value away from 0 and 1 by half a count.
    const double n = static_cast<double>(e.n);
    const double q = std::clamp(e.value, 0.5 / n, 1.0 - 0.5 / n);
    se = 1.0 / std::sqrt(n * q * (1.0 - q));
    return std::log(q / (1.0 - q));
  };
  std::vector<LogitGapRow> rows;
  for (std::size_t i = 0; i < Ls.size(); ++i) {
    double s1, s2;
    LogitGapRow r;
    r.L = Ls[i];
    r.gap = logit(q_low[i], s1) - logit(q_high[i], s2);
    r.se = std::hypot(s1, s2);
    r.c_hat = Ls[i] > 1 ? r.gap / ((h2 - h) * std::log(static_cast<double>(Ls[i]))) : 0.0;
    r.ordered = r.gap >= -3.0 * r.se;
    rows.push_back(r);
  }
  return rows;
}

std::optional<double> locate_h_double_star(const std::vector<LevelCurve>& curves, const std::vector<double>& grid,
                                           double gamma) {
  require(curves.size() >= 3, "need at least three values of L");
  for (std::size_t i = 1; i < curves.size(); ++i) require(curves[i].L > curves[i - 1].L, "L list must increase");
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  for (double h : sorted) {
    std::vector<double> p;
    for (const auto& c : curves)
      p.push_back(static_cast<double>(count_at_least(c.levels, h)) / static_cast<double>(c.levels.size()));
    if (!(p.back() < gamma)) continue;
    bool decreasing = true;
    for (std::size_t i = 1; i < p.size(); ++i)
      if (p[i] > p[i - 1]) decreasing = false;
    if (decreasing) return h;
  }
  return std::nullopt;
}

double level_quantile(std::vector<double> levels, double u) {
  require(!levels.empty(), "no levels");
  std::sort(levels.begin(), levels.end());
  const double pos = u * static_cast<double>(levels.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= levels.size()) return levels.back();
  const double t = pos - static_cast<double>(i);
  return levels[i] * (1.0 - t) + levels[i + 1] * t;
}

ThresholdReport threshold_study(const ThresholdStudy& st, std::uint64_t seed, int workers) {
  require(!st.grid.empty(), "level grid must be nonempty");
  ThresholdReport rep;
  rep.theta = st.theta;
  rep.gamma = st.gamma;
  rep.Ls = st.Ls;
  std::vector<LevelCurve> curves;
  for (int L : st.Ls) {
    CrossingSetup cs{st.dim, st.theta, L, st.margin};
    LevelCurve c{L, sample_crossing_levels(cs, st.replicas, seed, "threshold", workers)};
    CurveTable t = curve_from_levels(st.theta, L, c.levels, st.grid);
    rep.curves.rows.insert(rep.curves.rows.end(), t.rows.begin(), t.rows.end());
    // p = 0.1 at the 0.9 quantile of h_c, p = 0.9 at the 0.1 quantile.
    rep.transition_width.push_back(level_quantile(c.levels, 0.9) - level_quantile(c.levels, 0.1));
    curves.push_back(std::move(c));
  }
  rep.steepening = true;
  for (std::size_t i = 1; i < rep.transition_width.size(); ++i)
    if (!(rep.transition_width[i] < rep.transition_width[i - 1])) rep.steepening = false;
  rep.h_double_star = locate_h_double_star(curves, st.grid, st.gamma);
  if (!rep.h_double_star) return rep;

  const double hb = *rep.h_double_star - st.gap_below, ha = *rep.h_double_star + st.gap_above;
  std::vector<std::size_t> kb, ka, n;
  for (int L : st.Ls) {
    CrossingSetup cs{st.dim, st.theta, L, st.margin};
    std::vector<double> lv = sample_crossing_levels(cs, st.replicas, seed, "threshold/offsets", workers);
    kb.push_back(count_at_least(lv, hb));
    ka.push_back(count_at_least(lv, ha));
    n.push_back(lv.size());
    rep.p_below.push_back(proportion(kb.back(), n.back()));
    rep.p_above.push_back(proportion(ka.back(), n.back()));
  }
  rep.below_increasing = rep.above_decreasing = true;
  for (std::size_t i = 1; i < st.Ls.size(); ++i) {
    if (!(rep.p_below[i].value > rep.p_below[i - 1].value)) rep.below_increasing = false;
    if (!(rep.p_above[i].value < rep.p_above[i - 1].value)) rep.above_decreasing = false;
  }
  rep.sharpness = fit_sharpness(st.Ls, kb, n, hb);
  rep.decay = fit_decay(st.Ls, ka, n, ha);
  return rep;
}

nlohmann::json to_json(const DecayFit& f) {
  nlohmann::json p = nlohmann::json::array();
  for (const auto& e : f.p) p.push_back(to_json(e));
  return {{"h", f.h},           {"log_c", f.a},           {"c_prime", f.c_prime}, {"c_prime_lo", f.c_lo},
          {"c_prime_hi", f.c_hi}, {"rho", f.rho},          {"deviance", f.deviance}, {"gof_p", f.gof_p},
          {"c_prime_positive", f.c_positive}, {"pearson_residuals", f.residuals}, {"flagged_L", f.flagged_L},
          {"p", p}};
}

nlohmann::json to_json(const SharpnessFit& f) {
  nlohmann::json q = nlohmann::json::array();
  for (const auto& e : f.one_minus_p) q.push_back(to_json(e));
  return {{"h", f.h},           {"C0", f.C0},         {"eps", f.eps},           {"eps_lo", f.eps_lo},
          {"eps_hi", f.eps_hi}, {"deviance", f.deviance}, {"gof_p", f.gof_p}, {"raw_monotone", f.raw_monotone},
          {"accepted", f.accepted}, {"one_minus_p", q}};
}

nlohmann::json ThresholdReport::to_json() const {
  nlohmann::json j = {{"schema", "v1"},
                      {"theta", theta},
                      {"gamma", gamma},
                      {"L", Ls},
                      {"transition_width", transition_width},
                      {"steepening", steepening},
                      {"curves", curves.to_json()}};
  j["h_double_star"] = h_double_star ? nlohmann::json(*h_double_star) : nlohmann::json(nullptr);
  if (sharpness) j["sharpness"] = gffperc::to_json(*sharpness);
  if (decay) j["decay"] = gffperc::to_json(*decay);
  nlohmann::json pb = nlohmann::json::array(), pa = nlohmann::json::array();
  for (const auto& e : p_below) pb.push_back(gffperc::to_json(e));
  for (const auto& e : p_above) pa.push_back(gffperc::to_json(e));
  j["p_below"] = pb;
  j["p_above"] = pa;
  j["below_increasing"] = below_increasing;
  j["above_decreasing"] = above_decreasing;
  return j;
}

}  // namespace gffperc
