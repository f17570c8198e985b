#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <tuple>

#include "gffperc/estimators.hpp"
#include "gffperc/oracle.hpp"
#include "gffperc/rng.hpp"

namespace gffperc {

namespace {

using nlohmann::json;

std::vector<Index> random_sites(const Geometry& g, std::size_t count, Rng& rng) {
  std::vector<Index> all(g.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Index>(i);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(std::min(count, all.size()));
  std::sort(all.begin(), all.end());
  return all;
}

const char* mode_name(const Geometry& g) { return g.is_torus() ? "torus" : "box"; }

// Removing every cover box must separate B(x, ell L) from S(x, 2 ell L).
bool cover_disconnects(const GridShell& gs, const Point& x) {
  const Geometry& g = gs.geometry();
  std::vector<std::uint8_t> blocked(g.size(), 0), seen(g.size(), 0);
  for (const auto& box : renorm_cover(gs, x))
    for (Index i : box) blocked[static_cast<std::size_t>(i)] = 1;
  std::deque<Index> queue;
  for (Index i : ball(g, x, gs.ell() * gs.mesh()))
    if (!blocked[static_cast<std::size_t>(i)]) {
      seen[static_cast<std::size_t>(i)] = 1;
      queue.push_back(i);
    }
  const int outer = 2 * gs.ell() * gs.mesh();
  while (!queue.empty()) {
    Index i = queue.front();
    queue.pop_front();
    if (g.distance(g.point(i), x) >= outer) return false;
    for (int dir = 0; dir < 2 * g.dim(); ++dir) {
      Index j = g.neighbor(i, dir);
      auto u = static_cast<std::size_t>(j);
      if (blocked[u] || seen[u]) continue;
      seen[u] = 1;
      queue.push_back(j);
    }
  }
  return true;
}

double mc_margin(const Estimate& e, double exact) {
  if (e.se == 0.0) return std::abs(e.value - exact) < 1e-12 ? 3.0 : -1.0;
  return 3.0 - std::abs(e.value - exact) / e.se;
}

}  // namespace

std::vector<CheckRecord> verification_suite(const SuiteOptions& opts) {
  std::vector<CheckRecord> out;
  auto add = [&](const std::string& name, const json& inst, const std::function<std::pair<double, bool>()>& body) {
    out.push_back(run_check(name, inst, body));
  };
  Rng rng = make_rng({opts.seed, experiment_id("verify"), 0});

  // Walk and trace-form identities.
  for (int d : {2, 3})
    for (double theta : {0.2, 0.5, 0.9})
      for (bool torus : {false, true}) {
        const Geometry g = torus ? Geometry::torus(d, d == 2 ? 8 : 5) : Geometry::box(d, d == 2 ? 9 : 5);
        const auto K = random_sites(g, d == 2 ? 64 : 40, rng);
        const WalkParams p{theta, {}, std::nullopt};
        json inst = {{"d", d}, {"theta", theta}, {"geometry", mode_name(g)}, {"extent", g.extent()}, {"K", K.size()}};
        add("trace_identity", inst, [&] {
          const auto G = green_matrix(g, p, K).g;
          const auto A = trace_form(g, p, K).precision();
          const double err = (A * G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
          return std::pair{1e-8 - err, err <= 1e-8};
        });
        add("markov_decomposition", inst, [&] {
          std::vector<Index> small(K.begin(), K.begin() + 3);
          std::vector<std::pair<Index, Index>> pairs;
          for (int r = 0; r < 20; ++r) {
            std::uniform_int_distribution<Index> pick(0, static_cast<Index>(g.size()) - 1);
            pairs.emplace_back(pick(rng), pick(rng));
          }
          const double err = markov_decomposition_check(g, p, small, pairs);
          return std::pair{1e-8 - err, err <= 1e-8};
        });
        add("hitting_via_escape", inst, [&] {
          std::vector<Index> small(K.begin(), K.begin() + 4);
          const Index x = static_cast<Index>(g.size() / 2);
          const double err =
              std::abs(hitting_probability(g, p, x, small) - hitting_probability_via_escape(g, p, x, small));
          return std::pair{1e-9 - err, err <= 1e-9};
        });
      }

  // Renormalization cover separates the annulus, including odd ell L.
  for (auto [d, L, ell] : {std::tuple{2, 1, 6}, std::tuple{2, 2, 6}, std::tuple{2, 1, 7}, std::tuple{3, 1, 6}}) {
    json inst = {{"d", d}, {"L", L}, {"ell", ell}};
    add("renorm_cover_disconnects", inst, [&, d = d, L = L, ell = ell] {
      const Geometry t = Geometry::torus(d, (2 * ell + 1) * L);
      GridShell gs(t, L, ell);
      const bool ok = cover_disconnects(gs, origin());
      return std::pair{ok ? 0.0 : -1.0, ok};
    });
  }

  // Gaussian vectors on small K.
  const std::vector<Point> line3 = {{0, 0, 0, 0}, {1, 0, 0, 0}, {0, 1, 0, 0}};
  const std::vector<Point> line4 = {{0, 0, 0, 0}, {1, 0, 0, 0}, {0, 1, 0, 0}, {1, 1, 0, 0}};
  for (double theta : {0.3, 0.7}) {
    const GaussianK gk = gaussian_zd(3, theta, line3);
    for (double h : {-1.0, 0.0, 1.0}) {
      json inst = {{"d", 3}, {"theta", theta}, {"h", h}, {"K", 3}};
      add("orthant_total_mass", inst, [&] {
        const double err = std::abs(orthant_table(gk.G, Eigen::VectorXd::Constant(3, h)).total_mass() - 1.0);
        return std::pair{1e-10 - err, err <= 1e-10};
      });
      add("fkg_lattice", inst, [&] {
        auto r = check_fkg_lattice(gk.G, Eigen::VectorXd::Constant(3, h));
        return std::pair{r.min_margin, r.pass};
      });
    }
    HolleyInstance hi{gk.trace.precision(), {1}, {2}, 0, Eigen::VectorXd::Constant(3, 0.5), 50.0};
    add("holley_hamiltonian", {{"theta", theta}, {"lambda", hi.lambda}, {"pairs", 20000}}, [&] {
      const double v = check_holley_hamiltonian(hi, 20000, opts.seed);
      return std::pair{1e-12 - v, v <= 1e-12};
    });
  }

  {
    const GaussianK gk = gaussian_zd(3, 0.5, line4);
    std::vector<BooleanEvent> probes;
    for (const auto& e : monotone_functions(2))
      if (!e.is_constant()) probes.push_back(e);
    for (Mask omega = 0; omega < 4; ++omega)
      for (int x = 0; x < 2; ++x) {
        if ((omega >> x) & 1U) continue;
        json inst = {{"theta", 0.5}, {"omega", omega}, {"x", x}, {"h", 0.2}};
        add("stochastic_domination", inst, [&] {
          auto r = check_stochastic_domination(gk.G, 2, Eigen::VectorXd::Constant(4, 0.2), omega, x, probes);
          return std::pair{r.min_difference, r.pass};
        });
      }
  }

  {
    for (double theta : {0.3, 0.8}) {
      const GaussianK gk = gaussian_zd(3, theta, line3);
      for (double h : {-1.0, 0.0, 0.7}) {
        json inst = {{"theta", theta}, {"h", h}, {"dh", 1e-3}, {"events", "all increasing on 3 sites"}};
        add("russo_exact", inst, [&] {
          double worst = std::numeric_limits<double>::infinity();
          bool pass = true;
          for (const auto& e : monotone_functions(3)) {
            if (e.is_constant()) continue;
            auto r = check_russo(gk.G, gk.trace.kappa, e, h, 1e-3);
            worst = std::min(worst, 1e-5 - r.residual);
            pass = pass && r.pass && r.residual <= 1e-5;
          }
          return std::pair{worst, pass};
        });
      }
    }
  }

  for (int n : {3, 5})
    for (double h : {-0.5, 0.0, 1.2}) {
      add("theta1_pivotal", {{"sites", n}, {"h", h}}, [&, n] {
        double worst = std::numeric_limits<double>::infinity();
        bool pass = true;
        for (const auto& e : {BooleanEvent::majority(n), BooleanEvent::at_least(n, 2), BooleanEvent::dictator(n, 1)}) {
          auto r = check_theta1_pivotal(e, h);
          worst = std::min(worst, 1e-10 - r.max_residual);
          pass = pass && r.pass;
        }
        return std::pair{worst, pass};
      });
    }

  {
    std::vector<double> grid;
    for (int i = 1; i < 20; ++i) grid.push_back(-opts.M + 2 * opts.M * i / 20.0);
    for (double theta : {0.3, 0.7}) {
      const GaussianK gk = gaussian_zd(3, theta, line3);
      add("domination_ratio", {{"theta", theta}, {"M", opts.M}, {"events", "all increasing on 3 sites"}}, [&] {
        double worst = std::numeric_limits<double>::infinity();
        bool pass = true;
        for (const auto& e : monotone_functions(3)) {
          if (e.is_constant()) continue;
          auto r = check_domination(gk.G, gk.trace.kappa, e, grid);
          worst = std::min(worst, r.c1);
          pass = pass && r.pass;
        }
        return std::pair{worst, pass};
      });
    }
  }

  {
    std::vector<InfluenceInstance> inst;
    for (double theta : {0.3, 0.7}) {
      const GaussianK gk = gaussian_zd(3, theta, line4);
      for (double h : {-0.5, 0.0, 0.5})
        for (const auto& e : {BooleanEvent::majority(4), BooleanEvent::all_open(4), BooleanEvent::at_least(4, 2)})
          inst.push_back({gk.G, e, h});
    }
    add("influence_theorem", {{"instances", inst.size()}}, [&] {
      auto c = check_influence_theorem(inst);
      return std::pair{std::min(c.c_inf_min, c.c_l1_min), c.pass};
    });
  }

  {
    const GaussianK gk = gaussian_zd(3, 0.5, line4);
    std::vector<BooleanEvent> evs = {BooleanEvent::dictator(4, 0), BooleanEvent::dictator(4, 3),
                                     BooleanEvent::all_open(4)};
    for (double h : {-0.5, 0.5}) {
      add("sqrt_trick", {{"theta", 0.5}, {"h", h}, {"events", evs.size()}}, [&] {
        auto r = check_sqrt_trick(gk.G, evs, h);
        return std::pair{r.slack, r.pass};
      });
    }
  }

  // Monte Carlo estimators against exact values.
  {
    const GaussianK gk = gaussian_zd(3, 0.5, line3);
    GaussianEventSetup dict{gk.G, as_predicate(BooleanEvent::dictator(3, 0)), gk.trace.kappa};
    GaussianEventSetup maj{gk.G, as_predicate(BooleanEvent::majority(3)), gk.trace.kappa};
    const double h = 0.3;
    json inst = {{"theta", 0.5}, {"h", h}, {"replicas", opts.replicas}};
    add("mc_dictator_influence", inst, [&] {
      auto e = estimate_influence(dict, 0, h, opts.replicas, opts.seed, opts.workers);
      const double m = mc_margin(e, 1.0);
      return std::pair{m, m >= 0};
    });
    add("mc_majority_influence", inst, [&] {
      auto e = estimate_influence(maj, 1, h, opts.replicas, opts.seed, opts.workers);
      const double exact =
          exact_influence(orthant_table(gk.G, Eigen::VectorXd::Constant(3, h)), BooleanEvent::majority(3), 1);
      const double m = mc_margin(e, exact);
      return std::pair{m, m >= 0};
    });
    add("mc_russo", inst, [&] {
      auto e = estimate_russo_derivative(maj, h, opts.replicas, opts.seed, opts.workers);
      const double exact = check_russo(gk.G, gk.trace.kappa, BooleanEvent::majority(3), h, 1e-3).expectation;
      const double m = mc_margin(e, exact);
      return std::pair{m, m >= 0};
    });
  }
  return out;
}

}  // namespace gffperc
