#include <algorithm>
#include <deque>
#include <random>

#include <doctest.h>

#include "gffperc/levelset.hpp"

using namespace gffperc;

namespace {

OccupationField random_config(const Geometry& g, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution b(p);
  OccupationField o{g, std::vector<std::uint8_t>(g.size())};
  for (auto& x : o.open) x = b(rng);
  return o;
}

// Open sites reachable from the open members of `from`.
std::vector<char> reach(const OccupationField& o, const std::vector<Index>& from) {
  const Geometry& g = o.geometry;
  std::vector<char> seen(g.size(), 0);
  std::deque<Index> q;
  for (Index v : from)
    if (o[v] && !seen[v]) {
      seen[v] = 1;
      q.push_back(v);
    }
  while (!q.empty()) {
    Index v = q.front();
    q.pop_front();
    for (int dir = 0; dir < 2 * g.dim(); ++dir) {
      Index w = g.neighbor(v, dir);
      if (w == kAbsorbed || !o[w] || seen[w]) continue;
      seen[w] = 1;
      q.push_back(w);
    }
  }
  return seen;
}

// The annulus event by trying every center.
bool naive_annulus(const OccupationField& o, int L, int ell) {
  const Geometry& g = o.geometry;
  for (std::size_t x = 0; x < g.size(); ++x) {
    Point px = g.point(static_cast<Index>(x));
    auto seen = reach(o, ball(g, px, ell * L));
    for (std::size_t v = 0; v < g.size(); ++v)
      if (seen[v] && g.distance(g.point(static_cast<Index>(v)), px) >= 2 * ell * L) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("occupation and ties") {
  auto g = Geometry::box(2, 1);
  Eigen::VectorXd v(9);
  v << 0, 1, 2, 3, 4, 5, 6, 7, 8;
  auto o = occupation(g, v, 4.0);
  CHECK(o.count_open() == 5);
  CHECK(o[4]);
  CHECK_FALSE(o[3]);
  Eigen::VectorXd prof = Eigen::VectorXd::Constant(9, 8.0);
  CHECK(occupation(g, v, prof).count_open() == 1);
}

TEST_CASE("crosses agrees with BFS") {
  std::mt19937_64 rng(1);
  auto g = Geometry::box(2, 6);
  auto A = ball(g, origin(), 2), B = sphere(g, origin(), 5);
  for (int r = 0; r < 300; ++r) {
    auto o = random_config(g, 0.6, rng);
    auto seen = reach(o, A);
    bool expect = std::any_of(B.begin(), B.end(), [&](Index b) { return seen[b] != 0; });
    CHECK(crosses(o, A, B) == expect);
  }
}

TEST_CASE("cluster labels match BFS components") {
  std::mt19937_64 rng(2);
  for (auto g : {Geometry::box(3, 3), Geometry::torus(2, 5)}) {
    auto o = random_config(g, 0.5, rng);
    ClusterLabeling cl(o);
    std::size_t total = 0;
    for (std::size_t c = 0; c < cl.count(); ++c) total += cl.size(c);
    CHECK(total == o.count_open());
    for (std::size_t v = 0; v < g.size(); ++v) {
      if (!o[v]) {
        CHECK(cl.label(v) == -1);
        continue;
      }
      auto seen = reach(o, {static_cast<Index>(v)});
      for (std::size_t w = 0; w < g.size(); ++w)
        if (o[w]) CHECK((cl.label(w) == cl.label(v)) == (seen[w] != 0));
    }
  }
}

TEST_CASE("annulus event matches the all-centers oracle in d = 2") {
  std::mt19937_64 rng(3);
  auto g = Geometry::torus(2, 5);
  int agree = 0, yes = 0;
  for (int r = 0; r < 1000; ++r) {
    double p = 0.05 + 0.2 * (r % 5) / 4.0;
    auto o = random_config(g, p, rng);
    bool fast = annulus_event(o, 1, 2), slow = naive_annulus(o, 1, 2);
    agree += fast == slow;
    yes += slow;
  }
  CHECK(agree == 1000);
  CHECK(yes > 100);
  CHECK(yes < 900);
}

TEST_CASE("annulus event matches the oracle in d = 3") {
  std::mt19937_64 rng(4);
  auto g = Geometry::torus(3, 3);
  for (int r = 0; r < 60; ++r) {
    auto o = random_config(g, 0.25 + 0.01 * r, rng);
    CHECK(annulus_event(o, 1, 1) == naive_annulus(o, 1, 1));
  }
  CHECK_THROWS_AS(annulus_event(random_config(g, 0.5, rng), 1, 2), ConfigError);
}

TEST_CASE("crossing level equals the brute-force maximum") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  auto g = Geometry::box(2, 4);
  auto A = ball(g, origin(), 1), B = sphere(g, origin(), 4);
  for (int r = 0; r < 100; ++r) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(g.size()));
    for (auto& x : v) x = n01(rng);
    double best = -std::numeric_limits<double>::infinity();
    for (double h : v)
      if (h > best && crosses(occupation(g, v, h), A, B)) best = h;
    CHECK(crossing_level(g, v, A, B) == best);
  }
}

TEST_CASE("pivotal sites by toggling and re-running BFS") {
  std::mt19937_64 rng(6);
  auto g = Geometry::box(2, 3);
  auto A = sphere(g, origin(), 0), B = sphere(g, origin(), 3);
  std::vector<Index> K(g.size());
  for (std::size_t i = 0; i < K.size(); ++i) K[i] = static_cast<Index>(i);
  ConfigPredicate event = [&](const std::vector<std::uint8_t>& c) {
    return crosses(OccupationField{g, c}, A, B);
  };
  for (int r = 0; r < 50; ++r) {
    auto o = random_config(g, 0.6, rng);
    auto piv = pivotal_sites(o, event, K);
    for (Index x : K) {
      auto up = o, down = o;
      up.open[x] = 1;
      down.open[x] = 0;
      bool is_piv = crosses(up, A, B) && !crosses(down, A, B);
      CHECK(is_piv == std::binary_search(piv.begin(), piv.end(), x));
    }
  }
  ConfigPredicate dec = [](const std::vector<std::uint8_t>& c) { return c[0] == 0; };
  CHECK_THROWS_AS(pivotal_sites(random_config(g, 0.5, rng), dec, K), ConfigError);
}
