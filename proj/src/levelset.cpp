#include "gffperc/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace gffperc {

std::size_t OccupationField::count_open() const {
  return static_cast<std::size_t>(std::count(open.begin(), open.end(), std::uint8_t{1}));
}

OccupationField occupation(const Geometry& geometry, const Eigen::VectorXd& values, double level) {
  require(values.size() == static_cast<Eigen::Index>(geometry.size()), "field does not match the geometry");
  OccupationField occ{geometry, std::vector<std::uint8_t>(geometry.size())};
  for (std::size_t i = 0; i < occ.open.size(); ++i) occ.open[i] = values(static_cast<Eigen::Index>(i)) >= level;
  return occ;
}

OccupationField occupation(const Geometry& geometry, const Eigen::VectorXd& values, const Eigen::VectorXd& profile) {
  require(values.size() == static_cast<Eigen::Index>(geometry.size()), "field does not match the geometry");
  require(profile.size() == values.size(), "level profile does not match the geometry");
  require(profile.allFinite(), "level profile must be finite");
  OccupationField occ{geometry, std::vector<std::uint8_t>(geometry.size())};
  for (std::size_t i = 0; i < occ.open.size(); ++i) {
    auto k = static_cast<Eigen::Index>(i);
    occ.open[i] = values(k) >= profile(k);
  }
  return occ;
}

bool crosses(const OccupationField& occ, const std::vector<Index>& A, const std::vector<Index>& B) {
  require(!A.empty() && !B.empty(), "crossing sets must be nonempty");
  const Geometry& g = occ.geometry;
  std::vector<std::uint8_t> target(g.size(), 0), seen(g.size(), 0);
  for (Index b : B) target[static_cast<std::size_t>(b)] = 1;
  std::deque<Index> queue;
  for (Index a : A) {
    if (!occ[a] || seen[static_cast<std::size_t>(a)]) continue;
    seen[static_cast<std::size_t>(a)] = 1;
    queue.push_back(a);
  }
  const int dirs = 2 * g.dim();
  while (!queue.empty()) {
    Index v = queue.front();
    queue.pop_front();
    if (target[static_cast<std::size_t>(v)]) return true;
    for (int dir = 0; dir < dirs; ++dir) {
      Index nb = g.neighbor(v, dir);
      if (nb == kAbsorbed || !occ[nb] || seen[static_cast<std::size_t>(nb)]) continue;
      seen[static_cast<std::size_t>(nb)] = 1;
      queue.push_back(nb);
    }
  }
  return false;
}

namespace {

struct UnionFind {
  std::vector<Index> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), Index{0}); }
  Index find(Index v) {
    while (parent[static_cast<std::size_t>(v)] != v) {
      auto& p = parent[static_cast<std::size_t>(v)];
      p = parent[static_cast<std::size_t>(p)];
      v = p;
    }
    return v;
  }
  // Returns the surviving root.
  Index unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (a > b) std::swap(a, b);
    parent[static_cast<std::size_t>(b)] = a;
    return a;
  }
};

}  // namespace

ClusterLabeling::ClusterLabeling(const OccupationField& occ) : dim_(occ.geometry.dim()) {
  const Geometry& g = occ.geometry;
  const std::size_t n = g.size();
  UnionFind uf(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (!occ.open[v]) continue;
    for (int a = 0; a < dim_; ++a) {
      Index nb = g.neighbor(static_cast<Index>(v), 2 * a);
      if (nb != kAbsorbed && occ[nb]) uf.unite(static_cast<Index>(v), nb);
    }
  }
  label_.assign(n, -1);
  std::vector<Index> root_label(n, -1);
  for (std::size_t v = 0; v < n; ++v) {
    if (!occ.open[v]) continue;
    auto r = static_cast<std::size_t>(uf.find(static_cast<Index>(v)));
    if (root_label[r] < 0) {
      root_label[r] = static_cast<Index>(size_.size());
      size_.push_back(0);
      std::array<int, kMaxDim> lo{}, hi{};
      lo.fill(std::numeric_limits<int>::max());
      hi.fill(std::numeric_limits<int>::min());
      lo_.push_back(lo);
      hi_.push_back(hi);
    }
    auto c = static_cast<std::size_t>(root_label[r]);
    label_[v] = static_cast<Index>(c);
    ++size_[c];
    Point p = g.point(static_cast<Index>(v));
    for (int a = 0; a < dim_; ++a) {
      lo_[c][a] = std::min(lo_[c][a], p[a]);
      hi_[c][a] = std::max(hi_[c][a], p[a]);
    }
  }
}

int ClusterLabeling::raw_extent(std::size_t c, int axis) const { return hi_[c][axis] - lo_[c][axis]; }

bool annulus_event(const OccupationField& occ, int L, int ell) {
  const Geometry& g = occ.geometry;
  require(g.is_torus(), "the annulus event is defined on the torus");
  require(L >= 1 && ell >= 1, "L and ell must be positive");
  require(4 * ell * L < g.side(), "annulus of outer radius 2 ell L wraps around the torus");
  const int spread = ell * L;
  const int s = g.side();
  const int d = g.dim();

  ClusterLabeling cl(occ);
  std::vector<std::size_t> candidates;
  for (std::size_t c = 0; c < cl.count(); ++c) {
    if (cl.size(c) < static_cast<std::size_t>(spread) + 1) continue;
    bool wide = false;
    for (int a = 0; a < d && !wide; ++a) wide = cl.raw_extent(c, a) >= spread;
    if (wide) candidates.push_back(c);
  }
  if (candidates.empty()) return false;

  // Occupied coordinates per candidate and axis.
  std::vector<Index> slot(cl.count(), -1);
  for (std::size_t i = 0; i < candidates.size(); ++i) slot[candidates[i]] = static_cast<Index>(i);
  std::vector<std::uint8_t> proj(candidates.size() * static_cast<std::size_t>(d * s), 0);
  for (std::size_t v = 0; v < g.size(); ++v) {
    Index c = cl.label(static_cast<Index>(v));
    if (c < 0 || slot[static_cast<std::size_t>(c)] < 0) continue;
    Point p = g.point(static_cast<Index>(v));
    std::uint8_t* base = proj.data() + static_cast<std::size_t>(slot[static_cast<std::size_t>(c)]) * d * s;
    for (int a = 0; a < d; ++a) base[a * s + (p[a] - g.lower())] = 1;
  }
  // Two occupied values at circular distance >= spread exist iff for some
  // occupied p the arc [p + spread, p + s - spread] holds an occupied value.
  std::vector<int> prefix(2 * s + 1);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (int a = 0; a < d; ++a) {
      const std::uint8_t* row = proj.data() + (i * d + a) * s;
      prefix[0] = 0;
      for (int t = 0; t < 2 * s; ++t) prefix[t + 1] = prefix[t] + row[t % s];
      for (int p = 0; p < s; ++p) {
        if (!row[p]) continue;
        int lo = p + spread, hi = p + s - spread;
        if (lo <= hi && prefix[hi + 1] - prefix[lo] > 0) return true;
      }
    }
  }
  return false;
}

double crossing_level(const Geometry& g, const Eigen::VectorXd& values, const std::vector<Index>& A,
                      const std::vector<Index>& B) {
  require(values.size() == static_cast<Eigen::Index>(g.size()), "field does not match the geometry");
  require(!A.empty() && !B.empty(), "crossing sets must be nonempty");
  const std::size_t n = g.size();
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    double va = values(a), vb = values(b);
    return va > vb || (va == vb && a < b);
  });
  // Bit 1: touches A, bit 2: touches B, kept on roots.
  std::vector<std::uint8_t> flag(n, 0), active(n, 0);
  for (Index a : A) flag[static_cast<std::size_t>(a)] |= 1;
  for (Index b : B) flag[static_cast<std::size_t>(b)] |= 2;
  UnionFind uf(n);
  const int dirs = 2 * g.dim();
  for (Index v : order) {
    active[static_cast<std::size_t>(v)] = 1;
    Index root = uf.find(v);
    std::uint8_t f = flag[static_cast<std::size_t>(root)];
    for (int dir = 0; dir < dirs; ++dir) {
      Index nb = g.neighbor(v, dir);
      if (nb == kAbsorbed || !active[static_cast<std::size_t>(nb)]) continue;
      Index other = uf.find(nb);
      if (other == root) continue;
      f |= flag[static_cast<std::size_t>(other)];
      root = uf.unite(root, other);
    }
    flag[static_cast<std::size_t>(root)] = f;
    if (f == 3) return values(v);
  }
  return -std::numeric_limits<double>::infinity();
}

std::vector<Index> pivotal_sites(const OccupationField& occ, const ConfigPredicate& event,
                                 const std::vector<Index>& K) {
  std::vector<std::uint8_t> w(K.size());
  for (std::size_t i = 0; i < K.size(); ++i) w[i] = occ[K[i]];
  std::vector<Index> out;
  for (std::size_t i = 0; i < K.size(); ++i) {
    std::uint8_t keep = w[i];
    w[i] = 1;
    bool up = event(w);
    w[i] = 0;
    bool down = event(w);
    w[i] = keep;
    if (down && !up) throw ConfigError("event is not increasing: closing a site made it occur");
    if (up != down) out.push_back(K[i]);
  }
  return out;
}

}  // namespace gffperc
