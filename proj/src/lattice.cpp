#include "gffperc/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace gffperc {

namespace {

int circular(int a, int b, int side) {
  int d = std::abs(a - b) % side;
  return std::min(d, side - d);
}

int floor_mod(int a, int m) {
  int r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

Geometry::Geometry(int dim, Mode mode, int extent) : dim_(dim), mode_(mode), extent_(extent) {
  require(dim >= 2 && dim <= kMaxDim,
          "dimension must lie in [2, " + std::to_string(kMaxDim) + "], got " + std::to_string(dim));
  side_ = mode == Mode::Box ? 2 * extent + 1 : 2 * extent;
  std::size_t s = 1;
  for (int a = dim - 1; a >= 0; --a) {
    stride_[a] = s;
    s *= static_cast<std::size_t>(side_);
  }
  size_ = s;
}

Geometry Geometry::box(int dim, int radius) {
  require(radius >= 0, "box radius must be non-negative");
  return Geometry(dim, Mode::Box, radius);
}

Geometry Geometry::torus(int dim, int half_side) {
  require(half_side >= 1, "torus half-side must be at least 1");
  return Geometry(dim, Mode::Torus, half_side);
}

Index Geometry::index(const Point& p) const {
  std::size_t i = 0;
  for (int a = 0; a < dim_; ++a) {
    int c = p[a] + extent_;
    if (mode_ == Mode::Torus) c = floor_mod(c, side_);
    i += static_cast<std::size_t>(c) * stride_[a];
  }
  return static_cast<Index>(i);
}

Point Geometry::point(Index i) const {
  Point p{};
  auto u = static_cast<std::size_t>(i);
  for (int a = 0; a < dim_; ++a) {
    p[a] = static_cast<int>(u / stride_[a]) - extent_;
    u %= stride_[a];
  }
  return p;
}

bool Geometry::contains(const Point& p) const {
  if (mode_ == Mode::Torus) return true;
  for (int a = 0; a < dim_; ++a)
    if (std::abs(p[a]) > extent_) return false;
  return true;
}

Point Geometry::wrap(Point p) const {
  if (mode_ == Mode::Torus)
    for (int a = 0; a < dim_; ++a) p[a] = floor_mod(p[a] + extent_, side_) - extent_;
  return p;
}

int Geometry::distance(const Point& a, const Point& b) const {
  int d = 0;
  for (int k = 0; k < dim_; ++k) {
    int dk = mode_ == Mode::Torus ? circular(a[k], b[k], side_) : std::abs(a[k] - b[k]);
    d = std::max(d, dk);
  }
  return d;
}

Index Geometry::neighbor(Index i, int dir) const {
  const int axis = dir / 2;
  const int step = (dir % 2 == 0) ? 1 : -1;
  const auto u = static_cast<std::size_t>(i);
  const int c = static_cast<int>((u / stride_[axis]) % static_cast<std::size_t>(side_));
  int nc = c + step;
  if (mode_ == Mode::Box) {
    if (nc < 0 || nc >= side_) return kAbsorbed;
  } else {
    nc = floor_mod(nc, side_);
  }
  return static_cast<Index>(u + (static_cast<std::size_t>(nc) - static_cast<std::size_t>(c)) * stride_[axis]);
}

int Geometry::distance_to_halo(const Point& p) const {
  require(mode_ == Mode::Box, "distance_to_halo is only defined in box mode");
  int m = 0;
  for (int a = 0; a < dim_; ++a) m = std::max(m, std::abs(p[a]));
  return extent_ + 1 - m;
}

Point make_point(std::span<const int> coords) {
  require(coords.size() <= static_cast<std::size_t>(kMaxDim), "too many coordinates");
  Point p{};
  std::copy(coords.begin(), coords.end(), p.begin());
  return p;
}

Point origin() { return Point{}; }

namespace {

template <class Keep>
std::vector<Index> scan_cube(const Geometry& g, const Point& center, int r, Keep keep) {
  require(r >= 0, "radius must be non-negative");
  if (g.is_torus())
    require(2 * r + 1 <= g.side(), "radius " + std::to_string(r) + " wraps around a torus of side " +
                                       std::to_string(g.side()));
  std::vector<Index> out;
  const int d = g.dim();
  Point off{};
  off.fill(0);
  for (int a = 0; a < d; ++a) off[a] = -r;
  while (true) {
    Point p = center;
    int dist = 0;
    for (int a = 0; a < d; ++a) {
      p[a] += off[a];
      dist = std::max(dist, std::abs(off[a]));
    }
    if (g.contains(p) && keep(dist)) out.push_back(g.index(g.wrap(p)));
    int a = d - 1;
    while (a >= 0 && off[a] == r) off[a--] = -r;
    if (a < 0) break;
    ++off[a];
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<Index> ball(const Geometry& g, const Point& center, int r) {
  return scan_cube(g, center, r, [](int) { return true; });
}

std::vector<Index> sphere(const Geometry& g, const Point& center, int r) {
  return scan_cube(g, center, r, [r](int dist) { return dist == r; });
}

GridShell::GridShell(const Geometry& torus, int mesh, int ell) : torus_(torus), mesh_(mesh), ell_(ell) {
  require(torus.is_torus(), "grid/shell construction needs a torus");
  require(mesh >= 1, "mesh L must be at least 1");
  require(ell >= 6, "ell must be at least 6 for B(y,2L) to stay inside B(x,2 ell L), got " + std::to_string(ell));
  require(torus.extent() % mesh == 0, "torus half-side must be a multiple of the mesh L");
  require(torus.extent() >= (2 * ell + 1) * mesh,
          "torus half-side must be at least (2 ell + 1) L so that B(x, 2 ell L) does not wrap");
}

std::size_t GridShell::grid_size() const {
  std::size_t per_axis = static_cast<std::size_t>(torus_.side() / mesh_);
  std::size_t n = 1;
  for (int a = 0; a < torus_.dim(); ++a) n *= per_axis;
  return n;
}

std::vector<Index> GridShell::grid() const {
  std::vector<Index> out;
  const int d = torus_.dim();
  const int per_axis = torus_.side() / mesh_;
  std::array<int, kMaxDim> k{};
  while (true) {
    Point p{};
    for (int a = 0; a < d; ++a) p[a] = torus_.lower() + k[a] * mesh_;
    out.push_back(torus_.index(p));
    int a = d - 1;
    while (a >= 0 && k[a] == per_axis - 1) k[a--] = 0;
    if (a < 0) break;
    ++k[a];
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Index> GridShell::shell(const Point& x) const {
  // B(y, L) meets S(x, R) iff |dist(x, y) - R| <= L, given R + L <= Lbar.
  const int r = shell_radius();
  std::vector<Index> out;
  for (Index y : grid()) {
    int dist = torus_.distance(x, torus_.point(y));
    if (std::abs(dist - r) <= mesh_) out.push_back(y);
  }
  return out;
}

std::vector<std::vector<Index>> renorm_cover(const GridShell& gs, const Point& x) {
  std::vector<std::vector<Index>> boxes;
  for (Index y : gs.shell(x)) boxes.push_back(ball(gs.geometry(), gs.geometry().point(y), gs.mesh()));
  return boxes;
}

}  // namespace gffperc
