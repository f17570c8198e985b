#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "gffperc/common.hpp"

namespace gffperc {

inline constexpr int kMaxDim = 4;

/// Lattice point; only the first `dim` coordinates are meaningful.
using Point = std::array<int, kMaxDim>;

enum class Mode { Box, Torus };

/// Sentinel returned by Geometry::neighbor for a step into the absorbing halo.
inline constexpr Index kAbsorbed = -1;

/// Finite vertex set of Z^d: either the ball B(0, n) whose complement is
/// absorbing, or the torus (Z / 2Lbar Z)^d identified with [-Lbar, Lbar)^d.
///
/// Vertices are addressed by a row-major linear index over the coordinate
/// window (last coordinate fastest). The object is a small value type.
class Geometry {
 public:
  static Geometry box(int dim, int radius);
  static Geometry torus(int dim, int half_side);

  int dim() const { return dim_; }
  Mode mode() const { return mode_; }
  bool is_torus() const { return mode_ == Mode::Torus; }
  /// Box radius n, or torus half-side Lbar.
  int extent() const { return extent_; }
  /// Number of coordinate values per axis: 2n+1 (box) or 2Lbar (torus).
  int side() const { return side_; }
  /// Smallest coordinate value along each axis.
  int lower() const { return -extent_; }
  std::size_t size() const { return size_; }

  Index index(const Point& p) const;
  Point point(Index i) const;

  /// True iff p lies in the vertex set (torus: always, after wrapping).
  bool contains(const Point& p) const;
  /// Reduces each coordinate into the fundamental window (torus only).
  Point wrap(Point p) const;

  /// l-infinity distance; circular per coordinate on the torus.
  int distance(const Point& a, const Point& b) const;
  int distance(Index a, Index b) const { return distance(point(a), point(b)); }

  /// Neighbor of vertex i in direction dir in [0, 2d): axis dir/2, sign by
  /// parity. Returns kAbsorbed when the step leaves a box.
  Index neighbor(Index i, int dir) const;

  /// Box only: l-infinity distance from p to the absorbing complement,
  /// i.e. radius + 1 - |p|.
  int distance_to_halo(const Point& p) const;

  bool operator==(const Geometry&) const = default;

 private:
  Geometry(int dim, Mode mode, int extent);

  int dim_ = 0;
  Mode mode_ = Mode::Box;
  int extent_ = 0;
  int side_ = 0;
  std::size_t size_ = 0;
  std::array<std::size_t, kMaxDim> stride_{};
};

Point make_point(std::span<const int> coords);
Point origin();

/// B(center, r) as a sorted vertex list. On the torus requires 2r+1 <= 2Lbar.
std::vector<Index> ball(const Geometry& g, const Point& center, int r);
/// S(center, r) as a sorted vertex list; same precondition as ball.
std::vector<Index> sphere(const Geometry& g, const Point& center, int r);

/// The grid G_L = torus vertices in L Z^d with the shell map of the
/// renormalization step. The torus half-side must be m*L with m >= 2*ell+1.
class GridShell {
 public:
  GridShell(const Geometry& torus, int mesh, int ell = 8);

  const Geometry& geometry() const { return torus_; }
  int mesh() const { return mesh_; }
  int ell() const { return ell_; }
  /// Radius of the sphere the shell boxes must meet: floor(3*ell*L/2).
  int shell_radius() const { return (3 * ell_ * mesh_) / 2; }

  /// |G_L| = (2 Lbar / L)^d, computed without enumerating the grid.
  std::size_t grid_size() const;
  std::vector<Index> grid() const;
  /// S_L(x) = { y in G_L : B(y, L) meets S(x, shell_radius) }.
  std::vector<Index> shell(const Point& x) const;

 private:
  Geometry torus_;
  int mesh_;
  int ell_;
};

/// The boxes { B(y, L) : y in S_L(x) }; every path from B(x, ell L) to
/// S(x, 2 ell L) meets one of them.
std::vector<std::vector<Index>> renorm_cover(const GridShell& gs, const Point& x);

}  // namespace gffperc
