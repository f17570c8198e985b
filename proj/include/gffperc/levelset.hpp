#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "gffperc/field.hpp"
#include "gffperc/lattice.hpp"

namespace gffperc {

/// xi_x = 1 iff phi_x >= h_x (ties are open).
struct OccupationField {
  Geometry geometry;
  std::vector<std::uint8_t> open;

  bool operator[](Index v) const { return open[static_cast<std::size_t>(v)] != 0; }
  std::size_t count_open() const;
};

OccupationField occupation(const Geometry& geometry, const Eigen::VectorXd& values, double level);
OccupationField occupation(const Geometry& geometry, const Eigen::VectorXd& values, const Eigen::VectorXd& profile);
inline OccupationField occupation(const FieldSample& s, double level) { return occupation(s.geometry, s.values, level); }

/// True iff an open nearest-neighbor path joins A to B (an open site of
/// A and B counts).
bool crosses(const OccupationField& occ, const std::vector<Index>& A, const std::vector<Index>& B);

/// Union-find labels of the open clusters with per-axis coordinate ranges in
/// the fundamental window (no unwrapping across the torus seam).
class ClusterLabeling {
 public:
  explicit ClusterLabeling(const OccupationField& occ);

  /// Cluster id in [0, count()) or -1 for a closed site.
  Index label(Index v) const { return label_[static_cast<std::size_t>(v)]; }
  std::size_t count() const { return size_.size(); }
  std::size_t size(std::size_t c) const { return size_[c]; }
  /// max - min of coordinate `axis` over the cluster.
  int raw_extent(std::size_t c, int axis) const;
  const std::vector<Index>& labels() const { return label_; }

 private:
  int dim_;
  std::vector<Index> label_;
  std::vector<std::size_t> size_;
  std::vector<std::array<int, kMaxDim>> lo_, hi_;
};

/// The torus event: for some x, B(x, ell L) is joined to S(x, 2 ell L) by an
/// open path. Requires 4 ell L < 2 Lbar.
///
/// A cluster C witnesses the event iff the projection of C on some axis
/// contains two values at circular distance >= ell L: pick x within ell L
/// of the first point along that axis and far from the second.
bool annulus_event(const OccupationField& torus_occupation, int L, int ell);

/// sup { h : crosses(occupation(values, h), A, B) }, or -inf if A and B are
/// never joined.
double crossing_level(const Geometry& geometry, const Eigen::VectorXd& values, const std::vector<Index>& A,
                      const std::vector<Index>& B);

/// Predicate on a configuration over K (one byte per site of K, in order).
using ConfigPredicate = std::function<bool(const std::vector<std::uint8_t>&)>;

/// Sites of K whose toggle changes the event. Throws ConfigError if a toggle
/// shows that the predicate is not increasing.
std::vector<Index> pivotal_sites(const OccupationField& occ, const ConfigPredicate& event,
                                 const std::vector<Index>& K);

}  // namespace gffperc
