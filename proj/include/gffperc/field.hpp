#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "gffperc/lattice.hpp"
#include "gffperc/rng.hpp"
#include "gffperc/walks.hpp"

namespace gffperc {

/// Field values on every vertex of a geometry plus the stream that made them.
struct FieldSample {
  Geometry geometry;
  Eigen::VectorXd values;
  StreamId stream;
};

/// Per-mode variances 1/(1 - (1-theta) lambda_k) of the torus Green operator,
/// row-major over frequency multi-indices.
Eigen::VectorXd spectral_profile(const Geometry& torus, double theta);

/// Exact sampler for fields whose covariance is diagonal in a product basis:
/// the torus (Fourier) and the box with absorbing halo and no interior
/// killing (sine basis). Optionally only the centered sub-box of radius
/// `window` is produced, which skips most of the synthesis.
class SpectralSampler {
 public:
  SpectralSampler(const Geometry& geometry, double theta, std::optional<int> window = std::nullopt);

  /// Geometry of the produced values: the full geometry, or box(d, window).
  const Geometry& output_geometry() const { return output_; }
  const Geometry& geometry() const { return geometry_; }
  double theta() const { return theta_; }

  /// Thread-safe; scratch space is per thread.
  void sample(Rng& rng, Eigen::VectorXd& out) const;
  FieldSample sample(const StreamId& id) const;

 private:
  Geometry geometry_;
  Geometry output_;
  double theta_;
  Eigen::MatrixXd basis_;       // full 1-D basis, rows = sites, cols = modes
  Eigen::MatrixXd basis_rows_;  // rows restricted to the output window
  Eigen::VectorXd scale_;       // sqrt of mode variances, row-major
};

/// Exact sampler from a sparse Cholesky factor of the precision matrix
/// Q = I - (1-theta) P on the free set; handles arbitrary killed sets.
class PrecisionSampler {
 public:
  PrecisionSampler(const Geometry& geometry, const WalkParams& params);

  const Geometry& geometry() const { return system_.geometry(); }
  void sample(Rng& rng, Eigen::VectorXd& out) const;
  FieldSample sample(const StreamId& id) const;

 private:
  WalkSystem system_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
};

/// Largest free set the precision sampler factorizes.
std::size_t cholesky_cap(int dim);

/// Samples (phi_x)_{x in K} from its Gaussian marginal N(0, G_K).
class MarginalSampler {
 public:
  explicit MarginalSampler(const Eigen::MatrixXd& covariance);
  explicit MarginalSampler(const GreenOperator& op) : MarginalSampler(op.g) {}
  Eigen::Index size() const { return factor_.rows(); }
  void sample(Rng& rng, Eigen::VectorXd& out) const;
  /// out = L z for a caller-supplied standard normal vector z.
  void transform(const Eigen::VectorXd& z, Eigen::VectorXd& out) const { out.noalias() = factor_ * z; }
  const Eigen::MatrixXd& factor() const { return factor_; }

 private:
  Eigen::MatrixXd factor_;
};

/// phi = phi_tilde + mu where phi_tilde is the field killed on U and K and
/// mu is the harmonic extension of the pinned values on K.
class ConditionalSampler {
 public:
  ConditionalSampler(const Geometry& geometry, const WalkParams& params, std::vector<Index> K);

  const std::vector<Index>& pinned_sites() const { return K_; }
  const Eigen::MatrixXd& hitting() const { return hitting_; }
  void sample(const Eigen::VectorXd& pinned, Rng& rng, Eigen::VectorXd& out) const;
  FieldSample sample(const Eigen::VectorXd& pinned, const StreamId& id) const;

 private:
  std::vector<Index> K_;
  PrecisionSampler residual_;
  Eigen::MatrixXd hitting_;
};

/// Torus sample.
FieldSample sample_torus(const Geometry& torus, double theta, const StreamId& id);
/// Box sample, zero on the killed set. Uses the sine basis when nothing
/// inside the box is killed, otherwise the precision sampler.
FieldSample sample_box(const Geometry& box, double theta, const std::vector<Index>& killed, const StreamId& id);
FieldSample sample_conditional(const Geometry& geometry, const WalkParams& params, const std::vector<Index>& K,
                               const Eigen::VectorXd& pinned, const StreamId& id);

/// Writes `<stem>.bin` (header + row-major f64 payload) and `<stem>.json`.
void write_field_dump(const FieldSample& sample, double theta, const std::filesystem::path& stem);
FieldSample read_field_dump(const std::filesystem::path& bin, double* theta = nullptr);

}  // namespace gffperc
