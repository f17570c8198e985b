#include "gffperc/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include <json.hpp>

namespace gffperc {

namespace {

// Orthonormal eigenbasis of the 1-D transition operator on a cycle of even
// length m: constant, cos/sin pairs, alternating mode.
void cycle_basis(int m, Eigen::MatrixXd& e, Eigen::VectorXd& lam) {
  e.resize(m, m);
  lam.resize(m);
  const double pi = std::numbers::pi;
  const double c0 = 1.0 / std::sqrt(static_cast<double>(m));
  const double c1 = std::sqrt(2.0 / m);
  for (int j = 0; j < m; ++j) e(j, 0) = c0;
  lam(0) = 1.0;
  for (int t = 1; 2 * t < m; ++t) {
    for (int j = 0; j < m; ++j) {
      double a = 2.0 * pi * t * j / m;
      e(j, 2 * t - 1) = c1 * std::cos(a);
      e(j, 2 * t) = c1 * std::sin(a);
    }
    lam(2 * t - 1) = lam(2 * t) = std::cos(2.0 * pi * t / m);
  }
  for (int j = 0; j < m; ++j) e(j, m - 1) = (j % 2 == 0 ? c0 : -c0);
  lam(m - 1) = -1.0;
}

// Same for a path of m sites with both ends absorbing (sine basis).
void path_basis(int m, Eigen::MatrixXd& e, Eigen::VectorXd& lam) {
  e.resize(m, m);
  lam.resize(m);
  const double pi = std::numbers::pi;
  const double c = std::sqrt(2.0 / (m + 1));
  for (int k = 0; k < m; ++k) {
    lam(k) = std::cos(pi * (k + 1) / (m + 1));
    for (int j = 0; j < m; ++j) e(j, k) = c * std::sin(pi * (j + 1.0) * (k + 1) / (m + 1));
  }
}

// Mode variances for a product basis with 1-D eigenvalues lam.
Eigen::VectorXd product_variances(const Eigen::VectorXd& lam, int d, double theta) {
  const auto m = lam.size();
  Eigen::Index n = 1;
  for (int a = 0; a < d; ++a) n *= m;
  Eigen::VectorXd var(n);
  std::array<Eigen::Index, kMaxDim> k{};
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index u = i;
    double s = 0.0;
    for (int a = d - 1; a >= 0; --a) {
      k[a] = u % m;
      u /= m;
      s += lam(k[a]);
    }
    var(i) = 1.0 / (1.0 - (1.0 - theta) * s / d);
  }
  return var;
}

void check_theta(double theta) {
  require(theta > 0.0 && theta <= 1.0, "theta must lie in (0, 1]; the massless field is not supported");
}

}  // namespace

Eigen::VectorXd spectral_profile(const Geometry& torus, double theta) {
  require(torus.is_torus(), "spectral profile is defined on the torus");
  check_theta(theta);
  Eigen::MatrixXd e;
  Eigen::VectorXd lam;
  cycle_basis(torus.side(), e, lam);
  return product_variances(lam, torus.dim(), theta);
}

SpectralSampler::SpectralSampler(const Geometry& geometry, double theta, std::optional<int> window)
    : geometry_(geometry), output_(geometry), theta_(theta) {
  check_theta(theta);
  Eigen::VectorXd lam;
  if (geometry.is_torus())
    cycle_basis(geometry.side(), basis_, lam);
  else
    path_basis(geometry.side(), basis_, lam);
  scale_ = product_variances(lam, geometry.dim(), theta).cwiseSqrt();
  if (window) {
    require(!geometry.is_torus(), "windowed sampling is only available on boxes");
    require(*window >= 0 && *window <= geometry.extent(), "window radius exceeds the box");
    output_ = Geometry::box(geometry.dim(), *window);
    basis_rows_ = basis_.middleRows(geometry.extent() - *window, 2 * *window + 1);
  } else {
    basis_rows_ = basis_;
  }
}

void SpectralSampler::sample(Rng& rng, Eigen::VectorXd& out) const {
  const int d = geometry_.dim();
  const Eigen::Index m = basis_.rows();
  const Eigen::Index w = basis_rows_.rows();
  const auto n = static_cast<std::size_t>(scale_.size());
  thread_local std::vector<double> work_a, work_b;
  work_a.resize(n);
  work_b.resize(n);
  fill_normal(rng, work_a.data(), n);
  for (std::size_t i = 0; i < n; ++i) work_a[i] *= scale_(static_cast<Eigen::Index>(i));

  // Synthesize one axis at a time. The untransformed axis is always the
  // slowest; the product E X^T moves the finished axis to the fastest slot,
  // so after d passes the original layout is restored.
  double* src = work_a.data();
  double* dst = work_b.data();
  Eigen::Index len = static_cast<Eigen::Index>(n);
  for (int a = 0; a < d; ++a) {
    const Eigen::Index rest = len / m;
    Eigen::Map<const Eigen::MatrixXd> x(src, rest, m);
    Eigen::Map<Eigen::MatrixXd> y(dst, w, rest);
    y.noalias() = basis_rows_ * x.transpose();
    len = w * rest;
    std::swap(src, dst);
  }
  out = Eigen::Map<const Eigen::VectorXd>(src, len);
}

FieldSample SpectralSampler::sample(const StreamId& id) const {
  Rng rng = make_rng(id);
  FieldSample s{output_, {}, id};
  sample(rng, s.values);
  return s;
}

std::size_t cholesky_cap(int dim) { return direct_solver_cap(dim); }

PrecisionSampler::PrecisionSampler(const Geometry& geometry, const WalkParams& params)
    : system_(geometry, params) {
  const std::size_t n = system_.free_vertices().size();
  if (n > cholesky_cap(geometry.dim()))
    throw ConfigError("domain of " + std::to_string(n) + " free sites exceeds the Cholesky cap of " +
                      std::to_string(cholesky_cap(geometry.dim())) +
                      "; use the torus or sine-basis sampler, or a smaller box");
  llt_.compute(system_.matrix());
  if (llt_.info() != Eigen::Success) throw NumericalError("precision matrix is not positive definite");
}

void PrecisionSampler::sample(Rng& rng, Eigen::VectorXd& out) const {
  const auto m = static_cast<Eigen::Index>(system_.free_vertices().size());
  Eigen::VectorXd z(m);
  fill_normal(rng, z.data(), static_cast<std::size_t>(m));
  // P Q P^-1 = L L^T, so P^-1 L^-T z has covariance Q^-1.
  Eigen::VectorXd x = llt_.matrixU().solve(z);
  Eigen::VectorXd phi = llt_.permutationPinv() * x;
  out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(system_.geometry().size()));
  for (Eigen::Index i = 0; i < m; ++i) out(system_.free_vertices()[static_cast<std::size_t>(i)]) = phi(i);
}

FieldSample PrecisionSampler::sample(const StreamId& id) const {
  Rng rng = make_rng(id);
  FieldSample s{system_.geometry(), {}, id};
  sample(rng, s.values);
  return s;
}

MarginalSampler::MarginalSampler(const Eigen::MatrixXd& covariance) {
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) throw NumericalError("marginal covariance is not positive definite");
  factor_ = llt.matrixL();
}

void MarginalSampler::sample(Rng& rng, Eigen::VectorXd& out) const {
  Eigen::VectorXd z(factor_.rows());
  fill_normal(rng, z.data(), static_cast<std::size_t>(z.size()));
  transform(z, out);
}

namespace {
WalkParams with_pinned(WalkParams p, const std::vector<Index>& K) {
  p.killed.insert(p.killed.end(), K.begin(), K.end());
  std::sort(p.killed.begin(), p.killed.end());
  p.killed.erase(std::unique(p.killed.begin(), p.killed.end()), p.killed.end());
  return p;
}
}  // namespace

ConditionalSampler::ConditionalSampler(const Geometry& geometry, const WalkParams& params, std::vector<Index> K)
    : K_(std::move(K)), residual_(geometry, with_pinned(params, K_)),
      hitting_(hitting_distribution(geometry, params, K_)) {}

void ConditionalSampler::sample(const Eigen::VectorXd& pinned, Rng& rng, Eigen::VectorXd& out) const {
  require(pinned.size() == static_cast<Eigen::Index>(K_.size()), "one pinned value per site of K");
  require(pinned.allFinite(), "pinned values must be finite");
  residual_.sample(rng, out);
  out.noalias() += hitting_ * pinned;
  // The harmonic extension equals the pinned value on K; set it exactly.
  for (std::size_t i = 0; i < K_.size(); ++i) out(K_[i]) = pinned(static_cast<Eigen::Index>(i));
}

FieldSample ConditionalSampler::sample(const Eigen::VectorXd& pinned, const StreamId& id) const {
  Rng rng = make_rng(id);
  FieldSample s{residual_.geometry(), {}, id};
  sample(pinned, rng, s.values);
  return s;
}

FieldSample sample_torus(const Geometry& torus, double theta, const StreamId& id) {
  require(torus.is_torus(), "sample_torus needs a torus geometry");
  return SpectralSampler(torus, theta).sample(id);
}

FieldSample sample_box(const Geometry& box, double theta, const std::vector<Index>& killed, const StreamId& id) {
  require(!box.is_torus(), "sample_box needs a box geometry");
  if (killed.empty()) return SpectralSampler(box, theta).sample(id);
  return PrecisionSampler(box, WalkParams{theta, killed, std::nullopt}).sample(id);
}

FieldSample sample_conditional(const Geometry& geometry, const WalkParams& params, const std::vector<Index>& K,
                               const Eigen::VectorXd& pinned, const StreamId& id) {
  return ConditionalSampler(geometry, params, K).sample(pinned, id);
}

namespace {

constexpr char kMagic[4] = {'G', 'F', 'F', 'D'};
constexpr std::uint32_t kDumpVersion = 1;

template <class T>
void put(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace

void write_field_dump(const FieldSample& s, double theta, const std::filesystem::path& stem) {
  std::filesystem::path bin = stem;
  bin += ".bin";
  std::ofstream os(bin, std::ios::binary);
  require(static_cast<bool>(os), "cannot open " + bin.string() + " for writing");
  os.write(kMagic, 4);
  put(os, kDumpVersion);
  put(os, static_cast<std::int32_t>(s.geometry.dim()));
  put(os, static_cast<std::int32_t>(s.geometry.is_torus() ? 1 : 0));
  put(os, static_cast<std::int32_t>(s.geometry.extent()));
  put(os, theta);
  put(os, s.stream.seed);
  put(os, s.stream.experiment);
  put(os, s.stream.replica);
  put(os, static_cast<std::uint64_t>(s.values.size()));
  os.write(reinterpret_cast<const char*>(s.values.data()), static_cast<std::streamsize>(s.values.size() * 8));

  nlohmann::json side = {{"schema", "gffperc.field/v1"},
                         {"payload", bin.filename().string()},
                         {"byte_order", "little"},
                         {"dtype", "f64"},
                         {"layout", "row-major, last coordinate fastest, coordinates from -extent"},
                         {"dim", s.geometry.dim()},
                         {"mode", s.geometry.is_torus() ? "torus" : "box"},
                         {"extent", s.geometry.extent()},
                         {"side", s.geometry.side()},
                         {"theta", theta},
                         {"seed", s.stream.seed},
                         {"experiment", s.stream.experiment},
                         {"replica", s.stream.replica},
                         {"count", s.values.size()},
                         {"header_bytes", 4 + 4 + 3 * 4 + 8 + 4 * 8}};
  std::filesystem::path js = stem;
  js += ".json";
  std::ofstream(js) << side.dump(2) << '\n';
}

FieldSample read_field_dump(const std::filesystem::path& bin, double* theta) {
  std::ifstream is(bin, std::ios::binary);
  require(static_cast<bool>(is), "cannot open " + bin.string());
  char magic[4];
  is.read(magic, 4);
  require(std::memcmp(magic, kMagic, 4) == 0, "not a field dump: " + bin.string());
  require(get<std::uint32_t>(is) == kDumpVersion, "unsupported field dump version");
  int d = get<std::int32_t>(is);
  int mode = get<std::int32_t>(is);
  int extent = get<std::int32_t>(is);
  double th = get<double>(is);
  StreamId id;
  id.seed = get<std::uint64_t>(is);
  id.experiment = get<std::uint64_t>(is);
  id.replica = get<std::uint64_t>(is);
  auto count = get<std::uint64_t>(is);
  Geometry g = mode == 1 ? Geometry::torus(d, extent) : Geometry::box(d, extent);
  require(count == g.size(), "field dump payload does not match its geometry");
  FieldSample s{g, Eigen::VectorXd(static_cast<Eigen::Index>(count)), id};
  is.read(reinterpret_cast<char*>(s.values.data()), static_cast<std::streamsize>(count * 8));
  require(static_cast<bool>(is), "truncated field dump");
  if (theta) *theta = th;
  return s;
}

}  // namespace gffperc
