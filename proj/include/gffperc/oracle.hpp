#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gffperc/events.hpp"
#include "gffperc/lattice.hpp"
#include "gffperc/quadrature.hpp"
#include "gffperc/stats.hpp"
#include "gffperc/walks.hpp"

namespace gffperc {

/// The Gaussian vector (phi_x)_{x in K} together with its trace form.
struct GaussianK {
  std::vector<Index> K;
  Eigen::MatrixXd G;
  TraceForm trace;
};

/// Green matrix and trace form on K for the walk on `geometry`.
GaussianK gaussian_on(const Geometry& geometry, const WalkParams& params, const std::vector<Index>& K);
/// Z^d stand-in: K given as offsets from the origin of a box whose margin
/// is chosen so the truncation error is below tol. When that box is too
/// large to factorize, G comes from green_zd_fourier and the trace form from
/// trace_from_green; K then holds positions 0..|K|-1.
GaussianK gaussian_zd(int dim, double theta, const std::vector<Point>& K, double tol = 1e-12);

/// Z^d Green matrix on K as a Fourier sum on a torus large enough that the
/// periodic images add less than tol.
Eigen::MatrixXd green_zd_fourier(int dim, double theta, const std::vector<Point>& K, double tol = 1e-12);

/// Trace form read off A = G^-1: c = -A off the diagonal, kappa = A 1 and
/// self-return 1 - A_xx.
TraceForm trace_from_green(const std::vector<Index>& K, const Eigen::MatrixXd& G);

double exact_event_prob(const Eigen::MatrixXd& G, const BooleanEvent& event, const Eigen::VectorXd& levels);
double exact_event_prob(const Eigen::MatrixXd& G, const BooleanEvent& event, double level);

/// I(A^h, x) = P[A | xi_x = 1] - P[A | xi_x = 0] from one orthant table.
double exact_influence(const OrthantTable& table, const BooleanEvent& event, int x);

struct FkgReport {
  double min_margin = 0.0;
  std::size_t pairs = 0;
  bool pass = false;
};
/// Q(w v w') Q(w ^ w') - Q(w) Q(w') >= -tol over all ordered pairs.
FkgReport check_fkg_lattice(const Eigen::MatrixXd& G, const Eigen::VectorXd& levels, double tol = 1e-6);

/// Hamiltonians of the Holley comparison on a finite index set V.
struct HolleyInstance {
  Eigen::MatrixXd precision;  // trace-form matrix A on V
  std::vector<int> open;      // sites pinned open
  std::vector<int> closed;    // sites pinned closed (x excluded)
  int x = 0;
  Eigen::VectorXd levels;
  double lambda = 1.0;

  /// H+ (plus = true) or H- at phi.
  double hamiltonian(const Eigen::VectorXd& phi, bool plus) const;
};

double v_plus(double t);
double v_minus(double t);

/// max over random pairs of H+(phi v phi') + H-(phi ^ phi') - H+(phi) - H-(phi').
double check_holley_hamiltonian(const HolleyInstance& inst, std::size_t samples, std::uint64_t seed);

struct DominationCheck {
  double min_difference = 0.0;
  std::size_t events = 0;
  bool pass = false;
};
/// Sites 0..k-1 of G are K, the rest K'. For every event on K' compares the
/// conditional probabilities given xi = omega on K and xi = omega^x on K.
DominationCheck check_stochastic_domination(const Eigen::MatrixXd& G, int k, const Eigen::VectorXd& levels,
                                            Mask omega, int x, const std::vector<BooleanEvent>& probe_events,
                                            double tol = 1e-6);

struct RussoCheck {
  double finite_difference = 0.0;
  double expectation = 0.0;
  double residual = 0.0;
  double richardson_coefficient = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};
/// Central difference of P[A^h] against sum_x kappa_x E[1_A phi_x].
RussoCheck check_russo(const Eigen::MatrixXd& G, const Eigen::VectorXd& kappa, const BooleanEvent& event, double h,
                       double dh);

struct PivotalCheck {
  double max_residual = 0.0;
  std::vector<double> lhs, rhs;
  bool pass = false;
};
/// theta = 1: E[1_{A^h} phi_x] = f(h) P[x pivotal] for every x.
PivotalCheck check_theta1_pivotal(const BooleanEvent& event, double h, double tol = 1e-10);

struct DominationRatio {
  double c1 = 0.0;
  std::size_t ratios = 0;
  bool all_positive = false;
  bool summed_holds = false;
  bool pass = false;
};
/// Ratios kappa_x E[1_{A^h} phi_x] / I(A^h, x) over sites and levels.
DominationRatio check_domination(const Eigen::MatrixXd& G, const Eigen::VectorXd& kappa, const BooleanEvent& event,
                                 const std::vector<double>& levels, double min_influence = 1e-8);

struct InfluenceInstance {
  Eigen::MatrixXd G;
  BooleanEvent event;
  double h = 0.0;
};
struct InfluenceCalibration {
  double c_inf_min = 0.0;    // min over instances of the l-infinity ratio
  double c_l1_min = 0.0;     // min over instances of the l1 ratio
  std::size_t used = 0;
  std::size_t used_l1 = 0;
  bool pass = false;
  std::vector<double> c_inf, c_l1;
};
InfluenceCalibration check_influence_theorem(const std::vector<InfluenceInstance>& instances);

struct SqrtTrickCheck {
  double sup = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  bool pass = false;
};
SqrtTrickCheck check_sqrt_trick(const std::vector<double>& probabilities, double union_probability,
                                double tol = 1e-9);
SqrtTrickCheck check_sqrt_trick(const Eigen::MatrixXd& G, const std::vector<BooleanEvent>& events, double h);

struct ChangeBcRow {
  int L = 0;
  Estimate difference;  // P_torus - P_box
};
struct ChangeBcReport {
  std::vector<ChangeBcRow> rows;
  bool non_increasing = false;
  ExpDecayFit fit;
  bool decay_significant = false;
  bool pass = false;
};
/// Event on the sites `support` (offsets from the origin). Both K-marginals
/// are exact; the probabilities are estimated with common random numbers.
ChangeBcReport check_change_bc(int dim, double theta, const std::vector<int>& Ls, const std::vector<Point>& support,
                               const BooleanEvent& event, double h, std::size_t replicas, std::uint64_t seed,
                               int workers = 0);

/// One record of the verification report.
struct CheckRecord {
  std::string name;
  nlohmann::json instance;
  double margin = 0.0;
  bool pass = false;
  std::string error;
};

nlohmann::json to_json(const CheckRecord& r);

/// Runs `body`; an exception turns into a failed record instead of
/// aborting the suite.
CheckRecord run_check(const std::string& name, const nlohmann::json& instance,
                      const std::function<std::pair<double, bool>()>& body);

struct SuiteOptions {
  std::uint64_t seed = 1;
  int workers = 0;
  /// Replicas for the Monte Carlo cross-checks inside the suite.
  std::size_t replicas = 20000;
  double M = 2.0;
};

std::vector<CheckRecord> verification_suite(const SuiteOptions& opts);

}  // namespace gffperc
