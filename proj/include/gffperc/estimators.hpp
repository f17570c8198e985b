#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gffperc/events.hpp"
#include "gffperc/field.hpp"
#include "gffperc/levelset.hpp"
#include "gffperc/stats.hpp"

namespace gffperc {

/// Crossing {B(0,L) <-> S(0,2L)} in Z^d, simulated in a box of radius
/// 2L + margin whose field is synthesized only on B(0, 2L).
struct CrossingSetup {
  int dim = 3;
  double theta = 0.5;
  int L = 4;
  int margin = 0;  // 0 selects default_truncation_margin(theta)
};

int effective_margin(const CrossingSetup& s);

/// Per-replica crossing levels h_c (the event holds at h iff h <= h_c).
/// Replica r uses stream (seed, experiment_id(label), r).
std::vector<double> sample_crossing_levels(const CrossingSetup& setup, std::size_t replicas, std::uint64_t seed,
                                           const std::string& label = "pcurve", int workers = 0);

/// Same for i.i.d. standard Gaussian sites with no Green-function step: the
/// Bernoulli reference at theta = 1.
std::vector<double> sample_bernoulli_levels(int dim, int L, std::size_t replicas, std::uint64_t seed,
                                            const std::string& label = "bernoulli", int workers = 0);

struct CurveRow {
  double theta = 0.0;
  int L = 0;
  double h = 0.0;
  Estimate est;
};

struct CurveTable {
  std::vector<CurveRow> rows;
  bool shared_seed = true;
  std::string kind = "p";

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

/// p(h) = fraction of replicas with h_c >= h, for each h of the grid.
CurveTable curve_from_levels(double theta, int L, const std::vector<double>& levels, const std::vector<double>& grid);
std::size_t count_at_least(const std::vector<double>& levels, double h);

CurveTable estimate_p_curve(const CrossingSetup& setup, const std::vector<double>& grid, std::size_t replicas,
                            std::uint64_t seed, int workers = 0);

/// Torus annulus event A_L on a torus of half-side Lbar.
struct TorusSetup {
  int dim = 3;
  double theta = 0.5;
  int L = 1;
  int ell = 8;
  int Lbar = 17;
};

/// Indicators of A_L^h per replica and level, plus the single-center
/// crossing {B(0, ell L) <-> S(0, 2 ell L)} on the same samples.
struct TorusIndicators {
  std::vector<std::vector<std::uint8_t>> annulus;  // [replica][level]
  std::vector<std::vector<std::uint8_t>> single;   // [replica][level]
};

TorusIndicators sample_torus_indicators(const TorusSetup& setup, const std::vector<double>& grid,
                                        std::size_t replicas, std::uint64_t seed, int workers = 0);

CurveTable estimate_q_curve(const TorusSetup& setup, const std::vector<double>& grid, std::size_t replicas,
                            std::uint64_t seed, int workers = 0);
Estimate estimate_q(const TorusSetup& setup, double h, std::size_t replicas, std::uint64_t seed, int workers = 0);

/// Conditional influences I(A_L^h, x) for each listed torus site.
std::vector<Estimate> estimate_annulus_influences(const TorusSetup& setup, double h, const std::vector<Index>& sites,
                                                  std::size_t replicas, std::uint64_t seed, int workers = 0);

/// Monte Carlo over a Gaussian vector on K with covariance G_K and an event
/// given as a predicate on the configuration over K.
struct GaussianEventSetup {
  Eigen::MatrixXd covariance;
  ConfigPredicate event;
  /// Killing weights of the trace form on K (Russo estimator only).
  Eigen::VectorXd kappa;
};

ConfigPredicate as_predicate(const BooleanEvent& event);

/// I(A^h, x) = Cov(1_A, xi_x) / Var(xi_x), delta-method error.
Estimate estimate_influence(const GaussianEventSetup& setup, std::size_t x, double h, std::size_t replicas,
                            std::uint64_t seed, int workers = 0);
/// -dP[A^h]/dh as Cov(1_A, sum_x kappa_x phi_x).
Estimate estimate_russo_derivative(const GaussianEventSetup& setup, double h, std::size_t replicas,
                                   std::uint64_t seed, int workers = 0);
/// (P[A^{h-dh}] - P[A^{h+dh}]) / (2 dh) on shared samples.
Estimate estimate_fd_derivative(const GaussianEventSetup& setup, double h, double dh, std::size_t replicas,
                                std::uint64_t seed, int workers = 0);
Estimate estimate_event_probability(const GaussianEventSetup& setup, double h, std::size_t replicas,
                                    std::uint64_t seed, int workers = 0);

/// Stretched-exponential fit log p_L = a - c' L^rho with rho on a grid in
/// (0, 1]; binomial likelihood, profile interval for c'.
struct DecayFit {
  double h = 0.0;
  double a = 0.0;
  double c_prime = 0.0;
  double c_lo = 0.0;
  double c_hi = 0.0;
  double rho = 1.0;
  double deviance = 0.0;
  double gof_p = 1.0;
  /// c' > 0 at the requested confidence for every rho of the grid.
  bool c_positive = false;
  std::vector<double> residuals;
  /// Rows with zero successes; their interval is one-sided Clopper-Pearson.
  std::vector<int> flagged_L;
  std::vector<Estimate> p;
};

DecayFit fit_decay(const std::vector<int>& Ls, const std::vector<std::size_t>& k, const std::vector<std::size_t>& n,
                   double h, double confidence = 0.95);

/// 1 - p_L = C0 L^-eps, binomial likelihood on the failures.
struct SharpnessFit {
  double h = 0.0;
  double C0 = 0.0;
  double eps = 0.0;
  double eps_lo = 0.0;
  double eps_hi = 0.0;
  double deviance = 0.0;
  double gof_p = 1.0;
  /// 1 - p strictly decreasing in L.
  bool raw_monotone = false;
  /// eps_lo > 0 and the deviance test passes.
  bool accepted = false;
  std::vector<Estimate> one_minus_p;
};

SharpnessFit fit_sharpness(const std::vector<int>& Ls, const std::vector<std::size_t>& k,
                           const std::vector<std::size_t>& n, double h, double confidence = 0.95,
                           double gof_level = 0.05);

/// For levels h < h2: logit q_L(h) - logit q_L(h2), which the integrated
/// differential inequality bounds below by c (h2 - h) log L.
struct LogitGapRow {
  int L = 0;
  double gap = 0.0;
  double se = 0.0;
  double c_hat = 0.0;
  bool ordered = false;
};
std::vector<LogitGapRow> logit_gap_diagnostic(const std::vector<int>& Ls, const std::vector<Estimate>& q_low,
                                              const std::vector<Estimate>& q_high, double h, double h2);

struct LevelCurve {
  int L = 0;
  std::vector<double> levels;  // per-replica crossing levels
};

/// Smallest grid level where p for the largest L is below gamma and the
/// sequence over L is non-increasing; nullopt if no grid level qualifies.
std::optional<double> locate_h_double_star(const std::vector<LevelCurve>& curves, const std::vector<double>& grid,
                                           double gamma = 0.1);

/// Quantile of the crossing levels: the p-curve equals 1 - u at it.
double level_quantile(std::vector<double> levels, double u);

struct ThresholdReport {
  double theta = 0.0;
  double gamma = 0.1;
  std::optional<double> h_double_star;
  std::vector<int> Ls;
  /// h_0.1 - h_0.9 per L: the width of the transition window.
  std::vector<double> transition_width;
  bool steepening = false;
  CurveTable curves;
  std::optional<SharpnessFit> sharpness;
  std::optional<DecayFit> decay;
  /// p at h** - gap and h** + gap (re-simulated).
  std::vector<Estimate> p_below, p_above;
  bool below_increasing = false;
  bool above_decreasing = false;

  nlohmann::json to_json() const;
};

struct ThresholdStudy {
  int dim = 3;
  double theta = 0.7;
  int margin = 0;
  std::vector<int> Ls{4, 8, 16};
  std::vector<double> grid;
  std::size_t replicas = 1000;
  double gamma = 0.1;
  double gap_below = 0.6;
  double gap_above = 0.6;
};

/// Locates h** on the grid, then re-simulates at h** -/+ gaps with fresh
/// streams and fits sharpness below and decay above.
ThresholdReport threshold_study(const ThresholdStudy& study, std::uint64_t seed, int workers = 0);

nlohmann::json to_json(const Estimate& e);
nlohmann::json to_json(const DecayFit& f);
nlohmann::json to_json(const SharpnessFit& f);

}  // namespace gffperc
