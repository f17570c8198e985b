#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace gffperc {

/// Monte Carlo estimate with a 95% interval.
struct Estimate {
  double value = 0.0;
  std::size_t n = 0;
  double se = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  /// "normal" or "clopper-pearson".
  std::string interval = "normal";
};

inline constexpr double kZ95 = 1.959963984540054;

/// k successes out of n. Clopper-Pearson is used when k or n - k is below 5.
Estimate proportion(std::size_t k, std::size_t n, double confidence = 0.95);
Estimate clopper_pearson(std::size_t k, std::size_t n, double confidence = 0.95);
/// Mean of samples with a normal interval; se = sd / sqrt(n).
Estimate mean_estimate(const std::vector<double>& samples);
/// Cov(a, b) / Var(b) with the delta-method standard error.
Estimate covariance_ratio(const std::vector<double>& a, const std::vector<double>& b);
/// Cov(a, b) with the standard error of its influence function.
Estimate covariance_estimate(const std::vector<double>& a, const std::vector<double>& b);

/// |x - y| in units of the combined standard error.
double z_score(const Estimate& a, const Estimate& b);
double z_score(const Estimate& a, double exact);

double chi2_sf(double x, double df);
double chi2_quantile(double p, double df);
double normal_quantile(double p);
double normal_sf_value(double x);

/// Binomial counts at design points x: k_i successes of n_i, modelled by
/// log pi_i = a - c x_i (pi < 1 enforced).
struct LogLinearFit {
  double a = 0.0;
  double c = 0.0;
  double c_lo = 0.0;
  double c_hi = 0.0;
  double loglik = 0.0;
  /// Deviance against the saturated binomial model.
  double deviance = 0.0;
  int df = 0;
  /// chi2 goodness-of-fit p-value of the deviance (1 when df = 0).
  double gof_p = 1.0;
  /// 2 (loglik - loglik at c = 0).
  double lr_c0 = 0.0;
  std::vector<double> pearson_residuals;
  bool converged = false;
};

LogLinearFit fit_log_linear(const std::vector<double>& x, const std::vector<std::size_t>& k,
                            const std::vector<std::size_t>& n, double confidence = 0.95);

/// log-likelihood maximised over a at fixed c.
double profile_loglik(const std::vector<double>& x, const std::vector<std::size_t>& k,
                      const std::vector<std::size_t>& n, double c, double* a_out = nullptr);

}  // namespace gffperc

namespace gffperc {

/// Weighted fit of D_i = A exp(-b x_i) with known standard errors; the
/// interval for b is { b : chi2(b) - chi2_min <= chi2_1(conf) } with A
/// profiled out, and may be unbounded above.
struct ExpDecayFit {
  double A = 0.0;
  double b = 0.0;
  double b_lo = 0.0;
  double b_hi = 0.0;
  double chi2 = 0.0;
};

ExpDecayFit fit_exponential_decay(const std::vector<double>& x, const std::vector<double>& y,
                                  const std::vector<double>& se, double confidence = 0.95);

}  // namespace gffperc
