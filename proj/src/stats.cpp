#include "gffperc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "gffperc/common.hpp"

namespace gffperc {

namespace bm = boost::math;

Estimate clopper_pearson(std::size_t k, std::size_t n, double confidence) {
  require(n > 0, "need at least one replica");
  const double alpha = 1.0 - confidence;
  Estimate e;
  e.n = n;
  e.value = static_cast<double>(k) / static_cast<double>(n);
  e.se = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(n));
  const auto kd = static_cast<double>(k), nd = static_cast<double>(n);
  e.lo = k == 0 ? 0.0 : bm::quantile(bm::beta_distribution<>(kd, nd - kd + 1.0), alpha / 2);
  e.hi = k == n ? 1.0 : bm::quantile(bm::beta_distribution<>(kd + 1.0, nd - kd), 1.0 - alpha / 2);
  e.interval = "clopper-pearson";
  return e;
}

Estimate proportion(std::size_t k, std::size_t n, double confidence) {
  require(n > 0, "need at least one replica");
  if (k < 5 || n - k < 5) return clopper_pearson(k, n, confidence);
  Estimate e;
  e.n = n;
  e.value = static_cast<double>(k) / static_cast<double>(n);
  e.se = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(n));
  const double z = normal_quantile(0.5 + confidence / 2);
  e.lo = std::max(0.0, e.value - z * e.se);
  e.hi = std::min(1.0, e.value + z * e.se);
  return e;
}

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

Estimate normal_from_influence(double value, const std::vector<double>& psi) {
  const auto n = psi.size();
  double m = mean_of(psi), ss = 0.0;
  for (double p : psi) ss += (p - m) * (p - m);
  Estimate e;
  e.n = n;
  e.value = value;
  e.se = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  e.lo = value - kZ95 * e.se;
  e.hi = value + kZ95 * e.se;
  return e;
}

}  // namespace

Estimate mean_estimate(const std::vector<double>& samples) {
  require(!samples.empty(), "need at least one sample");
  return normal_from_influence(mean_of(samples), samples);
}

Estimate covariance_estimate(const std::vector<double>& a, const std::vector<double>& b) {
  require(a.size() == b.size() && !a.empty(), "paired samples required");
  const double ma = mean_of(a), mb = mean_of(b);
  std::vector<double> prod(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) prod[i] = (a[i] - ma) * (b[i] - mb);
  const double cov = mean_of(prod);
  return normal_from_influence(cov, prod);
}

Estimate covariance_ratio(const std::vector<double>& a, const std::vector<double>& b) {
  require(a.size() == b.size() && !a.empty(), "paired samples required");
  const double ma = mean_of(a), mb = mean_of(b);
  double cov = 0.0, var = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    var += (b[i] - mb) * (b[i] - mb);
  }
  cov /= static_cast<double>(a.size());
  var /= static_cast<double>(a.size());
  require(var >= 1e-12, "variance of the conditioning variable is degenerate");
  const double r = cov / var;
  std::vector<double> psi(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double db = b[i] - mb;
    psi[i] = ((a[i] - ma) * db - cov) / var - r * (db * db - var) / var;
  }
  Estimate e = normal_from_influence(r, psi);
  return e;
}

double z_score(const Estimate& a, const Estimate& b) {
  const double s = std::hypot(a.se, b.se);
  const double d = std::abs(a.value - b.value);
  if (s == 0.0) return d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return d / s;
}

double z_score(const Estimate& a, double exact) {
  const double d = std::abs(a.value - exact);
  if (a.se == 0.0) return d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return d / a.se;
}

double chi2_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  return bm::cdf(bm::complement(bm::chi_squared_distribution<>(df), x));
}

double chi2_quantile(double p, double df) { return bm::quantile(bm::chi_squared_distribution<>(df), p); }

double normal_quantile(double p) { return bm::quantile(bm::normal_distribution<>(), p); }

double normal_sf_value(double x) { return bm::cdf(bm::complement(bm::normal_distribution<>(), x)); }

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double binomial_term(double k, double n, double eta) {
  // k log p + (n - k) log(1 - p), p = exp(eta) < 1.
  if (eta >= 0.0) return kNegInf;
  double t = k * eta;
  if (n > k) t += (n - k) * std::log(-std::expm1(eta));
  return t;
}

double saturated_term(double k, double n) {
  double t = 0.0;
  if (k > 0) t += k * std::log(k / n);
  if (n > k) t += (n - k) * std::log((n - k) / n);
  return t;
}

double loglik(const std::vector<double>& x, const std::vector<std::size_t>& k, const std::vector<std::size_t>& n,
              double a, double c) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double t = binomial_term(static_cast<double>(k[i]), static_cast<double>(n[i]), a - c * x[i]);
    if (t == kNegInf) return kNegInf;
    s += t;
  }
  return s;
}

// Derivatives w.r.t. eta of one binomial term.
void eta_derivs(double k, double n, double eta, double& g, double& h) {
  const double p = std::exp(eta);
  const double q = -std::expm1(eta);
  g = k - (n - k) * p / q;
  h = -(n - k) * p / (q * q);
}

// Largest a keeping every eta negative at fixed c.
double a_ceiling(const std::vector<double>& x, double c) {
  double m = std::numeric_limits<double>::infinity();
  for (double xi : x) m = std::min(m, c * xi);
  return m;
}

}  // namespace

double profile_loglik(const std::vector<double>& x, const std::vector<std::size_t>& k,
                      const std::vector<std::size_t>& n, double c, double* a_out) {
  // The log-likelihood is concave in a; Newton with backtracking.
  double total_k = 0, total_n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    total_k += static_cast<double>(k[i]);
    total_n += static_cast<double>(n[i]);
  }
  const double ceil = a_ceiling(x, c);
  double xbar = 0.0;
  for (double xi : x) xbar += xi;
  xbar /= static_cast<double>(x.size());
  double a = std::log(std::max(total_k, 0.5) / total_n) + c * xbar;
  a = std::min(a, ceil - 1e-9);
  double f = loglik(x, k, n, a, c);
  for (int it = 0; it < 200; ++it) {
    double g = 0.0, h = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double gi, hi;
      eta_derivs(static_cast<double>(k[i]), static_cast<double>(n[i]), a - c * x[i], gi, hi);
      g += gi;
      h += hi;
    }
    if (std::abs(g) < 1e-10) break;
    double step = h < 0.0 ? -g / h : (g > 0 ? 1.0 : -1.0);
    double t = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      double na = a + t * step;
      if (na < ceil) {
        double nf = loglik(x, k, n, na, c);
        if (nf >= f) {
          moved = std::abs(na - a) > 1e-15;
          a = na;
          f = nf;
          break;
        }
      }
      t /= 2;
    }
    if (!moved) break;
  }
  if (a_out) *a_out = a;
  return f;
}

LogLinearFit fit_log_linear(const std::vector<double>& x, const std::vector<std::size_t>& k,
                            const std::vector<std::size_t>& n, double confidence) {
  require(x.size() == k.size() && x.size() == n.size() && x.size() >= 2, "need at least two design points");
  for (std::size_t i = 0; i < x.size(); ++i) require(k[i] <= n[i] && n[i] > 0, "invalid binomial counts");

  // Profile over c: concave jointly, so golden-section on the profile works.
  auto prof = [&](double c) { return profile_loglik(x, k, n, c); };
  double xmin = *std::min_element(x.begin(), x.end()), xmax = *std::max_element(x.begin(), x.end());
  double span = std::max(xmax - xmin, 1e-12);
  double lo = -50.0 / span, hi = 50.0 / span;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c1 = hi - gr * (hi - lo), c2 = lo + gr * (hi - lo);
  double f1 = prof(c1), f2 = prof(c2);
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    if (f1 < f2) {
      lo = c1;
      c1 = c2;
      f1 = f2;
      c2 = lo + gr * (hi - lo);
      f2 = prof(c2);
    } else {
      hi = c2;
      c2 = c1;
      f2 = f1;
      c1 = hi - gr * (hi - lo);
      f1 = prof(c1);
    }
  }
  LogLinearFit fit;
  fit.c = 0.5 * (lo + hi);
  fit.loglik = profile_loglik(x, k, n, fit.c, &fit.a);
  fit.converged = std::isfinite(fit.loglik);
  fit.lr_c0 = 2.0 * (fit.loglik - prof(0.0));

  double sat = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sat += saturated_term(static_cast<double>(k[i]), static_cast<double>(n[i]));
  fit.deviance = std::max(0.0, 2.0 * (sat - fit.loglik));
  fit.df = static_cast<int>(x.size()) - 2;
  fit.gof_p = fit.df > 0 ? chi2_sf(fit.deviance, fit.df) : 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double p = std::exp(fit.a - fit.c * x[i]);
    double nd = static_cast<double>(n[i]);
    double var = nd * p * (1.0 - p);
    fit.pearson_residuals.push_back(var > 0 ? (static_cast<double>(k[i]) - nd * p) / std::sqrt(var) : 0.0);
  }

  // Profile-likelihood interval: { c : 2 (l_max - l(c)) <= chi2_1(conf) }.
  const double cut = fit.loglik - 0.5 * chi2_quantile(confidence, 1.0);
  auto bound = [&](double dir) {
    double inside = fit.c, step = std::max(std::abs(fit.c), 1.0 / span) * 0.1;
    double outside = fit.c + dir * step;
    int grow = 0;
    while (prof(outside) > cut && grow < 200) {
      inside = outside;
      step *= 2.0;
      outside = fit.c + dir * step;
      ++grow;
    }
    for (int it = 0; it < 100; ++it) {
      double mid = 0.5 * (inside + outside);
      (prof(mid) > cut ? inside : outside) = mid;
    }
    return 0.5 * (inside + outside);
  };
  fit.c_lo = bound(-1.0);
  fit.c_hi = bound(1.0);
  return fit;
}

}  // namespace gffperc

namespace gffperc {

namespace {

double profile_chi2(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& se,
                    double b, double* a_out) {
  double num = 0.0, den = 0.0;
  const double x0 = *std::min_element(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = std::exp(-b * (x[i] - x0)), w = 1.0 / (se[i] * se[i]);
    num += w * y[i] * e;
    den += w * e * e;
  }
  const double a = den > 0 ? num / den : 0.0;
  double chi = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = (y[i] - a * std::exp(-b * (x[i] - x0))) / se[i];
    chi += r * r;
  }
  if (a_out) *a_out = a * std::exp(b * x0);
  return chi;
}

}  // namespace

ExpDecayFit fit_exponential_decay(const std::vector<double>& x, const std::vector<double>& y,
                                  const std::vector<double>& se, double confidence) {
  require(x.size() >= 2 && x.size() == y.size() && y.size() == se.size(), "need matching x, y, se");
  for (double s : se) require(s > 0.0, "standard errors must be positive");
  // Rates are scanned on a grid in units of 1/span, then refined.
  const double span = *std::max_element(x.begin(), x.end()) - *std::min_element(x.begin(), x.end());
  require(span > 0.0, "design points must differ");
  const double bmin = -10.0 / span, bmax = 60.0 / span;
  const int steps = 7000;
  double best_b = 0.0, best = std::numeric_limits<double>::infinity();
  std::vector<double> chi(steps + 1);
  for (int s = 0; s <= steps; ++s) {
    const double b = bmin + (bmax - bmin) * s / steps;
    chi[static_cast<std::size_t>(s)] = profile_chi2(x, y, se, b, nullptr);
    if (chi[static_cast<std::size_t>(s)] < best) {
      best = chi[static_cast<std::size_t>(s)];
      best_b = b;
    }
  }
  ExpDecayFit f;
  f.b = best_b;
  f.chi2 = profile_chi2(x, y, se, best_b, &f.A);
  const double cut = f.chi2 + chi2_quantile(confidence, 1.0);
  f.b_lo = bmin;
  f.b_hi = std::numeric_limits<double>::infinity();
  for (int s = 0; s <= steps; ++s) {
    const double b = bmin + (bmax - bmin) * s / steps;
    if (chi[static_cast<std::size_t>(s)] <= cut) {
      f.b_lo = b;
      break;
    }
  }
  for (int s = steps; s >= 0; --s) {
    if (chi[static_cast<std::size_t>(s)] <= cut) {
      if (s < steps) f.b_hi = bmin + (bmax - bmin) * s / steps;
      break;
    }
  }
  return f;
}

}  // namespace gffperc
