#pragma once

// Closed forms for a single binary feature x_j with class balance q under
// Gaussian noise: moments of x~_j' y, soft-threshold moments, bias, variance,
// selection probability and their limits as q -> 1.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "normreg/core/special.hpp"
#include "normreg/error.hpp"
#include "normreg/normalize.hpp"
#include "normreg/solver.hpp"

namespace normreg::oracle {

using normreg::soft_threshold;

struct Scaling {
  enum class Mode { Delta, Omega } mode = Mode::Delta;
  double exponent = 0.5;

  static Scaling delta(double d) { return {Mode::Delta, d}; }
  static Scaling omega(double w) { return {Mode::Omega, w}; }
};

/// Constant factor applied to s (Delta mode) or to u = v (Omega mode).
struct Anchor {
  double kappa = 2.0;
  double q0 = 0.5;
  PenaltyKind penalty = PenaltyKind::LassoComparable;
};

struct BinaryFeatureModel {
  double beta_star = 1.0;
  double n = 100.0;
  double q = 0.5;
  double sigma_eps = 1.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  Scaling scaling{};
  std::optional<Anchor> anchor;

  double nu() const { return q - q * q; }

  /// Anchor multiplier m: s = m nu^delta, or u = v = m nu^omega.
  double multiplier() const {
    if (!anchor) return 1.0;
    return binary_delta_scale(1.0, {scaling.exponent, anchor->kappa, anchor->q0, anchor->penalty});
  }

  void validate() const {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("class balance q must lie strictly inside (0, 1)");
    if (!(n > 0.0)) throw DomainError("n must be positive");
    if (!(sigma_eps >= 0.0)) throw DomainError("noise level must be non-negative");
    if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw DomainError("penalties must be non-negative");
    if (!(scaling.exponent >= 0.0)) throw DomainError("scaling exponent must be non-negative");
  }
};

struct Moments {
  double mu;      // mean of x~' y
  double sigma;   // sd of x~' y
  double d;       // denominator mapping ST(x~' y) to the original-scale estimate
  double lambda;  // effective l1 threshold
  double theta;   // -mu - lambda
  double gamma;   // mu - lambda
};

inline Moments moments(const BinaryFeatureModel& m) {
  m.validate();
  const double nu = m.nu();
  const double mult = m.multiplier();
  Moments out{};
  if (m.scaling.mode == Scaling::Mode::Delta) {
    const double s = mult * std::pow(nu, m.scaling.exponent);
    out.mu = m.beta_star * m.n * nu / s;
    out.sigma = m.sigma_eps * std::sqrt(m.n * nu) / s;
    out.d = s * (m.n * nu / (s * s) + m.lambda2);
    out.lambda = m.lambda1;
  } else {
    const double w = mult * std::pow(nu, m.scaling.exponent);
    out.mu = m.beta_star * m.n * nu;
    out.sigma = m.sigma_eps * std::sqrt(m.n * nu);
    out.d = m.n * nu + m.lambda2 * w;
    out.lambda = m.lambda1 * w;
  }
  out.theta = -out.mu - out.lambda;
  out.gamma = out.mu - out.lambda;
  return out;
}

/// E ST_lambda(Z) for Z ~ N(mu, sigma^2); sigma = 0 gives ST_lambda(mu).
inline double st_mean(const Moments& m) {
  if (m.sigma <= 0.0) return soft_threshold(m.mu, m.lambda);
  const double s = m.sigma;
  const double t = m.theta / s;
  const double g = m.gamma / s;
  return -m.theta * std_normal_cdf(t) - s * std_normal_pdf(t) + m.gamma * std_normal_cdf(g) +
         s * std_normal_pdf(g);
}

/// E ST_lambda(Z)^2.
inline double st_second_moment(const Moments& m) {
  if (m.sigma <= 0.0) {
    const double v = soft_threshold(m.mu, m.lambda);
    return v * v;
  }
  const double s = m.sigma;
  auto tail = [s](double a) {
    const double z = a / s;
    return (a * a + s * s) * std_normal_cdf(z) + a * s * std_normal_pdf(z);
  };
  return tail(m.theta) + tail(m.gamma);
}

inline double st_variance(const Moments& m) {
  if (m.sigma <= 0.0) return 0.0;
  const double mean = st_mean(m);
  return std::max(0.0, st_second_moment(m) - mean * mean);
}

inline double expected_estimate(const BinaryFeatureModel& model) {
  const Moments m = moments(model);
  return st_mean(m) / m.d;
}

inline double estimator_bias(const BinaryFeatureModel& model) {
  return expected_estimate(model) - model.beta_star;
}

inline double estimator_variance(const BinaryFeatureModel& model) {
  const Moments m = moments(model);
  return st_variance(m) / (m.d * m.d);
}

inline double estimator_mse(const BinaryFeatureModel& model) {
  const double b = estimator_bias(model);
  return b * b + estimator_variance(model);
}

/// Estimate with sigma_eps = 0.
inline double noiseless_estimate(BinaryFeatureModel model) {
  if (model.sigma_eps != 0.0) throw DomainError("noiseless_estimate requires sigma_eps = 0");
  const Moments m = moments(model);
  return soft_threshold(m.mu, m.lambda) / m.d;
}

/// Probability that the fitted coefficient is non-zero. Independent of lambda2.
inline double selection_probability(const BinaryFeatureModel& model) {
  model.validate();
  if (!(model.sigma_eps > 0.0)) throw DomainError("selection_probability requires sigma_eps > 0");
  if (!(model.lambda1 > 0.0)) throw DomainError("selection_probability requires lambda1 > 0");
  const double nu = model.nu();
  const double signal = model.beta_star * model.n * std::sqrt(nu);
  const double thresh = model.multiplier() * model.lambda1 * std::pow(nu, model.scaling.exponent - 0.5);
  const double scale = model.sigma_eps * std::sqrt(model.n);
  return std_normal_cdf((signal - thresh) / scale) + std_normal_cdf((-signal - thresh) / scale);
}

/// A limit that is either a finite number or +infinity.
struct LimitValue {
  bool infinite = false;
  double value = 0.0;

  static LimitValue finite(double v) { return {false, v}; }
  static LimitValue infinity() { return {true, 0.0}; }
  bool operator==(const LimitValue&) const = default;
  std::string str() const { return infinite ? std::string("inf") : std::to_string(value); }
};

struct AsymptoticLimits {
  double mean_limit;
  LimitValue variance_limit;
  std::optional<double> selection_limit;  // absent when lambda1 = 0
};

namespace detail {

inline int compare_half(double x, double ref) { return x < ref ? -1 : (x > ref ? 1 : 0); }

// Unanchored delta-mode limits with effective penalties l1, l2.
inline AsymptoticLimits delta_limits(double beta, double n, double sigma, double l1, double l2, double delta) {
  AsymptoticLimits out{};
  switch (compare_half(delta, 0.5)) {
    case -1: out.mean_limit = 0.0; break;
    case 0: out.mean_limit = 2.0 * n * beta / (n + l2) * std_normal_cdf(-l1 / (sigma * std::sqrt(n))); break;
    default: out.mean_limit = beta; break;
  }
  if (l1 > 0.0) {
    out.variance_limit = delta < 0.5 ? LimitValue::finite(0.0) : LimitValue::infinity();
    switch (compare_half(delta, 0.5)) {
      case -1: out.selection_limit = 0.0; break;
      case 0: out.selection_limit = 2.0 * std_normal_cdf(-l1 / (sigma * std::sqrt(n))); break;
      default: out.selection_limit = 1.0; break;
    }
  } else if (l2 > 0.0) {
    switch (compare_half(delta, 0.25)) {
      case -1: out.variance_limit = LimitValue::finite(0.0); break;
      case 0: out.variance_limit = LimitValue::finite(sigma * sigma * n / (l2 * l2)); break;
      default: out.variance_limit = LimitValue::infinity(); break;
    }
  } else {
    throw UnsupportedError("no limit result covers lambda1 = lambda2 = 0");
  }
  return out;
}

}  // namespace detail

/// Limits of mean, variance and selection probability as q -> 1.
inline AsymptoticLimits asymptotic_limits(const BinaryFeatureModel& model) {
  if (!(model.sigma_eps > 0.0)) throw UnsupportedError("limit results assume sigma_eps > 0");
  if (!(model.n > 0.0)) throw DomainError("n must be positive");
  if (!(model.lambda1 >= 0.0) || !(model.lambda2 >= 0.0)) throw DomainError("penalties must be non-negative");
  if (!(model.scaling.exponent >= 0.0)) throw DomainError("scaling exponent must be non-negative");
  if (model.lambda1 == 0.0 && model.lambda2 == 0.0) {
    throw UnsupportedError("no limit result covers lambda1 = lambda2 = 0");
  }
  const double m = model.multiplier();
  const double e = model.scaling.exponent;
  const double b = model.beta_star;
  const double n = model.n;
  const double se = model.sigma_eps;
  if (model.scaling.mode == Scaling::Mode::Delta) {
    return detail::delta_limits(b, n, se, m * model.lambda1, m * m * model.lambda2, e);
  }
  const double l1 = m * model.lambda1;
  const double l2 = m * model.lambda2;
  // Pure lasso and pure ridge weighting coincide with delta scaling.
  if (l2 == 0.0) return detail::delta_limits(b, n, se, l1, 0.0, e);
  if (l1 == 0.0) return detail::delta_limits(b, n, se, 0.0, l2, 0.5 * e);
  AsymptoticLimits out{};
  switch (detail::compare_half(e, 1.0)) {
    case -1: out.mean_limit = 0.0; break;
    case 0: out.mean_limit = b * n / (n + l2); break;
    default: out.mean_limit = b; break;
  }
  out.variance_limit = e < 0.5 ? LimitValue::finite(0.0) : LimitValue::infinity();
  switch (detail::compare_half(e, 0.5)) {
    case -1: out.selection_limit = 0.0; break;
    case 0: out.selection_limit = 2.0 * std_normal_cdf(-l1 / (se * std::sqrt(n))); break;
    default: out.selection_limit = 1.0; break;
  }
  return out;
}

struct GumbelApprox {
  double a_n;
  double b_n;
  double mean_approx;
};

/// Gumbel location/scale for the maximum of n folded normals |N(mu, sigma^2)|.
inline GumbelApprox maxabs_gumbel(double mu, double sigma, long n) {
  if (n < 2) throw DomainError("maxabs_gumbel requires n >= 2");
  const double nd = static_cast<double>(n);
  const double b = folded_normal_quantile(1.0 - 1.0 / nd, mu, sigma);
  const double a = 1.0 / (nd * folded_normal_pdf(b, mu, sigma));
  return {a, b, b + kEulerGamma * a};
}

/// Correlation between X and 1[Y > Phi^-1(q)] for standard normals with corr rho.
inline double dichotomized_corr(double rho, double q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("dichotomized_corr: q must lie in (0, 1)");
  const double alpha = std_normal_quantile(q);
  return rho * std_normal_pdf(alpha) / std::sqrt(q * (1.0 - q));
}

/// Correlation between a continuous X and a Bernoulli(p) variable.
inline double bernoulli_cont_corr(double mu1, double mu0, double sigma_x, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("bernoulli_cont_corr: p must lie in (0, 1)");
  if (!(sigma_x > 0.0)) throw DomainError("bernoulli_cont_corr: sigma_x must be positive");
  return (mu1 - mu0) / sigma_x * std::sqrt(p * (1.0 - p));
}

struct CorrBounds {
  double rho_min;
  double rho_max;
};

/// Attainable correlation range between Bernoulli(p) and Bernoulli(q).
inline CorrBounds bernoulli_corr_bounds(double p, double q) {
  if (!(p > 0.0 && p < 1.0) || !(q > 0.0 && q < 1.0)) {
    throw DomainError("bernoulli_corr_bounds: probabilities must lie in (0, 1)");
  }
  const double denom = std::sqrt(p * (1.0 - p) * q * (1.0 - q));
  return {(std::max(0.0, p + q - 1.0) - p * q) / denom, (std::min(p, q) - p * q) / denom};
}

}  // namespace normreg::oracle
