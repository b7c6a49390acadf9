#pragma once

// Cyclic coordinate descent for the weighted elastic net
//
//   1/2 ||y - b0 - X b||^2 + l1 sum_j u_j |b_j| + l2/2 sum_j v_j b_j^2
//
// on an already normalized design.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "normreg/core/dataset.hpp"
#include "normreg/error.hpp"
#include "normreg/normalize.hpp"

namespace normreg {

inline double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

struct PenaltySpec {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  Vector u;  // l1 weights, empty means all ones
  Vector v;  // l2 weights, empty means all ones

  static PenaltySpec elastic_net(double l1, double l2) { return {l1, l2, {}, {}}; }
  static PenaltySpec lasso(double l1) { return {l1, 0.0, {}, {}}; }
  static PenaltySpec ridge(double l2) { return {0.0, l2, {}, {}}; }
  /// Mixing form l1 = alpha * lambda, l2 = (1 - alpha) * lambda.
  static PenaltySpec mixing(double alpha, double lambda) {
    return {alpha * lambda, (1.0 - alpha) * lambda, {}, {}};
  }

  double u_at(Index j) const { return u.size() == 0 ? 1.0 : u(j); }
  double v_at(Index j) const { return v.size() == 0 ? 1.0 : v(j); }

  void validate(Index n, Index p) const {
    if (!(lambda1 >= 0.0) || !std::isfinite(lambda1)) throw DomainError("lambda1 must be a finite non-negative value");
    if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) throw DomainError("lambda2 must be a finite non-negative value");
    if (u.size() != 0 && u.size() != p) throw DimensionError("penalty weights u do not match the number of columns");
    if (v.size() != 0 && v.size() != p) throw DimensionError("penalty weights v do not match the number of columns");
    if (u.size() != 0 && !(u.array() > 0.0).all()) throw DomainError("penalty weights u must be positive");
    if (v.size() != 0 && !(v.array() > 0.0).all()) throw DomainError("penalty weights v must be positive");
    if (lambda1 == 0.0 && lambda2 == 0.0 && p >= n) {
      throw DomainError("unpenalized fit is undefined when p >= n");
    }
  }
};

struct FitOptions {
  double tolerance = 1e-8;
  long max_sweeps = 100000;
  bool fit_intercept = true;
  bool record_objective = false;
};

struct FitResult {
  Vector beta_norm;
  double intercept_norm = 0.0;
  Vector beta;
  double intercept = 0.0;
  long sweeps_used = 0;
  bool converged = false;
  double max_change = 0.0;
  double objective_value = 0.0;
  std::vector<double> objective_trace;

  std::vector<Index> support() const {
    std::vector<Index> s;
    for (Index j = 0; j < beta_norm.size(); ++j) {
      if (beta_norm(j) != 0.0) s.push_back(j);
    }
    return s;
  }
};

namespace detail {

inline void check_finite(const Matrix& x, const Vector& y) {
  if (!x.allFinite()) throw DomainError("design matrix contains NaN or infinite values");
  if (!y.allFinite()) throw DomainError("response contains NaN or infinite values");
}

inline double objective(const Vector& r, const Vector& beta, const PenaltySpec& pen) {
  double l1 = 0.0;
  double l2 = 0.0;
  for (Index j = 0; j < beta.size(); ++j) {
    l1 += pen.u_at(j) * std::abs(beta(j));
    l2 += pen.v_at(j) * beta(j) * beta(j);
  }
  return 0.5 * r.squaredNorm() + pen.lambda1 * l1 + 0.5 * pen.lambda2 * l2;
}

inline bool columns_centered(const Matrix& x) {
  for (Index j = 0; j < x.cols(); ++j) {
    const double scale = x.col(j).cwiseAbs().maxCoeff();
    if (std::abs(x.col(j).mean()) > 1e-12 * (1.0 + scale)) return false;
  }
  return true;
}

}  // namespace detail

/// Coordinate descent on (x, y). `warm` optionally supplies starting coefficients.
inline FitResult fit(const Matrix& x, const Vector& y, const PenaltySpec& pen, const FitOptions& opts,
                     const Vector* warm = nullptr) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (y.size() != n) throw DimensionError("design rows do not match response length");
  if (!(opts.tolerance > 0.0)) throw DomainError("tolerance must be positive");
  if (opts.max_sweeps < 1) throw DomainError("max_sweeps must be positive");
  detail::check_finite(x, y);
  pen.validate(n, p);

  Vector xtx = x.colwise().squaredNorm().transpose();
  Vector beta = Vector::Zero(p);
  if (warm != nullptr) {
    if (warm->size() != p) throw DimensionError("warm start length does not match the number of columns");
    beta = *warm;
  }
  const bool centered = opts.fit_intercept && detail::columns_centered(x);
  double b0 = 0.0;
  Vector r = y - x * beta;
  if (opts.fit_intercept) {
    b0 = centered ? y.mean() : r.mean();
    r.array() -= b0;
  }

  FitResult out;
  if (opts.record_objective) out.objective_trace.push_back(detail::objective(r, beta, pen));

  std::vector<char> active(static_cast<std::size_t>(p), 0);
  auto sweep = [&](bool full) {
    double change = 0.0;
    for (Index j = 0; j < p; ++j) {
      if (!full && !active[static_cast<std::size_t>(j)]) continue;
      const double denom = xtx(j) + pen.lambda2 * pen.v_at(j);
      if (denom == 0.0) continue;
      const double old = beta(j);
      const double z = x.col(j).dot(r) + xtx(j) * old;
      const double next = soft_threshold(z, pen.lambda1 * pen.u_at(j)) / denom;
      if (next != old) {
        r.noalias() -= (next - old) * x.col(j);
        beta(j) = next;
        change = std::max(change, std::abs(next - old));
      }
      if (next != 0.0) active[static_cast<std::size_t>(j)] = 1;
    }
    if (opts.fit_intercept && !centered) {
      const double shift = r.mean();
      b0 += shift;
      r.array() -= shift;
      change = std::max(change, std::abs(shift));
    }
    ++out.sweeps_used;
    out.max_change = change;
    if (opts.record_objective) out.objective_trace.push_back(detail::objective(r, beta, pen));
    return change;
  };

  while (out.sweeps_used < opts.max_sweeps) {
    if (sweep(true) <= opts.tolerance) {
      out.converged = true;
      break;
    }
    while (out.sweeps_used < opts.max_sweeps && sweep(false) > opts.tolerance) {
    }
  }

  out.beta_norm = beta;
  out.intercept_norm = b0;
  out.beta = beta;
  out.intercept = b0;
  out.objective_value = detail::objective(r, beta, pen);
  return out;
}

inline FitResult fit(const Dataset& data_norm, const PenaltySpec& pen, const FitOptions& opts = {}) {
  return fit(data_norm.x(), data_norm.y(), pen, opts);
}

/// Fits normalized data and reports original-scale coefficients through `plan`.
inline FitResult fit(const Dataset& data_norm, const PenaltySpec& pen, const FitOptions& opts,
                     const NormalizationPlan& plan) {
  FitResult r = fit(data_norm, pen, opts);
  const Coefficients back = backtransform(r.beta_norm, r.intercept_norm, plan);
  r.beta = back.beta;
  r.intercept = back.intercept;
  return r;
}

/// Closed form for a design whose centered columns are mutually orthogonal.
inline Coefficients orthogonal_solution(const Vector& xty, const Vector& xtx_diag, const PenaltySpec& pen,
                                        double ybar) {
  if (xty.size() != xtx_diag.size()) throw DimensionError("orthogonal_solution: length mismatch");
  Coefficients out;
  out.beta.resize(xty.size());
  for (Index j = 0; j < xty.size(); ++j) {
    out.beta(j) = soft_threshold(xty(j), pen.lambda1 * pen.u_at(j)) /
                  (xtx_diag(j) + pen.lambda2 * pen.v_at(j));
  }
  out.intercept = ybar;
  return out;
}

/// Smallest l1 penalty giving the all-zero coefficient vector.
inline double lambda_max(const Matrix& x, const Vector& y, const Vector& u = {}, bool intercept = true) {
  if (y.size() != x.rows()) throw DimensionError("design rows do not match response length");
  if (x.cols() == 0 || x.isZero(0.0)) throw DomainError("lambda_max: design matrix is all zeros");
  if (u.size() != 0 && u.size() != x.cols()) throw DimensionError("lambda_max: weight length mismatch");
  Vector r = y;
  if (intercept) r.array() -= y.mean();
  double best = 0.0;
  bool any = false;
  for (Index j = 0; j < x.cols(); ++j) {
    const double w = u.size() == 0 ? 1.0 : u(j);
    if (w <= 0.0) continue;
    any = true;
    best = std::max(best, std::abs(x.col(j).dot(r)) / w);
  }
  if (!any) throw DomainError("lambda_max: at least one penalty weight must be positive");
  return best;
}

inline double lambda_max(const Dataset& data_norm, const Vector& u = {}, bool intercept = true) {
  return lambda_max(data_norm.x(), data_norm.y(), u, intercept);
}

struct PathShape {
  enum class Kind { Mixing, FixedLambda2 } kind = Kind::Mixing;
  double alpha = 1.0;    // Mixing: l1 = alpha * lambda, l2 = (1 - alpha) * lambda
  double lambda2 = 0.0;  // FixedLambda2: l1 = lambda
};

struct PathGrid {
  int count = 100;
  double ratio = 1e-2;
  std::optional<double> start;  // defaults to the value where the first feature enters
};

struct PathPoint {
  double lambda;
  PenaltySpec penalty;
  FitResult fit;
};

/// Log-spaced decreasing grid from `start` to `start * ratio`.
inline std::vector<double> log_grid(double start, double ratio, int count) {
  if (count < 2) throw DomainError("path grid needs at least two points");
  if (!(ratio > 0.0 && ratio < 1.0)) throw DomainError("path grid ratio must lie in (0, 1)");
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    g[static_cast<std::size_t>(k)] = start * std::pow(ratio, static_cast<double>(k) / (count - 1));
  }
  return g;
}

/// Warm-started fits along a decreasing penalty grid.
inline std::vector<PathPoint> fit_path(const Dataset& data_norm, const PathShape& shape, const PathGrid& grid,
                                       const FitOptions& opts = {}, const Vector& u = {}, const Vector& v = {}) {
  double start = 0.0;
  if (grid.start) {
    start = *grid.start;
  } else {
    start = lambda_max(data_norm.x(), data_norm.y(), u, opts.fit_intercept);
    if (shape.kind == PathShape::Kind::Mixing && shape.alpha > 0.0) start /= shape.alpha;
  }
  if (shape.kind == PathShape::Kind::Mixing && !(shape.alpha >= 0.0 && shape.alpha <= 1.0)) {
    throw DomainError("mixing parameter alpha must lie in [0, 1]");
  }
  std::vector<PathPoint> path;
  Vector warm = Vector::Zero(data_norm.cols());
  for (double lambda : log_grid(start, grid.ratio, grid.count)) {
    PenaltySpec pen;
    if (shape.kind == PathShape::Kind::Mixing) {
      pen = PenaltySpec::mixing(shape.alpha, lambda);
    } else {
      pen = PenaltySpec::elastic_net(lambda, shape.lambda2);
    }
    pen.u = u;
    pen.v = v;
    FitResult r = fit(data_norm.x(), data_norm.y(), pen, opts, &warm);
    warm = r.beta_norm;
    path.push_back({lambda, pen, std::move(r)});
  }
  return path;
}

}  // namespace normreg
