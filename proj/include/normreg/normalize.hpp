#pragma once

// Feature normalization x~_ij = (x_ij - c_j) / s_j.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <concepts>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "normreg/core/dataset.hpp"
#include "normreg/error.hpp"

namespace normreg {

/// Anything exposing rows(), cols(), element access and per-column kinds.
template <class S>
concept ColumnSource = requires(const S& s, Index i, Index j) {
  { s.rows() } -> std::convertible_to<Index>;
  { s.cols() } -> std::convertible_to<Index>;
  { s(i, j) } -> std::convertible_to<double>;
  { s.kind(j) } -> std::convertible_to<FeatureKind>;
};

struct ClassBalance {
  double q;
  double nu;  // q - q^2
};

template <class Col>
ClassBalance class_balance(const Col& x) {
  const Index n = static_cast<Index>(x.size());
  if (n == 0) throw DimensionError("class_balance: empty column");
  double ones = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (x[i] == 1.0) {
      ones += 1.0;
    } else if (x[i] != 0.0) {
      throw DomainError("class_balance: column holds a value other than 0 and 1");
    }
  }
  const double q = ones / static_cast<double>(n);
  return {q, q - q * q};
}

inline ClassBalance class_balance(const std::vector<double>& x) {
  return class_balance(Eigen::Map<const Vector>(x.data(), static_cast<Index>(x.size())));
}

enum class StrategyKind { None, Standardize, L1Centered, MaxAbs, MinMax, Robust, BinaryDelta, PerFeature };

enum class PenaltyKind { Plain, LassoComparable, RidgeComparable };

struct BinaryDeltaParams {
  double delta = 1.0;
  double kappa = 2.0;
  double q0 = 0.5;
  PenaltyKind penalty = PenaltyKind::LassoComparable;
};

class NormalizationStrategy {
 public:
  NormalizationStrategy() = default;
  explicit NormalizationStrategy(StrategyKind kind) : kind_(kind) {
    if (kind == StrategyKind::BinaryDelta || kind == StrategyKind::PerFeature) {
      throw DomainError("use the dedicated factory for binary-delta and per-feature strategies");
    }
  }

  static NormalizationStrategy none() { return NormalizationStrategy(StrategyKind::None); }
  static NormalizationStrategy standardize() { return NormalizationStrategy(StrategyKind::Standardize); }
  static NormalizationStrategy l1() { return NormalizationStrategy(StrategyKind::L1Centered); }
  static NormalizationStrategy max_abs() { return NormalizationStrategy(StrategyKind::MaxAbs); }
  static NormalizationStrategy min_max() { return NormalizationStrategy(StrategyKind::MinMax); }
  static NormalizationStrategy robust() { return NormalizationStrategy(StrategyKind::Robust); }

  static NormalizationStrategy binary_delta(BinaryDeltaParams params) {
    if (!(params.delta >= 0.0)) throw DomainError("binary-delta: delta must be non-negative");
    if (!(params.kappa > 0.0)) throw DomainError("binary-delta: kappa must be positive");
    if (!(params.q0 > 0.0 && params.q0 < 1.0)) throw DomainError("binary-delta: q0 must lie in (0, 1)");
    NormalizationStrategy s;
    s.kind_ = StrategyKind::BinaryDelta;
    s.delta_ = params;
    return s;
  }

  static NormalizationStrategy per_feature(std::vector<NormalizationStrategy> columns) {
    for (const auto& c : columns) {
      if (c.kind() == StrategyKind::PerFeature) {
        throw DomainError("per-feature strategies cannot be nested");
      }
    }
    NormalizationStrategy s;
    s.kind_ = StrategyKind::PerFeature;
    s.columns_ = std::move(columns);
    return s;
  }

  /// Per-feature strategy choosing by column kind.
  template <ColumnSource S>
  static NormalizationStrategy by_kind(const S& data, const NormalizationStrategy& binary,
                                       const NormalizationStrategy& continuous) {
    std::vector<NormalizationStrategy> cols;
    cols.reserve(static_cast<std::size_t>(data.cols()));
    for (Index j = 0; j < data.cols(); ++j) {
      cols.push_back(data.kind(j) == FeatureKind::Binary ? binary : continuous);
    }
    return per_feature(std::move(cols));
  }

  StrategyKind kind() const noexcept { return kind_; }
  const BinaryDeltaParams& delta_params() const noexcept { return delta_; }
  const std::vector<NormalizationStrategy>& columns() const noexcept { return columns_; }

  std::string name() const;

 private:
  StrategyKind kind_ = StrategyKind::None;
  BinaryDeltaParams delta_{};
  std::vector<NormalizationStrategy> columns_;
};

inline const char* to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::None: return "none";
    case StrategyKind::Standardize: return "std";
    case StrategyKind::L1Centered: return "l1";
    case StrategyKind::MaxAbs: return "maxabs";
    case StrategyKind::MinMax: return "minmax";
    case StrategyKind::Robust: return "robust";
    case StrategyKind::BinaryDelta: return "binary-delta";
    case StrategyKind::PerFeature: return "per-feature";
  }
  return "unknown";
}

inline const char* to_string(PenaltyKind k) {
  switch (k) {
    case PenaltyKind::Plain: return "plain";
    case PenaltyKind::LassoComparable: return "lasso";
    case PenaltyKind::RidgeComparable: return "ridge";
  }
  return "unknown";
}

inline std::string NormalizationStrategy::name() const {
  if (kind_ == StrategyKind::BinaryDelta) {
    return std::string("binary-delta(delta=") + std::to_string(delta_.delta) +
           ",kappa=" + std::to_string(delta_.kappa) + ",q0=" + std::to_string(delta_.q0) +
           ",penalty=" + to_string(delta_.penalty) + ")";
  }
  return to_string(kind_);
}

/// Parses the CLI-facing names none|std|l1|maxabs|minmax|robust|binary-delta.
inline StrategyKind parse_strategy_kind(std::string_view name) {
  for (auto k : {StrategyKind::None, StrategyKind::Standardize, StrategyKind::L1Centered,
                 StrategyKind::MaxAbs, StrategyKind::MinMax, StrategyKind::Robust,
                 StrategyKind::BinaryDelta}) {
    if (name == to_string(k)) return k;
  }
  throw DomainError("unknown normalization strategy '" + std::string(name) +
                    "' (expected none|std|l1|maxabs|minmax|robust|binary-delta)");
}

inline PenaltyKind parse_penalty_kind(std::string_view name) {
  for (auto k : {PenaltyKind::Plain, PenaltyKind::LassoComparable, PenaltyKind::RidgeComparable}) {
    if (name == to_string(k)) return k;
  }
  throw DomainError("unknown binary-delta penalty kind '" + std::string(name) +
                    "' (expected plain|lasso|ridge)");
}

/// Scale of a binary feature with variance nu under the delta family.
inline double binary_delta_scale(double nu, const BinaryDeltaParams& p) {
  const double base = std::pow(nu, p.delta);
  const double nu0 = p.q0 - p.q0 * p.q0;
  switch (p.penalty) {
    case PenaltyKind::Plain: return base;
    case PenaltyKind::LassoComparable: return p.kappa * std::pow(nu0, 1.0 - p.delta) * base;
    case PenaltyKind::RidgeComparable: return std::pow(nu0, 0.5 - p.delta) * base;
  }
  return base;
}

struct NormalizationPlan {
  Vector c;
  Vector s;
  NormalizationStrategy strategy;

  Index size() const noexcept { return c.size(); }

  static NormalizationPlan identity(Index p) {
    return {Vector::Zero(p), Vector::Ones(p), NormalizationStrategy::none()};
  }
};

namespace detail {

inline double mean_of(const std::vector<double>& x) {
  double sum = 0.0;
  for (double v : x) sum += v;
  return sum / static_cast<double>(x.size());
}

/// Linear interpolation between order statistics, position (n - 1) * prob.
inline double sorted_quantile(const std::vector<double>& sorted, double prob) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline std::pair<double, double> column_factors(const std::vector<double>& x, FeatureKind kind,
                                                const NormalizationStrategy& st, Index j) {
  const double n = static_cast<double>(x.size());
  switch (st.kind()) {
    case StrategyKind::None: return {0.0, 1.0};
    case StrategyKind::Standardize: {
      const double c = mean_of(x);
      double ss = 0.0;
      for (double v : x) ss += (v - c) * (v - c);
      return {c, std::sqrt(ss / n)};
    }
    case StrategyKind::L1Centered: {
      const double c = mean_of(x);
      double sa = 0.0;
      for (double v : x) sa += std::abs(v - c);
      return {c, sa / std::sqrt(n)};
    }
    case StrategyKind::MaxAbs: {
      double m = 0.0;
      for (double v : x) m = std::max(m, std::abs(v));
      return {0.0, m};
    }
    case StrategyKind::MinMax: {
      const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
      return {*lo, *hi - *lo};
    }
    case StrategyKind::Robust: {
      std::vector<double> sorted = x;
      std::sort(sorted.begin(), sorted.end());
      return {sorted_quantile(sorted, 0.5),
              sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25)};
    }
    case StrategyKind::BinaryDelta: {
      if (kind != FeatureKind::Binary) {
        throw KindMismatchError("column " + std::to_string(j) +
                                " is continuous; binary-delta scaling applies to binary columns only");
      }
      const ClassBalance b = class_balance(x);
      return {b.q, b.nu == 0.0 ? 0.0 : binary_delta_scale(b.nu, st.delta_params())};
    }
    case StrategyKind::PerFeature: break;
  }
  throw DomainError("per-feature strategies cannot be nested");
}

}  // namespace detail

/// Centering and scaling factors for each column of `data`.
template <ColumnSource S>
NormalizationPlan compute_plan(const S& data, const NormalizationStrategy& strategy) {
  const Index n = data.rows();
  const Index p = data.cols();
  if (n == 0) throw DimensionError("compute_plan: dataset has no rows");
  if (strategy.kind() == StrategyKind::PerFeature &&
      static_cast<Index>(strategy.columns().size()) != p) {
    throw DimensionError("per-feature strategy lists " + std::to_string(strategy.columns().size()) +
                         " entries for " + std::to_string(p) + " columns");
  }
  NormalizationPlan plan{Vector(p), Vector(p), strategy};
  std::vector<double> col(static_cast<std::size_t>(n));
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = data(i, j);
    const NormalizationStrategy& st =
        strategy.kind() == StrategyKind::PerFeature ? strategy.columns()[static_cast<std::size_t>(j)]
                                                    : strategy;
    const auto [c, s] = detail::column_factors(col, data.kind(j), st, j);
    if (!(s > 0.0)) {
      std::string name;
      if constexpr (requires { data.name(j); }) name = data.name(j);
      throw ZeroScaleError(static_cast<std::size_t>(j), name);
    }
    plan.c(j) = c;
    plan.s(j) = s;
  }
  return plan;
}

/// Transforms a design matrix column by column.
inline Matrix apply(const Matrix& x, const NormalizationPlan& plan) {
  if (x.cols() != plan.size()) {
    throw DimensionError("plan has " + std::to_string(plan.size()) + " columns but data has " +
                         std::to_string(x.cols()));
  }
  Matrix out(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    out.col(j) = (x.col(j).array() - plan.c(j)) / plan.s(j);
  }
  return out;
}

inline Dataset apply(const Dataset& data, const NormalizationPlan& plan) {
  return Dataset::transformed(apply(data.x(), plan), data.y(), data.kinds(), data.names());
}

struct Coefficients {
  Vector beta;
  double intercept = 0.0;
};

/// Maps coefficients fitted on normalized data back to the original scale.
inline Coefficients backtransform(const Vector& beta_norm, double intercept_norm,
                                  const NormalizationPlan& plan) {
  if (beta_norm.size() != plan.size()) {
    throw DimensionError("backtransform: coefficient vector length does not match the plan");
  }
  Coefficients out;
  out.beta = beta_norm.array() / plan.s.array();
  out.intercept = intercept_norm - plan.c.dot(out.beta);
  return out;
}

enum class InteractionPolicy { CenterBoth, RawProduct };

/// Elementwise product of two columns, optionally after mean-centering both.
template <class A, class B>
Vector make_interaction(const A& x1, const B& x2, InteractionPolicy policy) {
  if (x1.size() != x2.size()) throw DimensionError("make_interaction: columns differ in length");
  Vector a = x1;
  Vector b = x2;
  if (policy == InteractionPolicy::CenterBoth) {
    a.array() -= a.mean();
    b.array() -= b.mean();
  }
  return a.cwiseProduct(b);
}

/// Scale for a centered interaction between two normalized features.
inline double interaction_scale(double s1, double s2) { return s1 * s2; }

/// Scale for binary(q) x normal(sigma) under the lasso-comparable delta family.
inline double interaction_scale_binary_normal(double sigma, double q, const BinaryDeltaParams& p) {
  return interaction_scale(binary_delta_scale(q - q * q, p), sigma);
}

/// Scale for binary(q1) x binary(q2) under the plain delta family.
inline double interaction_scale_binary_binary(double q1, double q2, double delta) {
  return std::pow((q1 - q1 * q1) * (q2 - q2 * q2), delta);
}

}  // namespace normreg
