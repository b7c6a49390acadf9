#pragma once

// Prediction metrics, support metrics and repeated k-fold cross-validation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "normreg/core/dataset.hpp"
#include "normreg/core/parallel.hpp"
#include "normreg/core/random.hpp"
#include "normreg/error.hpp"
#include "normreg/normalize.hpp"
#include "normreg/solver.hpp"

namespace normreg {

/// Mean squared error divided by the (uncorrected) variance of y_true.
inline double nmse(const Vector& y_true, const Vector& y_pred) {
  if (y_true.size() != y_pred.size()) throw DimensionError("nmse: length mismatch");
  if (y_true.size() < 2) throw DomainError("nmse: need at least two observations");
  const double var = (y_true.array() - y_true.mean()).square().mean();
  if (!(var > 0.0)) throw DomainError("nmse: true response has zero variance");
  return (y_true - y_pred).squaredNorm() / static_cast<double>(y_true.size()) / var;
}

/// Share of selected features that are not true signals.
inline double fdr(const std::vector<Index>& support, const std::vector<Index>& truth) {
  const std::set<Index> t(truth.begin(), truth.end());
  std::size_t false_hits = 0;
  for (Index j : support) false_hits += t.count(j) == 0;
  return static_cast<double>(false_hits) / static_cast<double>(std::max<std::size_t>(1, support.size()));
}

/// 1 when every true signal is selected, else 0.
inline int power_all(const std::vector<Index>& support, const std::vector<Index>& truth) {
  if (truth.empty()) return 0;
  const std::set<Index> s(support.begin(), support.end());
  for (Index j : truth) {
    if (s.count(j) == 0) return 0;
  }
  return 1;
}

/// Rows (and optionally columns) of any column source.
template <ColumnSource S>
class SubsetView {
 public:
  SubsetView(const S& data, const std::vector<Index>& rows, const std::vector<Index>* cols = nullptr)
      : data_(&data), rows_(&rows), cols_(cols) {}

  Index rows() const noexcept { return static_cast<Index>(rows_->size()); }
  Index cols() const noexcept { return cols_ ? static_cast<Index>(cols_->size()) : data_->cols(); }
  double operator()(Index i, Index j) const { return (*data_)((*rows_)[static_cast<std::size_t>(i)], column(j)); }
  FeatureKind kind(Index j) const { return data_->kind(column(j)); }

 private:
  Index column(Index j) const { return cols_ ? (*cols_)[static_cast<std::size_t>(j)] : j; }

  const S* data_;
  const std::vector<Index>* rows_;
  const std::vector<Index>* cols_;
};

/// A normalization fitted on training rows; constant training columns are dropped.
struct TrainedNormalization {
  std::vector<Index> kept;
  NormalizationPlan plan;
  Dataset train;  // normalized training rows restricted to `kept`
};

/// Reads only the listed rows of `data`.
template <ColumnSource S>
  requires requires(const S& s) { { s.y() } -> std::convertible_to<const Vector&>; }
TrainedNormalization normalize_training(const S& data, const std::vector<Index>& rows,
                                        const NormalizationStrategy& strategy) {
  if (rows.empty()) throw DimensionError("normalize_training: no training rows");
  const SubsetView<S> all(data, rows);
  TrainedNormalization out;
  for (Index j = 0; j < all.cols(); ++j) {
    const double first = all(0, j);
    for (Index i = 1; i < all.rows(); ++i) {
      if (all(i, j) != first) {
        out.kept.push_back(j);
        break;
      }
    }
  }
  NormalizationStrategy st = strategy;
  if (strategy.kind() == StrategyKind::PerFeature) {
    std::vector<NormalizationStrategy> cols;
    for (Index j : out.kept) cols.push_back(strategy.columns()[static_cast<std::size_t>(j)]);
    st = NormalizationStrategy::per_feature(std::move(cols));
  }
  const SubsetView<S> view(data, rows, &out.kept);
  out.plan = compute_plan(view, st);
  Matrix x(view.rows(), view.cols());
  Vector y(view.rows());
  const Vector& y_all = data.y();
  for (Index i = 0; i < view.rows(); ++i) {
    y(i) = y_all(rows[static_cast<std::size_t>(i)]);
    for (Index j = 0; j < view.cols(); ++j) x(i, j) = (view(i, j) - out.plan.c(j)) / out.plan.s(j);
  }
  std::vector<FeatureKind> kinds;
  for (Index j : out.kept) kinds.push_back(data.kind(j));
  out.train = Dataset::transformed(std::move(x), std::move(y), std::move(kinds), {});
  return out;
}

/// Original-scale predictions for `rows` from a fit on the kept columns.
inline Vector predict_rows(const Dataset& data, const std::vector<Index>& rows, const TrainedNormalization& tn,
                           const Vector& beta_norm, double intercept_norm) {
  const Coefficients c = backtransform(beta_norm, intercept_norm, tn.plan);
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double v = c.intercept;
    for (std::size_t k = 0; k < tn.kept.size(); ++k) v += data(rows[r], tn.kept[k]) * c.beta(static_cast<Index>(k));
    out(static_cast<Index>(r)) = v;
  }
  return out;
}

struct ModelSpec {
  enum class Kind { Lasso, Ridge, ElasticNet } kind = Kind::Lasso;
  double alpha = 1.0;  // ElasticNet only

  PathShape shape() const {
    switch (kind) {
      case Kind::Lasso: return {PathShape::Kind::Mixing, 1.0, 0.0};
      case Kind::Ridge: return {PathShape::Kind::Mixing, 0.0, 0.0};
      case Kind::ElasticNet: return {PathShape::Kind::Mixing, alpha, 0.0};
    }
    return {};
  }
  std::string name() const {
    switch (kind) {
      case Kind::Lasso: return "lasso";
      case Kind::Ridge: return "ridge";
      case Kind::ElasticNet: return "elnet(alpha=" + std::to_string(alpha) + ")";
    }
    return "unknown";
  }
};

struct CVPlan {
  int folds = 10;
  int repeats = 10;
  std::uint64_t seed = 1;
  PathGrid grid{};
  std::vector<NormalizationStrategy> strategies;
  std::vector<std::string> labels;  // one per strategy; defaults to the strategy name
  FitOptions fit{};
  unsigned threads = 1;
};

/// Default normalization grid: binary-delta for binary columns with the given
/// deltas, standardization for continuous ones.
template <ColumnSource S>
void add_delta_grid(CVPlan& plan, const S& data, const std::vector<double>& deltas = {0.0, 0.25, 0.5, 0.75, 1.0},
                    PenaltyKind penalty = PenaltyKind::LassoComparable) {
  while (plan.labels.size() < plan.strategies.size()) plan.labels.push_back(plan.strategies[plan.labels.size()].name());
  for (double d : deltas) {
    plan.strategies.push_back(NormalizationStrategy::by_kind(
        data, NormalizationStrategy::binary_delta({d, 2.0, 0.5, penalty}), NormalizationStrategy::standardize()));
    plan.labels.push_back("delta=" + std::to_string(d));
  }
}

struct CVRecord {
  int repeat;
  int fold;
  int lambda_index;
  double lambda;
  std::size_t normalization;
  double nmse;
};

struct CVResult {
  std::vector<CVRecord> records;
  std::vector<std::string> labels;
  std::vector<std::string> skipped;  // reasons, one per skipped fold
  std::size_t best_normalization = 0;
  int best_lambda_index = 0;
  double best_mean_nmse = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<double>> mean_nmse;  // [normalization][lambda index]
};

/// Fold id for each row: a seeded shuffle of 0, 1, ..., folds-1 repeated.
inline std::vector<int> fold_assignment(Index n, int folds, std::uint64_t seed, int repeat) {
  if (folds < 2) throw DomainError("cross-validation needs at least two folds");
  if (n < folds) throw DomainError("cross-validation needs at least as many rows as folds");
  std::vector<int> ids(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = static_cast<int>(i % folds);
  RandomStream r(seed, stream_key(0xC5, static_cast<std::uint64_t>(repeat)));
  r.shuffle(std::span<int>(ids));
  return ids;
}

/// Repeated k-fold cross-validation over normalizations and a penalty path.
/// The path for each training fold starts at that fold's lambda_max, so
/// lambda_index refers to the same fraction of lambda_max in every fold.
inline CVResult cross_validate(const Dataset& data, const CVPlan& plan, const ModelSpec& model) {
  if (plan.repeats < 1) throw DomainError("cross-validation needs at least one repeat");
  if (plan.strategies.empty()) throw DomainError("cross-validation needs at least one normalization");
  const std::size_t ns = plan.strategies.size();
  CVResult out;
  out.labels = plan.labels;
  for (std::size_t k = out.labels.size(); k < ns; ++k) out.labels.push_back(plan.strategies[k].name());

  struct Task {
    int repeat;
    int fold;
  };
  std::vector<Task> tasks;
  std::vector<std::vector<int>> assignments;
  for (int r = 0; r < plan.repeats; ++r) {
    assignments.push_back(fold_assignment(data.rows(), plan.folds, plan.seed, r));
    for (int f = 0; f < plan.folds; ++f) tasks.push_back({r, f});
  }
  std::vector<std::vector<CVRecord>> per_task(tasks.size());
  std::vector<std::string> skip(tasks.size());

  parallel_for(tasks.size(), plan.threads, [&](std::size_t t) {
    const auto& ids = assignments[static_cast<std::size_t>(tasks[t].repeat)];
    std::vector<Index> train, test;
    for (Index i = 0; i < data.rows(); ++i) {
      (ids[static_cast<std::size_t>(i)] == tasks[t].fold ? test : train).push_back(i);
    }
    Vector y_test(static_cast<Index>(test.size()));
    for (std::size_t k = 0; k < test.size(); ++k) y_test(static_cast<Index>(k)) = data.y()(test[k]);
    const double var = (y_test.array() - y_test.mean()).square().mean();
    if (test.size() < 2 || !(var > 0.0)) {
      skip[t] = "repeat " + std::to_string(tasks[t].repeat) + " fold " + std::to_string(tasks[t].fold) +
                ": held-out response has zero variance";
      return;
    }
    for (std::size_t s = 0; s < ns; ++s) {
      const TrainedNormalization tn = normalize_training(data, train, plan.strategies[s]);
      if (tn.kept.empty()) {
        skip[t] = "repeat " + std::to_string(tasks[t].repeat) + " fold " + std::to_string(tasks[t].fold) +
                  ": every training column is constant";
        per_task[t].clear();
        return;
      }
      const auto path = fit_path(tn.train, model.shape(), plan.grid, plan.fit);
      for (std::size_t k = 0; k < path.size(); ++k) {
        const Vector pred = predict_rows(data, test, tn, path[k].fit.beta_norm, path[k].fit.intercept_norm);
        per_task[t].push_back({tasks[t].repeat, tasks[t].fold, static_cast<int>(k), path[k].lambda, s,
                               nmse(y_test, pred)});
      }
    }
  });

  std::vector<std::vector<double>> sum(ns, std::vector<double>(static_cast<std::size_t>(plan.grid.count), 0.0));
  std::vector<std::vector<int>> cnt(ns, std::vector<int>(static_cast<std::size_t>(plan.grid.count), 0));
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (!skip[t].empty()) out.skipped.push_back(skip[t]);
    for (const CVRecord& rec : per_task[t]) {
      out.records.push_back(rec);
      sum[rec.normalization][static_cast<std::size_t>(rec.lambda_index)] += rec.nmse;
      cnt[rec.normalization][static_cast<std::size_t>(rec.lambda_index)] += 1;
    }
  }
  out.mean_nmse.assign(ns, std::vector<double>(static_cast<std::size_t>(plan.grid.count),
                                               std::numeric_limits<double>::quiet_NaN()));
  // Ties go to the larger lambda (smaller index), then the earlier normalization.
  for (int k = 0; k < plan.grid.count; ++k) {
    for (std::size_t s = 0; s < ns; ++s) {
      const auto kk = static_cast<std::size_t>(k);
      if (cnt[s][kk] == 0) continue;
      const double m = sum[s][kk] / cnt[s][kk];
      out.mean_nmse[s][kk] = m;
      if (std::isnan(out.best_mean_nmse) || m < out.best_mean_nmse) {
        out.best_mean_nmse = m;
        out.best_normalization = s;
        out.best_lambda_index = k;
      }
    }
  }
  if (std::isnan(out.best_mean_nmse)) throw DomainError("cross-validation: every fold was skipped");
  return out;
}

}  // namespace normreg
