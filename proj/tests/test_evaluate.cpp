#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "normreg/evaluate.hpp"

using namespace normreg;

namespace {

Dataset noise_data(std::uint64_t seed, Index n, Index p, double signal = 0.0) {
  RandomStream r(seed, 3);
  Matrix x(n, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < n; ++i) x(i, j) = j % 2 == 0 ? r.normal() : (r.uniform() < 0.4 ? 1.0 : 0.0);
  }
  Vector y(n);
  for (Index i = 0; i < n; ++i) y(i) = signal * x(i, 0) + r.normal();
  return Dataset(x, y);
}

CVPlan small_plan(std::uint64_t seed) {
  CVPlan plan;
  plan.folds = 5;
  plan.repeats = 2;
  plan.seed = seed;
  plan.grid.count = 20;
  plan.strategies = {NormalizationStrategy::standardize()};
  return plan;
}

// Column source that records every row it is asked for.
struct CountingSource {
  const Dataset* data;
  mutable std::vector<int> hits;

  explicit CountingSource(const Dataset& d) : data(&d), hits(static_cast<std::size_t>(d.rows()), 0) {}
  Index rows() const { return data->rows(); }
  Index cols() const { return data->cols(); }
  double operator()(Index i, Index j) const {
    ++hits[static_cast<std::size_t>(i)];
    return (*data)(i, j);
  }
  FeatureKind kind(Index j) const { return data->kind(j); }
  const Vector& y() const { return data->y(); }
};

}  // namespace

TEST(Metrics, NmseHandValues) {
  Vector y(4);
  y << 1.0, 2.0, 4.0, 7.0;
  EXPECT_NEAR(nmse(y, Vector::Constant(4, y.mean())), 1.0, 1e-15);
  EXPECT_EQ(nmse(y, y), 0.0);
  Vector a(2), b(2);
  a << 0.0, 2.0;
  b << 1.0, 1.0;
  EXPECT_DOUBLE_EQ(nmse(a, b), 1.0);
}

TEST(Metrics, NmseShiftIdentity) {
  Vector y(5), yh(5);
  y << 0.5, -1.0, 2.0, 3.5, 0.0;
  yh << 0.25, -0.5, 1.5, 3.0, 0.5;
  const Vector z = Vector::Constant(5, 1024.0);
  EXPECT_EQ(nmse(y + z, yh + z), nmse(y, yh));
}

TEST(Metrics, NmseErrors) {
  EXPECT_THROW(nmse(Vector::Constant(3, 2.0), Vector::Zero(3)), DomainError);
  EXPECT_THROW(nmse(Vector::Zero(3), Vector::Zero(2)), DimensionError);
  EXPECT_THROW(nmse(Vector::Zero(1), Vector::Zero(1)), DomainError);
}

TEST(Metrics, FdrAndPower) {
  std::vector<Index> truth(10);
  std::iota(truth.begin(), truth.end(), 0);
  EXPECT_EQ(fdr({}, truth), 0.0);
  EXPECT_EQ(power_all({}, truth), 0);
  EXPECT_EQ(fdr(truth, truth), 0.0);
  EXPECT_EQ(power_all(truth, truth), 1);
  auto extra = truth;
  extra.push_back(42);
  EXPECT_DOUBLE_EQ(fdr(extra, truth), 1.0 / 11.0);
  EXPECT_EQ(power_all(extra, truth), 1);
  EXPECT_EQ(power_all({0, 1, 2}, truth), 0);
  EXPECT_EQ(fdr({20, 21}, truth), 1.0);
}

TEST(CrossValidation, FoldAssignmentPartitions) {
  const auto a = fold_assignment(103, 10, 5, 0);
  const auto b = fold_assignment(103, 10, 5, 1);
  std::vector<int> counts(10, 0);
  for (int f : a) ++counts[static_cast<std::size_t>(f)];
  for (int c : counts) EXPECT_TRUE(c == 10 || c == 11);
  EXPECT_NE(a, b);
  EXPECT_EQ(a, fold_assignment(103, 10, 5, 0));
  EXPECT_THROW(fold_assignment(5, 10, 1, 0), DomainError);
  EXPECT_THROW(fold_assignment(5, 1, 1, 0), DomainError);
}

TEST(CrossValidation, PureNoiseSelectsNullModel) {
  int good = 0;
  const int runs = 20;
  for (int s = 0; s < runs; ++s) {
    const Dataset d = noise_data(100 + s, 200, 50);
    const CVResult res = cross_validate(d, small_plan(s), ModelSpec{});
    good += res.best_mean_nmse >= 0.9;
  }
  EXPECT_GE(good, 19);
}

TEST(CrossValidation, StrongSignalIsRecovered) {
  // Var(signal) = 10 * Var(noise) with x0 standard normal.
  const Dataset d = noise_data(9, 400, 10, std::sqrt(10.0));
  CVPlan plan = small_plan(2);
  add_delta_grid(plan, d);
  const CVResult res = cross_validate(d, plan, ModelSpec{});
  EXPECT_LT(res.best_mean_nmse, 0.2);
  ASSERT_EQ(res.labels.size(), 6u);
  EXPECT_EQ(res.labels[0], plan.strategies[0].name());
  EXPECT_EQ(res.records.size(), 2u * 5u * 20u * 6u);
}

TEST(CrossValidation, LeaveOneOutIsDeterministic) {
  const Dataset d = noise_data(4, 20, 3, 2.0);
  CVPlan plan = small_plan(8);
  plan.folds = 20;
  plan.repeats = 1;
  plan.grid.count = 5;
  // Every held-out fold has one row, so each is skipped for lack of variance.
  EXPECT_THROW(cross_validate(d, plan, ModelSpec{}), DomainError);
  plan.folds = 10;
  const CVResult a = cross_validate(d, plan, ModelSpec{ModelSpec::Kind::Ridge});
  const CVResult b = cross_validate(d, plan, ModelSpec{ModelSpec::Kind::Ridge});
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) EXPECT_EQ(a.records[k].nmse, b.records[k].nmse);
  EXPECT_EQ(fold_assignment(20, 20, 8, 0), fold_assignment(20, 20, 8, 0));
}

TEST(CrossValidation, ParallelMatchesSerial) {
  const Dataset d = noise_data(12, 120, 8, 1.0);
  CVPlan plan = small_plan(3);
  const CVResult a = cross_validate(d, plan, ModelSpec{ModelSpec::Kind::ElasticNet, 0.5});
  plan.threads = 4;
  const CVResult b = cross_validate(d, plan, ModelSpec{ModelSpec::Kind::ElasticNet, 0.5});
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) EXPECT_EQ(a.records[k].nmse, b.records[k].nmse);
  EXPECT_EQ(a.best_lambda_index, b.best_lambda_index);
}

TEST(CrossValidation, TrainingNormalizationNeverReadsHeldOutRows) {
  const Dataset d = noise_data(21, 60, 6, 1.0);
  const auto ids = fold_assignment(d.rows(), 5, 1, 0);
  std::vector<Index> train;
  for (Index i = 0; i < d.rows(); ++i) {
    if (ids[static_cast<std::size_t>(i)] != 2) train.push_back(i);
  }
  const CountingSource src(d);
  const auto strategy = NormalizationStrategy::by_kind(d, NormalizationStrategy::binary_delta({}),
                                                       NormalizationStrategy::standardize());
  const TrainedNormalization tn = normalize_training(src, train, strategy);
  for (Index i = 0; i < d.rows(); ++i) {
    if (ids[static_cast<std::size_t>(i)] == 2) {
      EXPECT_EQ(src.hits[static_cast<std::size_t>(i)], 0) << "held-out row " << i;
    } else {
      EXPECT_GT(src.hits[static_cast<std::size_t>(i)], 0);
    }
  }
  const NormalizationPlan direct = compute_plan(d.select_rows(train), strategy);
  EXPECT_EQ(tn.kept.size(), 6u);
  for (Index j = 0; j < 6; ++j) {
    EXPECT_DOUBLE_EQ(tn.plan.c(j), direct.c(j));
    EXPECT_DOUBLE_EQ(tn.plan.s(j), direct.s(j));
  }
}

TEST(CrossValidation, ConstantTrainingColumnIsDropped) {
  Matrix x(8, 2);
  x << 1, 0.3, 1, 1.2, 1, -0.4, 1, 2.0, 0, 0.1, 0, 0.9, 1, -1.1, 1, 0.5;
  Vector y = x.col(1) * 2.0;
  const Dataset d(x, y);
  const std::vector<Index> train{0, 1, 2, 3};
  const auto tn = normalize_training(d, train, NormalizationStrategy::standardize());
  ASSERT_EQ(tn.kept, std::vector<Index>{1});
  const std::vector<Index> test{4, 5};
  const Vector pred = predict_rows(d, test, tn, Vector::Constant(1, 0.0), 1.5);
  EXPECT_DOUBLE_EQ(pred(0), 1.5);
}
