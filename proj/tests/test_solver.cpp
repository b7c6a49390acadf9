#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "normreg/normalize.hpp"
#include "normreg/solver.hpp"
#include "support.hpp"

using namespace normreg;
using normreg::testing::kkt_violation;
using normreg::testing::orthogonal_design;

namespace {

Dataset random_design(std::uint64_t seed, Index n, Index p, double binary_share = 0.5) {
  RandomStream r(seed, 1);
  Matrix x(n, p);
  for (Index j = 0; j < p; ++j) {
    const bool binary = j < static_cast<Index>(binary_share * p);
    const double q = r.uniform(0.2, 0.8);
    for (Index i = 0; i < n; ++i) x(i, j) = binary ? (r.uniform() < q ? 1.0 : 0.0) : r.normal();
    if (binary) {
      x(0, j) = 1.0;
      x(1, j) = 0.0;
    }
  }
  Vector y = Vector::Zero(n);
  for (Index j = 0; j < std::min<Index>(p, 4); ++j) y += (j + 1.0) * x.col(j);
  for (Index i = 0; i < n; ++i) y(i) += r.normal();
  return Dataset(x, y);
}

Dataset standardized(const Dataset& d) { return apply(d, compute_plan(d, NormalizationStrategy::standardize())); }

}  // namespace

TEST(SoftThreshold, Values) {
  EXPECT_EQ(soft_threshold(0.5, 1.0), 0.0);
  EXPECT_EQ(soft_threshold(5.0, 2.0), 3.0);
  EXPECT_EQ(soft_threshold(-5.0, 2.0), -3.0);
  EXPECT_EQ(soft_threshold(-1.25, 0.0), -1.25);
}

TEST(Fit, SingleCenteredFeature) {
  // x'x = 10, x'y = 5
  Matrix x(4, 1);
  x << -std::sqrt(2.5), std::sqrt(2.5), -std::sqrt(2.5), std::sqrt(2.5);
  Vector y(4);
  const double a = 5.0 / (4.0 * std::sqrt(2.5));
  y << -a + 1.0, a + 1.0, -a + 1.0, a + 1.0;
  const FitResult f = fit(x, y, PenaltySpec::lasso(2.0), {});
  EXPECT_NEAR(f.beta_norm(0), 0.3, 1e-12);
  EXPECT_NEAR(f.intercept_norm, 1.0, 1e-12);
  EXPECT_TRUE(f.converged);
}

TEST(Fit, NullModelAtLambdaMax) {
  const Dataset d = standardized(random_design(2, 50, 10));
  const double lmax = lambda_max(d);
  const FitResult f = fit(d, PenaltySpec::lasso(lmax * 1.0001));
  EXPECT_TRUE(f.support().empty());
  EXPECT_NEAR(f.intercept_norm, d.y().mean(), 1e-12);
  EXPECT_FALSE(fit(d, PenaltySpec::lasso(lmax * 0.99)).support().empty());
}

TEST(Fit, MatchesOrthogonalSolution) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset d = orthogonal_design(seed, 64, 8);
    const double lmax = lambda_max(d);
    const PenaltySpec pen = PenaltySpec::elastic_net(0.3 * lmax, 5.0);
    const FitResult f = fit(d, pen);
    const Vector yc = d.y().array() - d.y().mean();
    const auto oracle = orthogonal_solution(d.x().transpose() * yc, d.x().colwise().squaredNorm().transpose(), pen,
                                            d.y().mean());
    EXPECT_LE((f.beta_norm - oracle.beta).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_NEAR(f.intercept_norm, oracle.intercept, 1e-12);
  }
}

TEST(OrthogonalSolution, HandValues) {
  const Vector one = Vector::Constant(1, 5.0);
  const Vector diag = Vector::Constant(1, 10.0);
  EXPECT_NEAR(orthogonal_solution(one, diag, PenaltySpec::lasso(2.0), 0.0).beta(0), 0.3, 1e-15);
  EXPECT_NEAR(orthogonal_solution(-one, diag, PenaltySpec::elastic_net(2.0, 3.0), 0.0).beta(0), -3.0 / 13.0, 1e-15);
  const double b3 = orthogonal_solution(one, diag, PenaltySpec::elastic_net(2.0, 1e3), 0.0).beta(0);
  const double b6 = orthogonal_solution(one, diag, PenaltySpec::elastic_net(2.0, 1e6), 0.0).beta(0);
  EXPECT_GT(0.3, b3);
  EXPECT_GT(b3, b6);
  EXPECT_GT(b6, 0.0);
}

TEST(Fit, KktAndMonotoneObjective) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Dataset raw = random_design(seed, 60, 25);
    for (const auto& st : {NormalizationStrategy::standardize(), NormalizationStrategy::max_abs(),
                           NormalizationStrategy::min_max()}) {
      const Dataset d = apply(raw, compute_plan(raw, st));
      const double lmax = lambda_max(d);
      for (double frac : {0.5, 0.1, 0.01}) {
        const PenaltySpec pen = PenaltySpec::elastic_net(frac * lmax, seed % 2 ? 0.0 : 3.0);
        FitOptions opts;
        opts.record_objective = true;
        opts.tolerance = 1e-10;
        const FitResult f = fit(d, pen, opts);
        ASSERT_TRUE(f.converged);
        EXPECT_LE(kkt_violation(d.x(), d.y(), f, pen), 1e-6 * d.rows()) << st.name();
        for (std::size_t k = 1; k < f.objective_trace.size(); ++k) {
          EXPECT_LE(f.objective_trace[k], f.objective_trace[k - 1] * (1.0 + 1e-14) + 1e-12);
        }
        // intercept optimality
        const Vector r = (d.y() - d.x() * f.beta_norm).array() - f.intercept_norm;
        EXPECT_NEAR(r.sum(), 0.0, 1e-6);
      }
    }
  }
}

TEST(Fit, NoInterceptOption) {
  const Dataset d = standardized(random_design(7, 40, 5));
  FitOptions opts;
  opts.fit_intercept = false;
  const FitResult f = fit(d, PenaltySpec::lasso(1.0), opts);
  EXPECT_EQ(f.intercept_norm, 0.0);
}

TEST(Fit, RejectsBadInput) {
  Matrix x = Matrix::Ones(3, 4);
  EXPECT_THROW(fit(x, Vector::Zero(3), PenaltySpec{}, {}), DomainError);
  Matrix y = Matrix::Zero(3, 1);
  y(0, 0) = std::nan("");
  EXPECT_THROW(fit(y, Vector::Zero(3), PenaltySpec::lasso(1.0), {}), DomainError);
  EXPECT_THROW(fit(Matrix::Zero(3, 1), Vector::Zero(2), PenaltySpec::lasso(1.0), {}), DimensionError);
  PenaltySpec neg = PenaltySpec::lasso(1.0);
  neg.u = Vector::Constant(1, -1.0);
  EXPECT_THROW(fit(Matrix::Zero(3, 1), Vector::Zero(3), neg, {}), DomainError);
}

TEST(Fit, FlagsNonConvergence) {
  const Dataset d = standardized(random_design(3, 50, 30));
  FitOptions opts;
  opts.max_sweeps = 1;
  opts.tolerance = 1e-14;
  const FitResult f = fit(d, PenaltySpec::lasso(0.01 * lambda_max(d)), opts);
  EXPECT_FALSE(f.converged);
  EXPECT_EQ(f.sweeps_used, 1);
}

TEST(Fit, PermutationEquivariance) {
  const Dataset d = standardized(random_design(5, 60, 12));
  std::vector<Index> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[2], perm[7]);
  const Dataset dp = d.select_cols(perm);
  FitOptions opts;
  opts.tolerance = 1e-12;
  const PenaltySpec pen = PenaltySpec::elastic_net(0.1 * lambda_max(d), 1.0);
  const FitResult a = fit(d, pen, opts);
  const FitResult b = fit(dp, pen, opts);
  for (Index j = 0; j < 12; ++j) EXPECT_NEAR(b.beta_norm(j), a.beta_norm(perm[j]), 1e-8);
}

TEST(Fit, WeightedEqualsNormalized) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Dataset raw = random_design(seed, 80, 6, 1.0);
    const auto plan = compute_plan(raw, NormalizationStrategy::binary_delta({0.8, 2.0, 0.5, PenaltyKind::LassoComparable}));
    FitOptions opts;
    opts.tolerance = 1e-13;
    const PenaltySpec pen = PenaltySpec::elastic_net(4.0, 2.0);
    const FitResult normalized = fit(apply(raw, plan), pen, opts, plan);

    NormalizationPlan center_only{plan.c, Vector::Ones(plan.size()), NormalizationStrategy::none()};
    PenaltySpec weighted = pen;
    weighted.u = plan.s;
    weighted.v = plan.s.array().square();
    const FitResult w = fit(apply(raw, center_only), weighted, opts, center_only);
    EXPECT_LE((w.beta - normalized.beta).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_NEAR(w.intercept, normalized.intercept, 1e-8);
  }
}

TEST(LambdaMax, Values) {
  Matrix x(2, 1);
  x << 1, -1;
  Vector y(2);
  y << 3.5, -3.5;
  EXPECT_DOUBLE_EQ(lambda_max(x, y), 7.0);
  const Dataset d = standardized(random_design(1, 30, 1));
  EXPECT_NEAR(lambda_max(d, Vector::Constant(1, 2.0)), 0.5 * lambda_max(d), 1e-12);
  EXPECT_THROW(lambda_max(Matrix::Zero(3, 2), Vector::Ones(3)), DomainError);
}

TEST(FitPath, WarmMatchesCold) {
  const Dataset d = standardized(random_design(11, 60, 20));
  FitOptions opts;
  opts.tolerance = 1e-12;
  const auto path = fit_path(d, {PathShape::Kind::Mixing, 1.0, 0.0}, {}, opts);
  ASSERT_EQ(path.size(), 100u);
  EXPECT_TRUE(path.front().fit.support().empty());
  EXPECT_NEAR(path.back().lambda, 0.01 * path.front().lambda, 1e-12);
  for (std::size_t k = 0; k < path.size(); k += 9) {
    const FitResult cold = fit(d, path[k].penalty, opts);
    EXPECT_LE((cold.beta_norm - path[k].fit.beta_norm).cwiseAbs().maxCoeff(), 1e-6);
  }
  const auto enet = fit_path(d, {PathShape::Kind::Mixing, 0.5, 0.0}, {10, 1e-2, {}}, opts);
  EXPECT_TRUE(enet.front().fit.support().empty());
  EXPECT_DOUBLE_EQ(enet[3].penalty.lambda1, enet[3].penalty.lambda2);
  const auto fixed = fit_path(d, {PathShape::Kind::FixedLambda2, 1.0, 4.0}, {5, 0.1, {}}, opts);
  EXPECT_EQ(fixed[2].penalty.lambda2, 4.0);
  EXPECT_THROW(fit_path(d, {}, {1, 0.1, {}}), DomainError);
}
