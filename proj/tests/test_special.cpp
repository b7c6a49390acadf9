#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>

#include "normreg/core/special.hpp"

using namespace normreg;

namespace {

// Bisection on a monotone increasing function.
double bisect(const std::function<double(double)>& f, double target, double lo, double hi) {
  for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(Special, NormalBasics) {
  EXPECT_EQ(std_normal_cdf(0.0), 0.5);
  EXPECT_NEAR(std_normal_pdf(0.0), 0.3989422804014327, 1e-15);
}

TEST(Special, CdfMatchesIntegratedDensity) {
  using boost::math::quadrature::gauss_kronrod;
  for (double x : {-7.0, -3.0, -1.0, -0.2, 0.4, 1.5, 2.5}) {
    const double tail = gauss_kronrod<double, 61>::integrate(std_normal_pdf, -40.0, x, 15, 1e-15);
    EXPECT_NEAR(std_normal_cdf(x), tail, 1e-13) << x;
  }
}

TEST(Special, CdfSymmetry) {
  for (double x = -30.0; x <= 30.0; x += 0.173) {
    EXPECT_LE(std::abs(std_normal_cdf(x) + std_normal_cdf(-x) - 1.0), 1e-12) << x;
  }
}

TEST(Special, QuantileAgainstBisection) {
  const double z = std_normal_quantile(0.975);
  const double oracle = bisect(std_normal_cdf, 0.975, -10.0, 10.0);
  EXPECT_NEAR(z, oracle, 1e-9);
  EXPECT_NEAR(z, 1.959964, 1e-6);
  for (double u : {1e-8, 1e-4, 0.01, 0.3, 0.5, 0.77, 0.999}) {
    EXPECT_NEAR(std_normal_quantile(u), bisect(std_normal_cdf, u, -40.0, 40.0), 1e-9) << u;
  }
}

TEST(Special, QuantileCdfRoundTrips) {
  for (double x = -6.0; x <= 6.0; x += 0.01) {
    EXPECT_NEAR(std_normal_quantile(std_normal_cdf(x)), x, 1e-8) << x;
  }
  for (double u = 1e-6; u < 1.0 - 1e-6; u += 0.001) {
    EXPECT_NEAR(std_normal_cdf(std_normal_quantile(u)), u, 1e-8) << u;
  }
  EXPECT_NEAR(std_normal_cdf(std_normal_quantile(1e-6)), 1e-6, 1e-14);
  EXPECT_NEAR(std_normal_cdf(std_normal_quantile(1.0 - 1e-6)), 1.0 - 1e-6, 1e-14);
}

TEST(Special, QuantileDomain) {
  EXPECT_THROW(std_normal_quantile(0.0), DomainError);
  EXPECT_THROW(std_normal_quantile(1.0), DomainError);
  EXPECT_THROW(std_normal_quantile(-0.1), DomainError);
  EXPECT_THROW(std_normal_quantile(std::nan("")), DomainError);
}

TEST(Special, FoldedNormal) {
  EXPECT_NEAR(folded_normal_pdf(0.0, 0.0, 1.0), 0.7978845608028654, 1e-15);
  EXPECT_EQ(folded_normal_pdf(-0.5, 0.0, 1.0), 0.0);
  EXPECT_THROW(folded_normal_pdf(1.0, 0.0, 0.0), DomainError);
  EXPECT_THROW(folded_normal_quantile(0.5, 0.0, -1.0), DomainError);

  auto cdf01 = [](double x) { return std_normal_cdf(x) - std_normal_cdf(-x); };
  const double oracle = bisect(cdf01, 0.5, 0.0, 10.0);
  EXPECT_NEAR(folded_normal_quantile(0.5, 0.0, 1.0), oracle, 1e-10);
  EXPECT_NEAR(oracle, 0.6744898, 1e-7);

  for (double mu : {-1.5, 0.0, 2.0}) {
    for (double sigma : {0.5, 1.0, 3.0}) {
      auto cdf = [&](double x) { return folded_normal_cdf(x, mu, sigma); };
      for (double u : {0.01, 0.5, 0.9, 0.999}) {
        EXPECT_NEAR(folded_normal_quantile(u, mu, sigma), bisect(cdf, u, 0.0, 100.0), 1e-10);
      }
    }
  }
}

TEST(Special, FoldedDensityIntegratesToCdf) {
  using boost::math::quadrature::gauss_kronrod;
  const double mu = 0.7;
  const double sigma = 1.3;
  auto pdf = [&](double x) { return folded_normal_pdf(x, mu, sigma); };
  for (double x : {0.3, 1.0, 2.5, 6.0}) {
    const double area = gauss_kronrod<double, 61>::integrate(pdf, 0.0, x, 15, 1e-14);
    EXPECT_NEAR(area, folded_normal_cdf(x, mu, sigma), 1e-12);
  }
}
