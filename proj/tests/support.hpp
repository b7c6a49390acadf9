#pragma once

// Test-only helpers shared by the unit and acceptance suites.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

#include "normreg/core/dataset.hpp"
#include "normreg/core/random.hpp"
#include "normreg/solver.hpp"

namespace normreg::testing {

/// Centered design with mutually orthogonal columns of random length.
inline Dataset orthogonal_design(std::uint64_t seed, Index n, Index p) {
  RandomStream r(seed, 0);
  Matrix g(n, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < n; ++i) g(i, j) = r.normal();
  }
  g.rowwise() -= g.colwise().mean();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, p);
  q.rowwise() -= q.colwise().mean();
  for (Index j = 0; j < p; ++j) q.col(j) *= r.uniform(0.5, 4.0) * std::sqrt(static_cast<double>(n));
  Vector beta(p);
  for (Index j = 0; j < p; ++j) beta(j) = r.uniform(-2.0, 2.0);
  Vector y = q * beta;
  for (Index i = 0; i < n; ++i) y(i) += 1.5 + r.normal();
  return Dataset::transformed(q, y, std::vector<FeatureKind>(static_cast<std::size_t>(p), FeatureKind::Continuous), {});
}

/// Largest violation of the elastic-net optimality conditions.
inline double kkt_violation(const Matrix& x, const Vector& y, const FitResult& f, const PenaltySpec& pen) {
  const Vector r = (y - x * f.beta_norm).array() - f.intercept_norm;
  double worst = 0.0;
  for (Index j = 0; j < x.cols(); ++j) {
    const double g = x.col(j).dot(r);
    const double b = f.beta_norm(j);
    const double l1 = pen.lambda1 * pen.u_at(j);
    if (b != 0.0) {
      worst = std::max(worst, std::abs(g - pen.lambda2 * pen.v_at(j) * b - l1 * (b > 0 ? 1.0 : -1.0)));
    } else {
      worst = std::max(worst, std::max(0.0, std::abs(g) - l1));
    }
  }
  return worst;
}

}  // namespace normreg::testing
