#pragma once

// Seeded generators for the synthetic designs.

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "normreg/core/dataset.hpp"
#include "normreg/core/random.hpp"
#include "normreg/core/special.hpp"
#include "normreg/error.hpp"
#include "normreg/oracle.hpp"

namespace normreg::simulate {

/// Number of ones for a binary column: ceil(n q), with n q snapped to the
/// nearest integer when it is within rounding error of one.
inline Index binary_count(Index n, double q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("class balance q must lie strictly inside (0, 1)");
  const double nq = static_cast<double>(n) * q;
  const double r = std::round(nq);
  return static_cast<Index>(std::abs(nq - r) < 1e-9 ? r : std::ceil(nq));
}

/// True when the binary column would be constant.
inline bool binary_degenerate(Index n, double q) {
  const Index k = binary_count(n, q);
  return k == 0 || k == n;
}

/// Exactly binary_count(n, q) ones at uniformly random positions.
inline Vector gen_binary(Index n, double q, RandomStream& rng) {
  const Index k = binary_count(n, q);
  std::vector<double> v(static_cast<std::size_t>(n), 0.0);
  for (Index i = 0; i < k; ++i) v[static_cast<std::size_t>(i)] = 1.0;
  rng.shuffle(std::span<double>(v));
  return Eigen::Map<Vector>(v.data(), n);
}

/// Normal quantiles of an even grid on [1e-4, 1 - 1e-4], randomly permuted.
inline Vector gen_quasinormal(Index n, RandomStream& rng) {
  if (n < 2) throw DomainError("gen_quasinormal needs n >= 2");
  std::vector<double> v(static_cast<std::size_t>(n));
  const double lo = 1e-4, hi = 1.0 - 1e-4;
  for (Index i = 0; i < n; ++i) {
    const double w = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    v[static_cast<std::size_t>(i)] = std_normal_quantile(w);
  }
  // Exact symmetry of the comb.
  for (Index i = 0; i < n / 2; ++i) {
    const double m = 0.5 * (v[static_cast<std::size_t>(n - 1 - i)] - v[static_cast<std::size_t>(i)]);
    v[static_cast<std::size_t>(i)] = -m;
    v[static_cast<std::size_t>(n - 1 - i)] = m;
  }
  if (n % 2 == 1) v[static_cast<std::size_t>(n / 2)] = 0.0;
  rng.shuffle(std::span<double>(v));
  return Eigen::Map<Vector>(v.data(), n);
}

/// Affine map giving exactly the requested mean and (uncorrected) sd.
inline Vector rescale(const Vector& x, double mean, double sd) {
  const double m = x.mean();
  const double s = std::sqrt((x.array() - m).square().mean());
  if (!(s > 0.0)) throw DomainError("rescale: constant column");
  return ((x.array() - m) * (sd / s) + mean).matrix();
}

/// Copies the first ceil(rho n / 2) entries of column 0 into every other column.
inline void inject_correlation(Matrix& x, double rho) {
  if (x.cols() < 2) throw DomainError("inject_correlation needs at least two columns");
  if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("inject_correlation: rho must lie in [0, 1]");
  const Index m = static_cast<Index>(std::ceil(rho * static_cast<double>(x.rows()) / 2.0 - 1e-9));
  for (Index j = 1; j < x.cols(); ++j) x.col(j).head(m) = x.col(0).head(m);
}

/// Noise level giving Var(x beta) / sigma^2 = snr, with the uncorrected variance.
inline double sigma_for_snr(const Matrix& x, const Vector& beta, double snr) {
  if (!(snr > 0.0)) throw DomainError("snr must be positive");
  const Vector s = x * beta;
  const double var = (s.array() - s.mean()).square().mean();
  if (!(var > 0.0)) throw DomainError("sigma_for_snr: the signal is constant");
  return std::sqrt(var / snr);
}

/// Joint count of ones for gen_binary_pair, or -1 when rho is not attainable.
inline Index binary_pair_overlap(Index n, double q1, double q2, double rho) {
  const auto bounds = oracle::bernoulli_corr_bounds(q1, q2);
  if (rho < bounds.rho_min - 1e-12 || rho > bounds.rho_max + 1e-12) return -1;
  const Index n1 = binary_count(n, q1);
  const Index n2 = binary_count(n, q2);
  const double p11 = q1 * q2 + rho * std::sqrt((q1 - q1 * q1) * (q2 - q2 * q2));
  const Index n11 = static_cast<Index>(std::llround(static_cast<double>(n) * p11));
  if (n11 < 0 || n11 > std::min(n1, n2) || n1 + n2 - n11 > n) return -1;
  return n11;
}

/// Two binary columns with exact margins and joint count round(n p11), where
/// p11 = q1 q2 + rho sqrt(nu1 nu2). Empty when rho is not attainable.
inline std::optional<std::pair<Vector, Vector>> gen_binary_pair(Index n, double q1, double q2, double rho,
                                                                RandomStream& rng) {
  const Index n11 = binary_pair_overlap(n, q1, q2, rho);
  if (n11 < 0) return std::nullopt;
  const Index n1 = binary_count(n, q1);
  const Index n2 = binary_count(n, q2);
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  rng.shuffle(std::span<Index>(order));
  Vector a = Vector::Zero(n), b = Vector::Zero(n);
  Index pos = 0;
  auto place = [&](Index count, double va, double vb) {
    for (Index k = 0; k < count; ++k, ++pos) {
      a(order[static_cast<std::size_t>(pos)]) = va;
      b(order[static_cast<std::size_t>(pos)]) = vb;
    }
  };
  place(n11, 1.0, 1.0);
  place(n1 - n11, 1.0, 0.0);
  place(n2 - n11, 0.0, 1.0);
  return std::make_pair(std::move(a), std::move(b));
}

/// Column of iid N(0, 1) draws.
inline Vector gen_normal(Index n, RandomStream& rng) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

}  // namespace normreg::simulate
