#pragma once

// The simulated experiment catalogue.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "normreg/core/dataset.hpp"
#include "normreg/core/random.hpp"
#include "normreg/error.hpp"
#include "normreg/evaluate.hpp"
#include "normreg/normalize.hpp"
#include "normreg/oracle.hpp"
#include "normreg/simulate/generators.hpp"
#include "normreg/simulate/params.hpp"
#include "normreg/simulate/result.hpp"
#include "normreg/solver.hpp"
#include "normreg/version.hpp"

namespace normreg::simulate {

struct ScenarioInfo {
  int id;
  const char* name;
  const char* summary;
};

inline const std::vector<ScenarioInfo>& catalogue() {
  static const std::vector<ScenarioInfo> list = {
      {1, "selection-probability", "one binary feature: lasso selection frequency against the closed form"},
      {2, "bias-var", "one binary feature: bias and variance of lasso, ridge or weighted elastic net"},
      {3, "decreasing-classbalance", "n=500, p=1000 lasso with 20 signals of decreasing class balance"},
      {4, "mixed-data", "binary and quasi-normal feature under comparable scaling"},
      {5, "interactions", "binary x quasi-normal interaction, standardized versus product scaling"},
      {6, "weighted-elnet", "mixed data with class-balance penalty weights"},
      {7, "orthogonality", "two correlated binary features"},
      {8, "power-fdr", "power, false discoveries and NMSE for many binary features"},
      {9, "predictive-sim", "validation-tuned lasso path on train/validation/test splits"},
      {10, "maxabs-gev", "max-abs scale factor against its Gumbel limit and its effect on the lasso"},
  };
  return list;
}

/// Accepts a catalogue name or its number.
inline const ScenarioInfo& find_scenario(const std::string& key) {
  for (const auto& s : catalogue()) {
    if (key == s.name || key == std::to_string(s.id)) return s;
  }
  std::string list;
  for (const auto& s : catalogue()) list += (list.empty() ? "" : ", ") + std::string(s.name);
  throw DomainError("unknown scenario '" + key + "' (expected one of: " + list + ")");
}

namespace detail {

constexpr std::uint64_t kTagBits = 32;

inline RandomStream stream(std::uint64_t seed, int scenario, std::uint64_t data_cell, long rep) {
  return RandomStream(seed, stream_key((static_cast<std::uint64_t>(scenario) << kTagBits) | data_cell,
                                       static_cast<std::uint64_t>(rep)));
}

inline void require(bool ok, const std::string& message) {
  if (!ok) throw DomainError(message);
}

inline Matrix columns(std::initializer_list<const Vector*> cols) {
  const Index n = (*cols.begin())->size();
  Matrix x(n, static_cast<Index>(cols.size()));
  Index j = 0;
  for (const Vector* c : cols) x.col(j++) = *c;
  return x;
}

/// Normalizes, fits and returns the fit with original-scale coefficients.
inline FitResult fit_normalized(const Matrix& x, const Vector& y, const NormalizationPlan& plan,
                                const PenaltySpec& pen, const FitOptions& opts = {}) {
  FitResult r = fit(apply(x, plan), y, pen, opts);
  const Coefficients back = backtransform(r.beta_norm, r.intercept_norm, plan);
  r.beta = back.beta;
  r.intercept = back.intercept;
  return r;
}

inline NormalizationPlan plan_for(const Matrix& x, const NormalizationStrategy& st) {
  return compute_plan(Dataset(x, Vector::Zero(x.rows())), st);
}

inline double actual_q(Index n, double q) { return static_cast<double>(binary_count(n, q)) / static_cast<double>(n); }

inline void note_convergence(const FitResult& f, const std::string& where, TaskOutput& out) {
  if (!f.converged) out.problems.push_back(where + ": solver did not converge");
}

inline std::string fmt(double v) { return io::detail::format_number(v); }

/// Grid entries with a usable binary column; the rest are logged on `res`.
inline std::vector<std::size_t> usable_q(const std::vector<double>& qs, Index n, ScenarioResult& res) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    require(qs[i] > 0.0 && qs[i] < 1.0, "class balance q must lie strictly inside (0, 1)");
    if (binary_degenerate(n, qs[i])) {
      res.skipped.push_back("q=" + fmt(qs[i]) + ": ceil(n q) = n gives a constant binary column");
    } else {
      out.push_back(i);
    }
  }
  return out;
}

inline void add_note(ScenarioResult& res, const std::string& note) { res.manifest["notes"].push_back(note); }

}  // namespace detail

// 1. Selection frequency of a single binary feature.
inline void scenario_selection(const ScenarioSpec& spec, Params& P, ScenarioResult& res) {
  const long n = P.integer("n", 100);
  const long reps = P.integer("replications", 100);
  const double beta = P.real("beta", 0.5);
  const auto qs = P.grid("q", "0.5,0.7,0.9,0.95,0.99");
  const auto deltas = P.grid("delta", "0,0.5,1,1.5");
  const auto lambdas = P.grid("lambda1", "10");
  const auto sigmas = P.grid("sigma", "1");
  P.finish(res.scenario);
  detail::require(n >= 2 && reps >= 1, "n must be at least 2 and replications at least 1");
  for (double s : sigmas) detail::require(s > 0.0, "sigma must be positive for selection probabilities");
  for (double l : lambdas) detail::require(l > 0.0, "lambda1 must be positive for selection probabilities");
  detail::add_note(res, "scaling: s = nu^delta (no rescaling)");
  detail::add_note(res, "defaults for n, beta, lambda1 and sigma are illustrative, not taken from a printed configuration");

  res.cell_columns = {"q", "delta", "lambda1", "sigma"};
  const auto use = detail::usable_q(qs, n, res);
  struct Task {
    std::size_t qi;
    long rep;
  };
  std::vector<Task> tasks;
  for (std::size_t qi : use) {
    for (long r = 0; r < reps; ++r) tasks.push_back({qi, r});
  }
  run_tasks(tasks.size(), spec.threads, res, [&](std::size_t t, TaskOutput& out) {
    const auto [qi, rep] = tasks[t];
    RandomStream rng = detail::stream(spec.seed, 1, qi, rep);
    const Vector x = gen_binary(n, qs[qi], rng);
    const Vector z = gen_normal(n, rng);
    const Matrix xm = x;
    std::vector<NormalizationPlan> plans;
    for (double d : deltas) {
      plans.push_back(detail::plan_for(xm, NormalizationStrategy::binary_delta({d, 1.0, 0.5, PenaltyKind::Plain})));
    }
    for (double sigma : sigmas) {
      const Vector y = beta * x + sigma * z;
      for (std::size_t di = 0; di < deltas.size(); ++di) {
        for (double l1 : lambdas) {
          const FitResult f = detail::fit_normalized(xm, y, plans[di], PenaltySpec::lasso(l1));
          out.records.push_back({rep, {qs[qi], deltas[di], l1, sigma}, "selected", f.beta(0) != 0.0 ? 1.0 : 0.0});
        }
      }
    }
  });
  for (std::size_t qi : use) {
    for (double sigma : sigmas) {
      for (double d : deltas) {
        for (double l1 : lambdas) {
          oracle::BinaryFeatureModel m{beta, static_cast<double>(n), detail::actual_q(n, qs[qi]), sigma, l1, 0.0,
                                       oracle::Scaling::delta(d), std::nullopt};
          const double p = oracle::selection_probability(m);
          res.references.push_back({{qs[qi], d, l1, sigma}, "selected", p, p * (1.0 - p)});
        }
      }
    }
  }
}

// 2. Bias and variance of a single binary feature's estimate.
inline void scenario_bias_var(const ScenarioSpec& spec, Params& P, ScenarioResult& res) {
  const std::string model = P.text("model", "lasso", {"lasso", "ridge", "elnet"});
  const std::string scaling = P.text("scaling", "comparable", {"comparable", "plain"});
  const long n = P.integer("n", 100);
  const long reps = P.integer("replications", 100);
  const double beta = P.real("beta", 1.0);
  const auto qs = P.grid("q", "0.5,0.6,0.7,0.8,0.9,0.95,0.99");
  const bool omega = model == "elnet";
  const auto exps = P.grid(omega ? "omega" : "delta", "0,0.5,1");
  const auto sigmas = P.grid("sigma", "0.5,1,2");
  const double l1 = model == "ridge" ? 0.0 : P.real("lambda1", model == "lasso" ? 20.0 : 10.0);
  const double l2 = model == "lasso" ? 0.0 : P.real("lambda2", model == "ridge" ? 50.0 : 25.0);
  const double kappa = model == "ridge" ? 1.0 : P.real("kappa", model == "lasso" ? 4.0 : 2.0);
  P.finish(res.scenario);
  detail::require(n >= 2 && reps >= 1, "n must be at least 2 and replications at least 1");
  for (double s : sigmas) detail::require(s >= 0.0, "sigma must be non-negative");

  const bool plain = scaling == "plain";
  const PenaltyKind pk =
      plain ? PenaltyKind::Plain : (model == "ridge" ? PenaltyKind::RidgeComparable : PenaltyKind::LassoComparable);
  std::optional<oracle::Anchor> anchor;
  if (!plain) anchor = oracle::Anchor{kappa, 0.5, pk};
  if (plain) {
    detail::add_note(res, omega ? "weights: u = v = nu^omega" : "scaling: s = nu^delta");
  } else if (model == "lasso") {
    detail::add_note(res, "scaling: s = kappa (1/4)^(1-delta) nu^delta with kappa = " + detail::fmt(kappa));
  } else if (model == "ridge") {
    detail::add_note(res, "scaling: s = (1/4)^(1/2-delta) nu^delta (equal to standardization at delta = 1/2)");
  } else {
    detail::add_note(res, "weights: u = v = kappa (1/4)^(1-omega) nu^omega with kappa = " + detail::fmt(kappa) +
                              "; binary feature centered, not scaled");
  }

  res.cell_columns = {"q", omega ? "omega" : "delta", "sigma"};
  const auto use = detail::usable_q(qs, n, res);
  struct Task {
    std::size_t qi;
    long rep;
  };
  std::vector<Task> tasks;
  for (std::size_t qi : use) {
    for (long r = 0; r < reps; ++r) tasks.push_back({qi, r});
  }
  run_tasks(tasks.size(), spec.threads, res, [&](std::size_t t, TaskOutput& out) {
    const auto [qi, rep] = tasks[t];
    RandomStream rng = detail::stream(spec.seed, 2, qi, rep);
    const Vector x = gen_binary(n, qs[qi], rng);
    const Vector z = gen_normal(n, rng);
    const Matrix xm = x;
    const double nu = class_balance(x).nu;
    for (double sigma : sigmas) {
      const Vector y = beta * x + sigma * z;
      for (double e : exps) {
        FitResult f;
        if (omega) {
          const auto plan = detail::plan_for(xm, NormalizationStrategy::binary_delta({0.0, 1.0, 0.5, PenaltyKind::Plain}));
          PenaltySpec pen = PenaltySpec::elastic_net(l1, l2);
          const double w = binary_delta_scale(nu, {e, kappa, 0.5, pk});
          pen.u = Vector::Constant(1, w);
          pen.v = Vector::Constant(1, w);
          f = detail::fit_normalized(xm, y, plan, pen);
        } else {
          const auto plan = detail::plan_for(xm, NormalizationStrategy::binary_delta({e, kappa, 0.5, pk}));
          f = detail::fit_normalized(xm, y, plan, PenaltySpec::elastic_net(l1, l2));
        }
        out.records.push_back({rep, {qs[qi], e, sigma}, "beta_hat", f.beta(0)});
      }
    }
  });
  for (std::size_t qi : use) {
    for (double sigma : sigmas) {
      for (double e : exps) {
        oracle::BinaryFeatureModel m{beta, static_cast<double>(n), detail::actual_q(n, qs[qi]), sigma, l1, l2,
                                     omega ? oracle::Scaling::omega(e) : oracle::Scaling::delta(e), anchor};
        res.references.push_back({{qs[qi], e, sigma}, "beta_hat", oracle::expected_estimate(m),
                                  oracle::estimator_variance(m)});
      }
    }
  }
}

// 3. Many binary features with geometrically decreasing class balance.
inline void scenario_decreasing(const ScenarioSpec& spec, Params& P, ScenarioResult& res) {
  const long n = P.integer("n", 500);
  const long p = P.integer("p", 1000);
  const long k = P.integer("k", 20);
  const long reps = P.integer("replications", 100);
  const double snr = P.real("snr", 2.0);
  const double q_last = P.real("q_last", 0.99);
  const auto deltas = P.grid("delta", "0,0.5,1");
  const auto rhos = P.grid("rho", "0");
  const double kappa = P.real("kappa", 4.0);
  P.finish(res.scenario);
  detail::require(n >= 2 && reps >= 1 && k >= 2 && p >= k, "need n >= 2, replications >= 1 and 2 <= k <= p");
  detail::require(q_last > 0.5 && q_last < 1.0, "q_last must lie in (0.5, 1)");
  detail::add_note(res, "scaling: s = kappa (1/4)^(1-delta) nu^delta with kappa = " + detail::fmt(kappa));
  detail::add_note(res, "signal class balance is geometric in 1 - q from 0.5 to " + detail::fmt(q_last));
  detail::add_note(res, "lambda1 = 2 sigma sqrt(2 log p) with sigma set from the snr");

  std::vector<double> q_signal(static_cast<std::size_t>(k));
  for (long j = 0; j < k; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(k - 1);
    q_signal[static_cast<std::size_t>(j)] = 1.0 - 0.5 * std::pow((1.0 - q_last) / 0.5, t);
  }
  if (binary_degenerate(n, q_last)) throw DomainError("q_last gives a constant binary column at this n");
  std::vector<std::string> metrics;
  for (long j = 0; j < k; ++j) metrics.push_back("beta_" + std::to_string(j + 1));
  res.cell_columns = {"rho", "delta"};
  struct Task {
    std::size_t ri;
    long rep;
  };
  std::vector<Task> tasks;
  for (std::size_t ri = 0; ri < rhos.size(); ++ri) {
    for (long r = 0; r < reps; ++r) tasks.push_back({ri, r});
  }
  run_tasks(tasks.size(), spec.threads, res, [&](std::size_t t, TaskOutput& out) {
    const auto [ri, rep] = tasks[t];
    RandomStream rng = detail::stream(spec.seed, 3, ri, rep);
    Matrix x(n, p);
    for (long j = 0; j < p; ++j) {
      const double q = j < k ? q_signal[static_cast<std::size_t>(j)] : rng.uniform(0.5, 0.99);
      x.col(j) = gen_binary(n, q, rng);
    }
    if (rhos[ri] > 0.0) inject_correlation(x, rhos[ri]);
    Vector beta = Vector::Zero(p);
    beta.head(k).setOnes();
    const double sigma = sigma_for_snr(x, beta, snr);
    const Vector y = x * beta + sigma * gen_normal(n, rng);
    const double l1 = 2.0 * sigma * std::sqrt(2.0 * std::log(static_cast<double>(p)));
    for (double d : deltas) {
      const std::vector<Cell> cell{rhos[ri], d};
      const auto plan = detail::plan_for(x, NormalizationStrategy::binary_delta({d, kappa, 0.5, PenaltyKind::LassoComparable}));
      const FitResult f = detail::fit_normalized(x, y, plan, PenaltySpec::lasso(l1));
      detail::note_convergence(f, "rho=" + detail::fmt(rhos[ri]) + " delta=" + detail::fmt(d), out);
      for (long j = 0; j < k; ++j) out.records.push_back({rep, cell, metrics[static_cast<std::size_t>(j)], f.beta(j)});
      double nulls = 0.0;
      for (long j = k; j < p; ++j) nulls += f.beta(j) != 0.0;
      out.records.push_back({rep, cell, "null_selected", nulls});
    }
  });
}

namespace detail {

/// Binary column and quasi-normal column with the given sd; optionally made exactly orthogonal.
inline std::pair<Vector, Vector> mixed_pair(Index n, double q, double sd, bool orthogonal, RandomStream& rng) {
  const Vector x1 = gen_binary(n, q, rng);
  Vector x2 = rescale(gen_quasinormal(n, rng), 0.0, sd);
  if (orthogonal) {
    const Vector c = (x1.array() - x1.mean()).matrix();
    x2 -= (x2.dot(c) / c.squaredNorm()) * c;
    x2 = rescale(x2, 0.0, sd);
  }
  return {x1, x2};
}

}  // namespace detail

// 4. One binary and one quasi-normal feature.
inline void scenario_mixed(const ScenarioSpec& spec, Params& P, ScenarioResult& res) {
  const long n = P.integer("n", 1000);
  const long reps = P.integer("replications", 100);
  const auto qs = P.grid("q", "0.5,0.6,0.7,0.8,0.9,0.95,0.99");
  const auto deltas = P.grid("delta", "0,0.5,1");
  const double sd = P.real("sd", 0.5);
  const double kappa = P.real("kappa", 2.0);
  const double snr = P.real("snr", 0.5);
  const double b1 = P.real("beta1", 1.0);
  const double b2 = P.real("beta2", 1.0);
  const bool noise_free = P.integer("noise_free", 0) != 0;
  P.finish(res.scenario);
  detail::require(n >= 4 && reps >= 1 && sd > 0.0, "need n >= 4, replications >= 1 and sd > 0");
  detail::add_note(res, "binary scaling: s = kappa (1/4)^(1-delta) nu^delta with kappa = " + detail::fmt(kappa) +
                            "; quasi-normal feature standardized");
  detail::add_note(res, "lasso lambda1 = lambda_max / 2; ridge lambda2 = 2 lambda_max");
  if (noise_free) detail::add_note(res, "noise-free: quasi-normal feature orthogonalized against the binary one");

  res.cell_columns = {"model", "q", "delta"};
  const auto use = detail::usable_q(qs, n, res);
  struct Task {
    std::size_t qi;
    long rep;
  };
  std::vector<Task> tasks;
  for (std::size_t qi : use) {
    for (long r = 0; r < reps; ++r) tasks.push_back({qi, r});
  }
  run_tasks(tasks.size(), spec.threads, res, [&](std::size_t t, TaskOutput& out) {
    const auto [qi, rep] = tasks[t];
    RandomStream rng = detail::stream(spec.seed, 4, qi, rep);
    const auto [x1, x2] = detail::mixed_pair(n, qs[qi], sd, noise_free, rng);
    const Matrix x = detail::columns({&x1, &x2});
    Vector beta(2);
    beta << b1, b2;
    Vector y = x * beta;
    if (!noise_free) y += sigma_for_snr(x, beta, snr) * gen_normal(n, rng);
    for (const char* model : {"lasso", "ridge"}) {
      for (double d : deltas) {
        const auto st = NormalizationStrategy::per_feature(
            {NormalizationStrategy::binary_delta({d, kappa, 0.5, PenaltyKind::LassoComparable}),
             NormalizationStrategy::standardize()});
        const auto plan = detail::plan_for(x, st);
        const double lmax = lambda_max(apply(x, plan), y);
        const PenaltySpec pen =
            std::string(model) == "lasso" ? PenaltySpec::lasso(lmax / 2.0) : PenaltySpec::ridge(2.0 * lmax);
        const FitResult f = detail::fit_normalized(x, y, plan, pen);
        const std::vector<Cell> cell{std::string(model), qs[qi], d};
        out.records.push_back({rep, cell, "beta_binary", f.beta(0)});
        out.records.push_back({rep, cell, "beta_normal", f.beta(1)});
      }
    }
  });
}

// 5. Binary x quasi-normal interaction.
inline void scenario_interactions(const ScenarioSpec& spec, Params& P, ScenarioResult& res) {
  const long n = P.integer("n", 1000);
  const long reps = P.integer("replications", 100);
  const auto qs = P.grid("q", "0.5:0.9:5");
  const double sd = P.real("sd", 0.5);
  const double kappa = P.real("kappa", 2.0);
  const double snr = P.real("snr", 1.0);
  const double lambda_factor = P.real("lambda_factor", 0.25);
  const double b1 = P.real("beta1", 1.0);
  const double b2 = P.real("beta2", 1.0);
  const double b3 = P.real("beta3", 20.0);
  P.finish(res.scenario);
  detail::require(n >= 4 && reps >= 1 && sd > 0.0 && lambda_factor > 0.0, "invalid interaction parameters");
  detail::add_note(res, "lambda1 = lambda_factor * n; binary feature scaled by kappa nu with kappa = " +
                            detail::fmt(kappa) + "; quasi-normal feature standardized");
  detail::add_note(res, "response uses the centered interaction (x1 - mean)(x2 - mean)");
  detail::add_note(res, "strategy 1: raw product x1 x2, standardized; strategy 2: centered product, scaled by s1 s2");

  res.cell_columns = {"strategy", "q"};
  const auto use = detail::usable_q(qs, n, res);
  struct Task {
    std::size_t qi;
    long rep;
  };
  std::vector<Task> tasks;
  for (std::size_t qi : use) {
    for (long r = 0; r < reps; ++r) tasks.push_back({qi, r});
  }
  run_tasks(tasks.size(), spec.threads, res, [&](std::size_t t, TaskOutput& out) {
    const auto [qi, rep] = tasks[t];
    RandomStream rng = detail::stream(spec.seed, 5, qi, rep);
    const Vector x1 = gen_binary(n, qs[qi], rng);
    const Vector x2 = rescale(gen_quasinormal(n, rng), 0.0, sd);
    const Vector centered = make_interaction(x1, x2, InteractionPolicy::CenterBoth);
    const Vector raw = make_interaction(x1, x2, InteractionPolicy::RawProduct);
    const Matrix xc = detail::columns({&x1, &x2, &centered});
    Vector beta(3);
    beta << b1, b2, b3;
    const Vector y = xc * beta + sigma_for_snr(xc, beta, snr) * gen_normal(n, rng);
    const double l1 = lambda_factor * static_cast<double>(n);
    const auto binary = NormalizationStrategy::binary_delta({1.0, kappa, 0.5, PenaltyKind::LassoComparable});

    // Strategy 1
    const Matrix xr = detail::columns({&x1, &x2, &raw});
    const auto plan1 = detail::plan_for(
        xr, NormalizationStrategy::per_feature({binary, NormalizationStrategy::standardize(),
                                                NormalizationStrategy::standardize()}));
    // Strategy 2
    NormalizationPlan plan2 = detail::plan_for(
        xc, NormalizationStrategy::per_feature({binary, NormalizationStrategy::standardize(),
                                                NormalizationStrategy::none()}));
    plan2.c(2) = centered.mean();
    plan2.s(2) = interaction_scale(plan2.s(0), plan2.s(1));
    const std::pair<double, const Matrix*> fits[] = {{1.0, &xr}, {2.0, &xc}};
    for (const auto& [strategy, xm] : fits) {
      const FitResult f = detail::fit_normalized(*xm, y, strategy == 1.0 ? plan1 : plan2, PenaltySpec::lasso(l1));
      const std::vector<Cell> cell{strategy, qs[qi]};
      out.records.push_back({rep, cell, "beta_1", f.beta(0)});
      out.records.push_back({rep, cell, "beta_2", f.beta(1)});
      out.records.push_back({rep, cell, "beta_3", f.beta(2)});
    }
  });
}

// 6. Mixed data with class-balance penalty weights.
inline void scenario_weighted(const ScenarioSpec& spec, Params& P, ScenarioResult& res) {
  const long n = P.integer("n", 1000);
  const long reps = P.integer("replications", 100);
  const auto qs = P.grid("q", "0.5,0.6,0.7,0.8,0.9,0.95,0.99");
  const auto omegas = P.grid("omega", "0,0.5,1");
  const double alpha = P.real("alpha", 0.5);
  const double sd = P.real("sd", 0.5);
  const double kappa = P.real("kappa", 2.0);
  const double snr = P.real("snr", 0.5);
  const double b1 = P.real("beta1", 1.0);
  const double b2 = P.real("beta2", 1.0);
  const bool noise_free = P.integer("noise_free", 0) != 0;
  P.finish(res.scenario);
  detail::require(n >= 4 && reps >= 1 && sd > 0.0, "need n >= 4, replications >= 1 and sd > 0");
  detail::require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  if (noise_free) detail::add_note(res, "noise-free: quasi-normal feature orthogonalized against the binary one");
  detail::add_note(res, "binary feature centered only, weights u = v = kappa (1/4)^(1-omega) nu^omega with kappa = " +
                            detail::fmt(kappa) + "; quasi-normal feature standardized with weight 1");
  detail::add_note(res, "lambda1 = alpha lambda = weighted lambda_max / 2, lambda2 = (1 - alpha) lambda");

  res.cell_columns = {"q", "omega"};
  const auto use = detail::usable_q(qs, n, res);
  struct Task {
    std::size_t qi;
    long rep;
  };
  std::vector<Task> tasks;
  for (std::size_t qi : use) {
    for (long r = 0; r < reps; ++r) tasks.push_back({qi, r});
  }
  run_tasks(tasks.size(), spec.threads, res, [&](std::size_t t, TaskOutput& out) {
    const auto [qi, rep] = tasks[t];
    RandomStream rng = detail::stream(spec.seed, 6, qi, rep);
    const auto [x1, x2] = detail::mixed_pair(n, qs[qi], sd, noise_free, rng);
    const Matrix x = detail::columns({&x1, &x2});
    Vector beta(2);
    beta << b1, b2;
    Vector y = x * beta;
    if (!noise_free) y += sigma_for_snr(x, beta, snr) * gen_normal(n, rng);
    const auto plan = detail::plan_for(
        x, NormalizationStrategy::per_feature({NormalizationStrategy::binary_delta({0.0, 1.0, 0.5, PenaltyKind::Plain}),
                                               NormalizationStrategy::standardize()}));
    const Matrix xn = apply(x, plan);
    const double nu = class_balance(x1).nu;
    for (double w : omegas) {
      Vector u(2);
      u << binary_delta_scale(nu, {w, kappa, 0.5, PenaltyKind::LassoComparable}), 1.0;
      const double lambda = lambda_max(xn, y, u) / (2.0 * alpha);
      PenaltySpec pen = PenaltySpec::mixing(alpha, lambda);
      pen.u = u;
      pen.v = u;
      const FitResult f = detail::fit_normalized(x, y, plan, pen);
      const std::vector<Cell> cell{qs[qi], w};
      out.records.push_back({rep, cell, "beta_binary", f.beta(0)});
      out.records.push_back({rep, cell, "beta_normal", f.beta(1)});
    }
  });
}

// 7. Two correlated binary features.
inline void scenario_orthogonality(const ScenarioSpec& spec, Params& P, ScenarioResult& res) {
  const long n = P.integer("n", 10000);
  const long reps = P.integer("replications", 100);
  const double q1 = P.real("q1", 0.5);
  const auto q2s = P.grid("q2", "0.5:0.9:9");
  const auto rhos = P.grid("rho", "0,0.4,0.6");
  const double delta = P.real("delta", 0.5);
  const double kappa = P.real("kappa", 4.0);
  const double snr = P.real("snr", 1.0);
  P.finish(res.scenario);
  detail::require(n >= 4 && reps >= 1, "need n >= 4 and replications >= 1");
  detail::add_note(res, "both features scaled by s = kappa (1/4)^(1-delta) nu^delta with kappa = " + detail::fmt(kappa) +
                            "; lambda1 = lambda_max / 2");

  res.cell_columns = {"q2", "rho"};
  struct Task {
    std::size_t qi, ri;
    long rep;
  };
  std::vector<Task> tasks;
  for (std::size_t qi = 0; qi < q2s.size(); ++qi) {
    for (std::size_t ri = 0; ri < rhos.size(); ++ri) {
      if (binary_pair_overlap(n, q1, q2s[qi], rhos[ri]) < 0) {
        res.skipped.push_back("q2=" + detail::fmt(q2s[qi]) + " rho=" + detail::fmt(rhos[ri]) +
                              ": correlation not attainable for these class balances");
        continue;
      }
      for (long r = 0; r < reps; ++r) tasks.push_back({qi, ri, r});
    }
  }
  run_tasks(tasks.size(), spec.threads, res, [&](std::size_t t, TaskOutput& out) {
    const auto [qi, ri, rep] = tasks[t];
    RandomStream rng = detail::stream(spec.seed, 7, qi * rhos.size() + ri, rep);
    const auto pair = gen_binary_pair(n, q1, q2s[qi], rhos[ri], rng);
    const Matrix x = detail::columns({&pair->first, &pair->second});
    const Vector beta = Vector::Ones(2);
    const Vector y = x * beta + sigma_for_snr(x, beta, snr) * gen_normal(n, rng);
    const auto plan = detail::plan_for(x, NormalizationStrategy::binary_delta({delta, kappa, 0.5, PenaltyKind::LassoComparable}));
    const double lmax = lambda_max(apply(x, plan), y);
    const FitResult f = detail::fit_normalized(x, y, plan, PenaltySpec::lasso(lmax / 2.0));
    const std::vector<Cell> cell{q2s[qi], rhos[ri]};
    out.records.push_back({rep, cell, "beta_1", f.beta(0)});
    out.records.push_back({rep, cell, "beta_2", f.beta(1)});
  });
}

// 8. Power, false discoveries and prediction error.
inline void scenario_power_fdr(const ScenarioSpec& spec, Params& P, ScenarioResult& res) {
  const long n = P.integer("n", 10000);
  const long n_test = P.integer("n_test", 1000);
  const long reps = P.integer("replications", 100);
  const auto ps = P.grid("p", "20,60,100");
  const long k = P.integer("k", 10);
  const double beta_val = P.real("beta", 2.0);
  const double sigma = P.real("sigma", 1.0);
  const auto deltas = P.grid("delta", "0,0.5,1");
  P.finish(res.scenario);
  detail::require(n >= 4 && n_test >= 2 && reps >= 1 && k >= 1, "need n >= 4, n_test >= 2, replications >= 1, k >= 1");
  detail::require(sigma > 0.0, "sigma must be positive");
  for (double p : ps) detail::require(p >= static_cast<double>(k) && std::floor(p) == p, "every p must be an integer >= k");
  detail::add_note(res, "scaling: s = nu^delta; lambda1 = n 4^delta / 10");
  detail::add_note(res, "signal q linear in [0.5, 0.99]; null q log-spaced in [0.5, 0.99]");
  detail::add_note(res, "nmse is measured on a fresh test sample of n_test rows");
  if (n == 10000) detail::add_note(res, "desk scale: n = 10000 instead of 100000");

  res.cell_columns = {"p", "delta"};
  struct Task {
    std::size_t pi;
    long rep;
  };
  std::vector<Task> tasks;
  for (std::size_t pi = 0; pi < ps.size(); ++pi) {
    for (long r = 0; r < reps; ++r) tasks.push_back({pi, r});
  }
  auto class_balances = [&](long p) {
    std::vector<double> q(static_cast<std::size_t>(p));
    for (long j = 0; j < k; ++j) q[static_cast<std::size_t>(j)] = k == 1 ? 0.5 : 0.5 + 0.49 * j / static_cast<double>(k - 1);
    const long m = p - k;
    for (long j = 0; j < m; ++j) {
      const double t = m == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(m - 1);
      q[static_cast<std::size_t>(k + j)] = std::exp(std::log(0.5) + t * (std::log(0.99) - std::log(0.5)));
    }
    return q;
  };
  std::vector<Index> truth(static_cast<std::size_t>(k));
  for (long j = 0; j < k; ++j) truth[static_cast<std::size_t>(j)] = j;
  run_tasks(tasks.size(), spec.threads, res, [&](std::size_t t, TaskOutput& out) {
    const auto [pi, rep] = tasks[t];
    const long p = static_cast<long>(ps[pi]);
    RandomStream rng = detail::stream(spec.seed, 8, pi, rep);
    const auto q = class_balances(p);
    Matrix x(n, p), xt(n_test, p);
    for (long j = 0; j < p; ++j) x.col(j) = gen_binary(n, q[static_cast<std::size_t>(j)], rng);
    for (long j = 0; j < p; ++j) xt.col(j) = gen_binary(n_test, q[static_cast<std::size_t>(j)], rng);
    Vector beta = Vector::Zero(p);
    beta.head(k).setConstant(beta_val);
    const Vector y = x * beta + sigma * gen_normal(n, rng);
    const Vector yt = xt * beta + sigma * gen_normal(n_test, rng);
    for (double d : deltas) {
      const auto plan = detail::plan_for(x, NormalizationStrategy::binary_delta({d, 1.0, 0.5, PenaltyKind::Plain}));
      const FitResult f =
          detail::fit_normalized(x, y, plan, PenaltySpec::lasso(static_cast<double>(n) * std::pow(4.0, d) / 10.0));
      detail::note_convergence(f, "p=" + std::to_string(p) + " delta=" + detail::fmt(d), out);
      const Vector pred = (xt * f.beta).array() + f.intercept;
      const auto support = f.support();
      const std::vector<Cell> cell{ps[pi], d};
      out.records.push_back({rep, cell, "power_all", static_cast<double>(power_all(support, truth))});
      out.records.push_back({rep, cell, "fdr", fdr(support, truth)});
      out.records.push_back({rep, cell, "nmse", nmse(yt, pred)});
    }
  });
}

// 9. Validation-tuned lasso path.
inline void scenario_predictive(const ScenarioSpec& spec, Params& P, ScenarioResult& res) {
  const long n = P.integer("n", 300);
  const long p = P.integer("p", 1000);
  const long k = P.integer("k", 10);
  const long reps = P.integer("replications", 25);
  const auto qs = P.grid("q", "0.5,0.9,0.99");
  const auto snrs = P.grid("snr", "log:0.05:6:10");
  const auto deltas = P.grid("delta", "0,0.5,1");
  const long path_count = P.integer("path_count", 100);
  const double path_ratio = P.real("path_ratio", 0.01);
  P.finish(res.scenario);
  detail::require(n >= 9 && reps >= 1 && k >= 1 && p >= k, "need n >= 9, replications >= 1 and 1 <= k <= p");
  detail::add_note(res, "scaling: s = 2 (1/4)^(1-delta) nu^delta; signals share class balance q, null q uniform in [0.5, 0.99]");
  detail::add_note(res, "equal train/validation/test thirds; lambda picked on validation, ties toward larger lambda");
  detail::add_note(res, "columns constant on the training rows are dropped before fitting");
  if (reps == 25) detail::add_note(res, "desk scale: 25 replications instead of 100");

  res.cell_columns = {"q", "snr", "delta"};
  const auto use = detail::usable_q(qs, n, res);
  struct Task {
    std::size_t qi, si;
    long rep;
  };
  std::vector<Task> tasks;
  for (std::size_t qi : use) {
    for (std::size_t si = 0; si < snrs.size(); ++si) {
      for (long r = 0; r < reps; ++r) tasks.push_back({qi, si, r});
    }
  }
  const long third = n / 3;
  std::vector<Index> train, val, test;
  for (long i = 0; i < n; ++i) (i < third ? train : (i < 2 * third ? val : test)).push_back(i);
  run_tasks(tasks.size(), spec.threads, res, [&](std::size_t t, TaskOutput& out) {
    const auto [qi, si, rep] = tasks[t];
    RandomStream rng = detail::stream(spec.seed, 9, qi * snrs.size() + si, rep);
    Matrix x(n, p);
    for (long j = 0; j < p; ++j) x.col(j) = gen_binary(n, j < k ? qs[qi] : rng.uniform(0.5, 0.99), rng);
    Vector beta = Vector::Zero(p);
    beta.head(k).setOnes();
    const Vector y = x * beta + sigma_for_snr(x, beta, snrs[si]) * gen_normal(n, rng);
    const Dataset data(x, y);
    Vector yv(static_cast<Index>(val.size())), yt(static_cast<Index>(test.size()));
    for (std::size_t i = 0; i < val.size(); ++i) yv(static_cast<Index>(i)) = y(val[i]);
    for (std::size_t i = 0; i < test.size(); ++i) yt(static_cast<Index>(i)) = y(test[i]);
    for (double d : deltas) {
      const auto tn = normalize_training(data, train, NormalizationStrategy::binary_delta({d, 2.0, 0.5, PenaltyKind::LassoComparable}));
      const auto path = fit_path(tn.train, PathShape{}, PathGrid{static_cast<int>(path_count), path_ratio, std::nullopt});
      std::size_t best = 0;
      double best_err = std::numeric_limits<double>::infinity();
      for (std::size_t m = 0; m < path.size(); ++m) {
        const double e = nmse(yv, predict_rows(data, val, tn, path[m].fit.beta_norm, path[m].fit.intercept_norm));
        if (e < best_err) {
          best_err = e;
          best = m;
        }
      }
      const auto& f = path[best].fit;
      const std::vector<Cell> cell{qs[qi], snrs[si], d};
      out.records.push_back({rep, cell, "nmse", nmse(yt, predict_rows(data, test, tn, f.beta_norm, f.intercept_norm))});
      out.records.push_back({rep, cell, "support", static_cast<double>(f.support().size())});
    }
  });
}

// 10. Max-abs scaling of normal data.
inline void scenario_maxabs(const ScenarioSpec& spec, Params& P, ScenarioResult& res) {
  const long reps = P.integer("replications", 100);
  const auto ns = P.grid("n", "10,100,1000");
  const auto n_fit = P.grid("n_fit", "100,1000,10000");
  const double q = P.real("q", 0.5);
  const double lambda_factor = P.real("lambda_factor", 0.1);
  const double b1 = P.real("beta1", 1.0);
  const double b2 = P.real("beta2", 1.0);
  const double sigma = P.real("sigma", 1.0);
  P.finish(res.scenario);
  detail::require(reps >= 1 && sigma >= 0.0 && lambda_factor > 0.0, "invalid max-abs parameters");
  for (double n : ns) detail::require(n >= 2 && std::floor(n) == n, "every n must be an integer >= 2");
  for (double n : n_fit) {
    detail::require(n >= 4 && std::floor(n) == n, "every n_fit must be an integer >= 4");
    detail::require(!binary_degenerate(static_cast<Index>(n), q), "q gives a constant binary column");
  }
  detail::add_note(res, "part a: max |x_i| of n standard normals; part b: lasso with lambda1 = lambda_factor n, "
                        "max-abs scaling of a binary and a standard normal feature");

  res.cell_columns = {"part", "n"};
  struct Task {
    bool fit;
    std::size_t ni;
    long rep;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    for (long r = 0; r < reps; ++r) tasks.push_back({false, i, r});
  }
  for (std::size_t i = 0; i < n_fit.size(); ++i) {
    for (long r = 0; r < reps; ++r) tasks.push_back({true, i, r});
  }
  run_tasks(tasks.size(), spec.threads, res, [&](std::size_t t, TaskOutput& out) {
    const auto [is_fit, ni, rep] = tasks[t];
    if (!is_fit) {
      const Index n = static_cast<Index>(ns[ni]);
      RandomStream rng = detail::stream(spec.seed, 10, ni, rep);
      out.records.push_back({rep, {std::string("a"), ns[ni]}, "max_abs", gen_normal(n, rng).cwiseAbs().maxCoeff()});
      return;
    }
    const Index n = static_cast<Index>(n_fit[ni]);
    RandomStream rng = detail::stream(spec.seed, 10, (std::uint64_t{1} << 16) | ni, rep);
    const Vector x1 = gen_binary(n, q, rng);
    const Vector x2 = gen_normal(n, rng);
    const Matrix x = detail::columns({&x1, &x2});
    Vector beta(2);
    beta << b1, b2;
    const Vector y = x * beta + sigma * gen_normal(n, rng);
    const auto plan = detail::plan_for(x, NormalizationStrategy::max_abs());
    const FitResult f = detail::fit_normalized(x, y, plan, PenaltySpec::lasso(lambda_factor * static_cast<double>(n)));
    const std::vector<Cell> cell{std::string("b"), n_fit[ni]};
    out.records.push_back({rep, cell, "beta_binary", f.beta(0)});
    out.records.push_back({rep, cell, "beta_normal", f.beta(1)});
  });
  for (double n : ns) {
    res.references.push_back({{std::string("a"), n}, "max_abs",
                              oracle::maxabs_gumbel(0.0, 1.0, static_cast<long>(n)).mean_approx});
  }
}

/// Resolves defaults, runs the scenario and fills in the manifest.
inline ScenarioResult run_scenario(const ScenarioSpec& spec) {
  const ScenarioInfo& info = find_scenario(spec.scenario);
  ScenarioResult res;
  res.scenario = info.name;
  res.manifest["notes"] = io::json::array();
  Params P(spec.params);
  switch (info.id) {
    case 1: scenario_selection(spec, P, res); break;
    case 2: scenario_bias_var(spec, P, res); break;
    case 3: scenario_decreasing(spec, P, res); break;
    case 4: scenario_mixed(spec, P, res); break;
    case 5: scenario_interactions(spec, P, res); break;
    case 6: scenario_weighted(spec, P, res); break;
    case 7: scenario_orthogonality(spec, P, res); break;
    case 8: scenario_power_fdr(spec, P, res); break;
    case 9: scenario_predictive(spec, P, res); break;
    case 10: scenario_maxabs(spec, P, res); break;
  }
  io::json m = io::json::object();
  m["tool"] = "normreg";
  m["version"] = kVersion;
  m["command"] = "simulate";
  m["scenario"] = info.name;
  m["scenario_id"] = info.id;
  m["seed"] = spec.seed;
  m["parameters"] = P.resolved();
  m["overrides"] = P.overrides();
  m["notes"] = res.manifest["notes"];
  m["skipped"] = res.skipped;
  m["records"] = res.records.size();
  res.manifest = std::move(m);
  return res;
}

}  // namespace normreg::simulate
