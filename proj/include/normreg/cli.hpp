#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "normreg/evaluate.hpp"
#include "normreg/io.hpp"
#include "normreg/normalize.hpp"
#include "normreg/oracle.hpp"
#include "normreg/simulate.hpp"
#include "normreg/solver.hpp"
#include "normreg/version.hpp"

namespace normreg::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

/// Bad flag values or combinations.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Solver stopped before meeting the tolerance and --strict was given.
class NumericalError : public Error {
 public:
  using Error::Error;
};

namespace detail {

using io::json;
using io::Cell;

struct InputFlags {
  std::string path;
  std::string format;  // csv|tsv|sparse, empty means by extension
  std::string response;
  bool no_header = false;
  std::vector<std::string> kinds;  // name=binary|continuous
};

struct NormalizeFlags {
  std::string strategy = "std";
  std::string continuous = "std";
  std::optional<double> delta, kappa, q0;
  std::string penalty_kind = "lasso";
};

struct OutputFlags {
  std::string out;
  std::string format;
};

inline void add_input(CLI::App* app, InputFlags& f) {
  app->add_option("-i,--input", f.path, "Input data file")->required();
  app->add_option("--input-format", f.format, "csv, tsv or sparse (index:value); default from the extension")
      ->check(CLI::IsMember({"csv", "tsv", "sparse"}));
  app->add_option("--response", f.response, "Response column name or 1-based index (default: last column)");
  app->add_flag("--no-header", f.no_header, "Delimited input has no header row");
  app->add_option("--kind", f.kinds, "Override a column kind, NAME=binary|continuous (repeatable)");
}

inline void add_normalize(CLI::App* app, NormalizeFlags& f) {
  app->add_option("--normalize", f.strategy, "none|std|l1|maxabs|minmax|robust|binary-delta")
      ->capture_default_str();
  app->add_option("--continuous-normalize", f.continuous,
                  "Strategy for continuous columns when --normalize is binary-delta")
      ->capture_default_str();
  app->add_option("--delta", f.delta, "Binary-delta exponent")->check(CLI::NonNegativeNumber);
  app->add_option("--kappa", f.kappa, "Binary-delta comparability multiplier")->check(CLI::PositiveNumber);
  app->add_option("--q0", f.q0, "Binary-delta anchor class balance")->check(CLI::Range(0.0, 1.0));
  app->add_option("--penalty-kind", f.penalty_kind, "Binary-delta anchoring: plain|lasso|ridge")
      ->check(CLI::IsMember({"plain", "lasso", "ridge"}))
      ->capture_default_str();
}

inline void add_output(CLI::App* app, OutputFlags& f) {
  app->add_option("-o,--out", f.out, "Output path (default: stdout, with the manifest on stderr)");
  app->add_option("--format", f.format, "csv or json (default from the output extension, else csv)")
      ->check(CLI::IsMember({"csv", "json"}));
}

inline std::vector<double> flag_grid(const std::string& flag, const std::string& text) {
  try {
    return simulate::parse_grid(text);
  } catch (const Error& e) {
    throw UsageError(flag + ": " + e.what());
  }
}

inline std::string extension(const std::string& path) {
  std::string e = std::filesystem::path(path).extension().string();
  for (char& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return e;
}

inline Dataset load(const InputFlags& f) {
  std::string format = f.format;
  if (format.empty()) {
    const std::string e = extension(f.path);
    format = e == ".tsv" ? "tsv" : (e == ".svm" || e == ".libsvm" || e == ".sparse") ? "sparse" : "csv";
  }
  if (format == "sparse" && (!f.response.empty() || f.no_header || !f.kinds.empty())) {
    throw UsageError("--response, --no-header and --kind apply to delimited input only");
  }
  io::TableSchema schema;
  schema.delimiter = format == "tsv" ? '\t' : ',';
  schema.header = !f.no_header;
  schema.response = f.response;
  for (const auto& k : f.kinds) {
    const auto eq = k.find('=');
    const std::string what = eq == std::string::npos ? "" : k.substr(eq + 1);
    if (eq == std::string::npos || eq == 0 || (what != "binary" && what != "continuous")) {
      throw UsageError("--kind: expected NAME=binary|continuous, got '" + k + "'");
    }
    schema.kinds[k.substr(0, eq)] = what == "binary" ? FeatureKind::Binary : FeatureKind::Continuous;
  }
  try {
    return format == "sparse" ? io::read_sparse_labeled(f.path) : io::read_delimited(f.path, schema);
  } catch (const Error& e) {
    throw Error(f.path + ": " + e.what());
  }
}

inline NormalizationStrategy simple_strategy(const std::string& flag, const std::string& name) {
  StrategyKind k{};
  try {
    k = parse_strategy_kind(name);
  } catch (const Error& e) {
    throw UsageError(flag + ": " + e.what());
  }
  if (k == StrategyKind::BinaryDelta) throw UsageError(flag + ": binary-delta is not allowed here");
  return NormalizationStrategy(k);
}

inline BinaryDeltaParams delta_params(const NormalizeFlags& f) {
  BinaryDeltaParams p;
  p.delta = f.delta.value_or(p.delta);
  p.kappa = f.kappa.value_or(p.kappa);
  p.q0 = f.q0.value_or(p.q0);
  p.penalty = parse_penalty_kind(f.penalty_kind);
  if (!(p.q0 > 0.0 && p.q0 < 1.0)) throw UsageError("--q0 must lie strictly inside (0, 1)");
  return p;
}

/// Checks flag combinations before any data is read.
inline void check_normalize(const NormalizeFlags& f) {
  if (f.strategy == "binary-delta") {
    simple_strategy("--continuous-normalize", f.continuous);
    delta_params(f);
    return;
  }
  simple_strategy("--normalize", f.strategy);
  if (f.delta || f.kappa || f.q0) throw UsageError("--delta, --kappa and --q0 require --normalize binary-delta");
}

inline NormalizationStrategy build_strategy(const NormalizeFlags& f, const Dataset& data) {
  if (f.strategy != "binary-delta") return simple_strategy("--normalize", f.strategy);
  return NormalizationStrategy::by_kind(data, NormalizationStrategy::binary_delta(delta_params(f)),
                                        simple_strategy("--continuous-normalize", f.continuous));
}

inline json normalize_manifest(const NormalizeFlags& f) {
  json m = json::object();
  m["strategy"] = f.strategy;
  if (f.strategy == "binary-delta") {
    const BinaryDeltaParams p = delta_params(f);
    m["continuous"] = f.continuous;
    m["delta"] = p.delta;
    m["kappa"] = p.kappa;
    m["q0"] = p.q0;
    m["penalty_kind"] = f.penalty_kind;
  }
  return m;
}

inline json base_manifest(const std::string& command, std::uint64_t seed) {
  json m = json::object();
  m["tool"] = "normreg";
  m["version"] = kVersion;
  m["command"] = command;
  m["seed"] = seed;
  return m;
}

inline void emit(io::Table table, const OutputFlags& f, std::ostream& out, std::ostream& err) {
  std::string format = f.format;
  if (format.empty()) format = extension(f.out) == ".json" ? "json" : "csv";
  const io::Format fmt = io::parse_format(format);
  if (!f.out.empty()) {
    io::write_results(table, f.out, fmt);
    return;
  }
  if (fmt == io::Format::Json) {
    out << io::to_json(table).dump(2) << '\n';
  } else {
    out << io::to_csv(table);
    err << table.manifest.dump(2) << '\n';
  }
}

struct PenaltyFlags {
  std::optional<double> lambda1, lambda2, alpha, lambda;
  std::optional<double> omega;
};

inline void add_penalty(CLI::App* app, PenaltyFlags& f) {
  auto* l1 = app->add_option("--lambda1", f.lambda1, "l1 penalty")->check(CLI::NonNegativeNumber);
  auto* l2 = app->add_option("--lambda2", f.lambda2, "l2 penalty")->check(CLI::NonNegativeNumber);
  auto* a = app->add_option("--alpha", f.alpha, "Mixing parameter: lambda1 = alpha lambda, lambda2 = (1 - alpha) lambda")
                ->check(CLI::Range(0.0, 1.0));
  auto* l = app->add_option("--lambda", f.lambda, "Overall penalty used with --alpha")->check(CLI::NonNegativeNumber);
  a->excludes(l1)->excludes(l2);
  l->excludes(l1)->excludes(l2);
  app->add_option("--omega", f.omega, "Penalty weights u = v = anchored nu^omega on binary columns")
      ->check(CLI::NonNegativeNumber);
}

inline void add_solver(CLI::App* app, FitOptions& o, bool& strict) {
  app->add_option("--tolerance", o.tolerance, "Convergence tolerance on the largest coefficient change")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--max-sweeps", o.max_sweeps, "Sweep limit")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_flag("--strict", strict, "Exit with status 3 if the solver does not converge");
}

inline PenaltySpec build_penalty(const PenaltyFlags& f) {
  if (f.alpha.has_value() != f.lambda.has_value()) throw UsageError("--alpha and --lambda must be given together");
  if (f.alpha) return PenaltySpec::mixing(*f.alpha, *f.lambda);
  if (!f.lambda1 && !f.lambda2) throw UsageError("give --lambda1 and/or --lambda2, or --alpha with --lambda");
  return PenaltySpec::elastic_net(f.lambda1.value_or(0.0), f.lambda2.value_or(0.0));
}

/// u = v weights for --omega; continuous columns keep weight one.
inline Vector omega_weights(const Dataset& data, double omega, const NormalizeFlags& nf) {
  BinaryDeltaParams p = nf.strategy == "binary-delta" ? delta_params(nf) : BinaryDeltaParams{};
  if (nf.strategy != "binary-delta") {
    p.kappa = nf.kappa.value_or(p.kappa);
    p.penalty = parse_penalty_kind(nf.penalty_kind);
  }
  p.delta = omega;
  Vector w = Vector::Ones(data.cols());
  for (Index j = 0; j < data.cols(); ++j) {
    if (data.kind(j) != FeatureKind::Binary) continue;
    const ClassBalance b = class_balance(data.x().col(j));
    const double nu = b.q - b.q * b.q;
    if (!(nu > 0.0)) throw Error("--omega: binary column '" + data.name(j) + "' is constant");
    w(j) = binary_delta_scale(nu, p);
  }
  return w;
}

inline void check_converged(const FitResult& r, bool strict, std::ostream& err, const std::string& where) {
  if (r.converged) return;
  const std::string msg = where + ": solver stopped after " + std::to_string(r.sweeps_used) +
                          " sweeps with largest change " + io::detail::format_number(r.max_change);
  if (strict) throw NumericalError(msg);
  err << "warning: " << msg << '\n';
}

inline int cmd_fit(const InputFlags& in, const NormalizeFlags& nf, const PenaltyFlags& pf, const FitOptions& opts,
            bool strict, const OutputFlags& of, std::ostream& out, std::ostream& err) {
  check_normalize(nf);
  PenaltySpec pen = build_penalty(pf);
  const Dataset data = load(in);
  const NormalizationPlan plan = compute_plan(data, build_strategy(nf, data));
  const Dataset norm = apply(data, plan);
  if (pf.omega) pen.u = pen.v = omega_weights(data, *pf.omega, nf);
  const double lmax = lambda_max(norm, pen.u, opts.fit_intercept);
  const FitResult r = fit(norm, pen, opts, plan);
  check_converged(r, strict, err, "fit");

  io::Table t;
  t.columns = {"feature", "kind", "center", "scale", "beta_normalized", "beta"};
  t.rows.push_back({std::string("(intercept)"), std::string(""), 0.0, 1.0, r.intercept_norm, r.intercept});
  json support = json::array();
  for (Index j = 0; j < data.cols(); ++j) {
    t.rows.push_back({data.name(j), std::string(to_string(data.kind(j))), plan.c(j), plan.s(j), r.beta_norm(j),
                      r.beta(j)});
    if (r.beta_norm(j) != 0.0) support.push_back(data.name(j));
  }
  json m = base_manifest("fit", 0);
  m["input"] = in.path;
  m["rows"] = data.rows();
  m["columns"] = data.cols();
  m["normalization"] = normalize_manifest(nf);
  m["lambda1"] = pen.lambda1;
  m["lambda2"] = pen.lambda2;
  if (pf.alpha) {
    m["alpha"] = *pf.alpha;
    m["lambda"] = *pf.lambda;
  }
  if (pf.omega) m["omega"] = *pf.omega;
  m["lambda_max"] = lmax;
  m["support"] = support;
  m["support_size"] = support.size();
  m["converged"] = r.converged;
  m["sweeps"] = r.sweeps_used;
  m["objective"] = r.objective_value;
  m["tolerance"] = opts.tolerance;
  t.manifest = std::move(m);
  err << "support: " << support.size() << " of " << data.cols() << " features (lambda_max "
      << io::detail::format_number(lmax) << ")\n";
  emit(std::move(t), of, out, err);
  return kOk;
}

struct PathFlags {
  std::optional<double> alpha, lambda2, start;
  int count = 100;
  double ratio = 1e-2;
  std::optional<double> omega;
};

inline int cmd_path(const InputFlags& in, const NormalizeFlags& nf, const PathFlags& pf, const FitOptions& opts,
             bool strict, const OutputFlags& of, std::ostream& out, std::ostream& err) {
  check_normalize(nf);
  if (pf.count < 2) throw UsageError("--count must be at least 2");
  if (!(pf.ratio > 0.0 && pf.ratio < 1.0)) throw UsageError("--ratio must lie in (0, 1)");
  PathShape shape;
  if (pf.lambda2) {
    shape.kind = PathShape::Kind::FixedLambda2;
    shape.lambda2 = *pf.lambda2;
  } else {
    shape.alpha = pf.alpha.value_or(1.0);
    if (shape.alpha == 0.0 && !pf.start) throw UsageError("--alpha 0 needs an explicit --start");
  }
  const Dataset data = load(in);
  const NormalizationPlan plan = compute_plan(data, build_strategy(nf, data));
  const Dataset norm = apply(data, plan);
  Vector w;
  if (pf.omega) w = omega_weights(data, *pf.omega, nf);
  PathGrid grid{pf.count, pf.ratio, pf.start};
  const auto path = fit_path(norm, shape, grid, opts, w, w);

  io::Table t;
  t.columns = {"lambda_index", "lambda", "lambda1", "lambda2", "df", "converged", "feature", "beta"};
  bool all_converged = true;
  for (std::size_t k = 0; k < path.size(); ++k) {
    const auto& pt = path[k];
    check_converged(pt.fit, strict, err, "path point " + std::to_string(k));
    all_converged = all_converged && pt.fit.converged;
    const Coefficients c = backtransform(pt.fit.beta_norm, pt.fit.intercept_norm, plan);
    const double df = static_cast<double>(pt.fit.support().size());
    const double conv = pt.fit.converged ? 1.0 : 0.0;
    const double idx = static_cast<double>(k);
    t.rows.push_back({idx, pt.lambda, pt.penalty.lambda1, pt.penalty.lambda2, df, conv, std::string("(intercept)"),
                      c.intercept});
    for (Index j = 0; j < data.cols(); ++j) {
      t.rows.push_back({idx, pt.lambda, pt.penalty.lambda1, pt.penalty.lambda2, df, conv, data.name(j), c.beta(j)});
    }
  }
  json m = base_manifest("path", 0);
  m["input"] = in.path;
  m["normalization"] = normalize_manifest(nf);
  if (pf.lambda2) {
    m["lambda2"] = *pf.lambda2;
  } else {
    m["alpha"] = shape.alpha;
  }
  if (pf.omega) m["omega"] = *pf.omega;
  m["count"] = pf.count;
  m["ratio"] = pf.ratio;
  m["start"] = path.front().lambda;
  m["converged"] = all_converged;
  m["tolerance"] = opts.tolerance;
  t.manifest = std::move(m);
  emit(std::move(t), of, out, err);
  return kOk;
}

struct CVFlags {
  std::string model = "lasso";
  double alpha = 0.5;
  int folds = 10;
  int repeats = 10;
  std::uint64_t seed = 1;
  int count = 100;
  double ratio = 1e-2;
  std::string deltas = "0,0.25,0.5,0.75,1";
  std::vector<std::string> strategies;
  std::string penalty_kind = "lasso";
  unsigned threads = 1;
};

inline int cmd_cv(const InputFlags& in, const CVFlags& cf, const FitOptions& opts, const OutputFlags& of,
           std::ostream& out, std::ostream& err) {
  ModelSpec model;
  if (cf.model == "ridge") {
    model.kind = ModelSpec::Kind::Ridge;
  } else if (cf.model == "elnet") {
    model.kind = ModelSpec::Kind::ElasticNet;
    model.alpha = cf.alpha;
  }
  if (cf.folds < 2) throw UsageError("--folds must be at least 2");
  if (cf.repeats < 1) throw UsageError("--repeats must be at least 1");
  if (cf.count < 2) throw UsageError("--count must be at least 2");
  if (!(cf.ratio > 0.0 && cf.ratio < 1.0)) throw UsageError("--ratio must lie in (0, 1)");
  const auto deltas = cf.deltas == "none" ? std::vector<double>{} : flag_grid("--deltas", cf.deltas);
  std::vector<NormalizationStrategy> extra;
  for (const auto& s : cf.strategies) extra.push_back(simple_strategy("--strategy", s));
  if (deltas.empty() && extra.empty()) throw UsageError("--deltas none needs at least one --strategy");
  const Dataset data = load(in);

  CVPlan plan;
  plan.folds = cf.folds;
  plan.repeats = cf.repeats;
  plan.seed = cf.seed;
  plan.grid = PathGrid{cf.count, cf.ratio, std::nullopt};
  plan.fit = opts;
  plan.threads = cf.threads;
  plan.strategies = extra;
  if (!deltas.empty()) add_delta_grid(plan, data, deltas, parse_penalty_kind(cf.penalty_kind));
  const CVResult r = cross_validate(data, plan, model);

  io::Table t;
  t.columns = {"normalization", "lambda_index", "mean_nmse"};
  for (std::size_t s = 0; s < r.labels.size(); ++s) {
    for (std::size_t k = 0; k < r.mean_nmse[s].size(); ++k) {
      t.rows.push_back({r.labels[s], static_cast<double>(k), r.mean_nmse[s][k]});
    }
  }
  json m = base_manifest("cv", cf.seed);
  m["input"] = in.path;
  m["model"] = model.name();
  m["folds"] = cf.folds;
  m["repeats"] = cf.repeats;
  m["count"] = cf.count;
  m["ratio"] = cf.ratio;
  m["lambda_grid"] = "fractions of each training fold's lambda_max";
  m["normalizations"] = r.labels;
  m["best_normalization"] = r.labels[r.best_normalization];
  m["best_lambda_index"] = r.best_lambda_index;
  m["best_mean_nmse"] = r.best_mean_nmse;
  m["skipped_folds"] = r.skipped;
  t.manifest = std::move(m);
  err << "best: " << r.labels[r.best_normalization] << " at lambda index " << r.best_lambda_index
      << " (mean NMSE " << io::detail::format_number(r.best_mean_nmse) << ")\n";
  emit(std::move(t), of, out, err);
  return kOk;
}

struct SimulateFlags {
  std::string scenario;
  std::uint64_t seed = 1;
  std::vector<std::string> sets;
  std::string config;
  unsigned threads = 1;
  bool summary = false;
};

inline int cmd_simulate(const SimulateFlags& sf, const OutputFlags& of, std::ostream& out, std::ostream& err) {
  simulate::ScenarioSpec spec;
  spec.scenario = sf.scenario;
  spec.seed = sf.seed;
  spec.threads = sf.threads;
  if (!sf.config.empty()) {
    try {
      spec.params = simulate::read_config(sf.config);
    } catch (const Error& e) {
      throw UsageError("--config " + sf.config + ": " + e.what());
    }
  }
  for (const auto& kv : sf.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set: expected KEY=VALUE, got '" + kv + "'");
    spec.params[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  simulate::ScenarioResult res;
  try {
    res = simulate::run_scenario(spec);
  } catch (const DomainError& e) {
    throw UsageError(std::string("--scenario/--set: ") + e.what());
  }
  io::Table t = sf.summary ? simulate::summary_table(res) : res.table();
  t.manifest = res.manifest;
  t.manifest["threads"] = sf.threads;
  t.manifest["output"] = sf.summary ? "summary" : "records";
  for (const auto& s : res.skipped) err << "skipped: " << s << '\n';
  emit(std::move(t), of, out, err);
  return kOk;
}

struct OracleFlags {
  std::string curve;
  double beta = 1.0;
  double n = 100.0;
  double sigma = 1.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::string delta;
  std::string omega;
  std::string q_grid = "0.5:0.99:50";
  std::string n_grid = "10,100,1000";
  double mu = 0.0;
  bool anchor = false;
  double kappa = 2.0;
  double q0 = 0.5;
  std::string penalty_kind = "lasso";
};

inline int cmd_oracle(const OracleFlags& of_, const OutputFlags& of, std::ostream& out, std::ostream& err) {
  json m = base_manifest("oracle", 0);
  m["curve"] = of_.curve;
  io::Table t;
  if (of_.curve == "gumbel") {
    if (!(of_.sigma > 0.0)) throw UsageError("--sigma must be positive for the gumbel curve");
    t.columns = {"n", "a_n", "b_n", "mean_approx"};
    for (double n : flag_grid("--n-grid", of_.n_grid)) {
      if (!(n >= 2.0 && std::floor(n) == n)) throw UsageError("--n-grid: every n must be an integer >= 2");
      const auto g = oracle::maxabs_gumbel(of_.mu, of_.sigma, static_cast<long>(n));
      t.rows.push_back({n, g.a_n, g.b_n, g.mean_approx});
    }
    m["mu"] = of_.mu;
    m["sigma"] = of_.sigma;
    m["n_grid"] = of_.n_grid;
    t.manifest = std::move(m);
    emit(std::move(t), of, out, err);
    return kOk;
  }
  if (!of_.delta.empty() && !of_.omega.empty()) throw UsageError("--delta and --omega are mutually exclusive");
  const bool omega = !of_.omega.empty();
  const std::string exp_flag = omega ? "--omega" : "--delta";
  const auto exps = flag_grid(exp_flag, omega ? of_.omega : (of_.delta.empty() ? "0,0.5,1" : of_.delta));
  const std::string exp_name = omega ? "omega" : "delta";

  oracle::BinaryFeatureModel base;
  base.beta_star = of_.beta;
  base.n = of_.n;
  base.sigma_eps = of_.curve == "noiseless" ? 0.0 : of_.sigma;
  base.lambda1 = of_.lambda1;
  base.lambda2 = of_.lambda2;
  if (of_.anchor) {
    if (!(of_.q0 > 0.0 && of_.q0 < 1.0)) throw UsageError("--q0 must lie strictly inside (0, 1)");
    base.anchor = oracle::Anchor{of_.kappa, of_.q0, parse_penalty_kind(of_.penalty_kind)};
  }
  auto model_at = [&](double q, double e) {
    oracle::BinaryFeatureModel mdl = base;
    mdl.q = q;
    mdl.scaling = omega ? oracle::Scaling::omega(e) : oracle::Scaling::delta(e);
    return mdl;
  };
  m["beta"] = of_.beta;
  m["n"] = of_.n;
  m["sigma"] = base.sigma_eps;
  m["lambda1"] = of_.lambda1;
  m["lambda2"] = of_.lambda2;
  m[exp_name] = exps;
  if (base.anchor) m["anchor"] = {{"kappa", of_.kappa}, {"q0", of_.q0}, {"penalty_kind", of_.penalty_kind}};

  try {
    if (of_.curve == "limits") {
      t.columns = {exp_name, "mean_limit", "variance_limit", "selection_limit"};
      for (double e : exps) {
        const auto lim = oracle::asymptotic_limits(model_at(0.5, e));
        const Cell var = lim.variance_limit.infinite ? Cell(std::string("inf")) : Cell(lim.variance_limit.value);
        const Cell sel = lim.selection_limit ? Cell(*lim.selection_limit) : Cell(std::string(""));
        t.rows.push_back({e, lim.mean_limit, var, sel});
      }
    } else {
      using Curve = double (*)(const oracle::BinaryFeatureModel&);
      static const std::map<std::string, Curve> curves{
          {"selection", [](const oracle::BinaryFeatureModel& x) { return oracle::selection_probability(x); }},
          {"estimate", [](const oracle::BinaryFeatureModel& x) { return oracle::expected_estimate(x); }},
          {"bias", [](const oracle::BinaryFeatureModel& x) { return oracle::estimator_bias(x); }},
          {"variance", [](const oracle::BinaryFeatureModel& x) { return oracle::estimator_variance(x); }},
          {"mse", [](const oracle::BinaryFeatureModel& x) { return oracle::estimator_mse(x); }},
          {"noiseless", [](const oracle::BinaryFeatureModel& x) { return oracle::noiseless_estimate(x); }},
      };
      const Curve f = curves.at(of_.curve);
      const auto qs = flag_grid("--q-grid", of_.q_grid);
      t.columns = {"q", exp_name, "value"};
      for (double e : exps) {
        for (double q : qs) t.rows.push_back({q, e, f(model_at(q, e))});
      }
      m["q_grid"] = of_.q_grid;
    }
  } catch (const DomainError& e) {
    throw UsageError("--curve " + of_.curve + ": " + e.what());
  } catch (const UnsupportedError& e) {
    throw UsageError("--curve " + of_.curve + ": " + e.what());
  }
  t.manifest = std::move(m);
  emit(std::move(t), of, out, err);
  return kOk;
}

inline int cmd_normalize(const InputFlags& in, const NormalizeFlags& nf, const OutputFlags& of, std::ostream& out,
                  std::ostream& err) {
  check_normalize(nf);
  const Dataset data = load(in);
  const NormalizationPlan plan = compute_plan(data, build_strategy(nf, data));
  io::Table t;
  t.columns = {"feature", "kind", "class_balance", "center", "scale"};
  for (Index j = 0; j < data.cols(); ++j) {
    const Cell q = data.kind(j) == FeatureKind::Binary ? Cell(class_balance(data.x().col(j)).q) : Cell(std::string(""));
    t.rows.push_back({data.name(j), std::string(to_string(data.kind(j))), q, plan.c(j), plan.s(j)});
  }
  json m = base_manifest("normalize", 0);
  m["input"] = in.path;
  m["rows"] = data.rows();
  m["normalization"] = normalize_manifest(nf);
  t.manifest = std::move(m);
  emit(std::move(t), of, out, err);
  return kOk;
}

}  // namespace detail

/// Parses argv, runs one subcommand and maps failures to exit codes.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace detail;
  CLI::App app{"Elastic-net fitting, normalization and simulation for binary and mixed features", "normreg"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  InputFlags in;
  NormalizeFlags nf;
  OutputFlags of;
  PenaltyFlags pf;
  FitOptions opts;
  bool strict = false;

  auto* fit_cmd = app.add_subcommand("fit", "Fit one elastic net on a normalized dataset");
  add_input(fit_cmd, in);
  add_normalize(fit_cmd, nf);
  add_penalty(fit_cmd, pf);
  add_solver(fit_cmd, opts, strict);
  add_output(fit_cmd, of);

  PathFlags path_flags;
  auto* path_cmd = app.add_subcommand("path", "Fit a warm-started regularization path");
  add_input(path_cmd, in);
  add_normalize(path_cmd, nf);
  auto* pa = path_cmd->add_option("--alpha", path_flags.alpha, "Mixing parameter (default 1, the lasso)")
                 ->check(CLI::Range(0.0, 1.0));
  path_cmd->add_option("--lambda2", path_flags.lambda2, "Fixed l2 penalty; the path then runs over lambda1")
      ->check(CLI::NonNegativeNumber)
      ->excludes(pa);
  path_cmd->add_option("--count", path_flags.count, "Grid points")->capture_default_str();
  path_cmd->add_option("--ratio", path_flags.ratio, "Smallest over largest penalty")->capture_default_str();
  path_cmd->add_option("--start", path_flags.start, "Largest penalty (default: where the first feature enters)")
      ->check(CLI::PositiveNumber);
  path_cmd->add_option("--omega", path_flags.omega, "Penalty weights u = v = anchored nu^omega on binary columns")
      ->check(CLI::NonNegativeNumber);
  add_solver(path_cmd, opts, strict);
  add_output(path_cmd, of);

  CVFlags cv_flags;
  auto* cv_cmd = app.add_subcommand("cv", "Repeated k-fold cross-validation over normalizations and penalties");
  add_input(cv_cmd, in);
  cv_cmd->add_option("--model", cv_flags.model, "lasso|ridge|elnet")
      ->check(CLI::IsMember({"lasso", "ridge", "elnet"}))
      ->capture_default_str();
  cv_cmd->add_option("--alpha", cv_flags.alpha, "Mixing parameter for elnet")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cv_cmd->add_option("--folds", cv_flags.folds, "Folds per repeat")->capture_default_str();
  cv_cmd->add_option("--repeats", cv_flags.repeats, "Repeats")->capture_default_str();
  cv_cmd->add_option("--seed", cv_flags.seed, "Fold seed")->capture_default_str();
  cv_cmd->add_option("--count", cv_flags.count, "Penalty grid points per fold")->capture_default_str();
  cv_cmd->add_option("--ratio", cv_flags.ratio, "Smallest over largest penalty")->capture_default_str();
  cv_cmd->add_option("--deltas", cv_flags.deltas, "Binary-delta exponents to compare, or 'none'")
      ->capture_default_str();
  cv_cmd->add_option("--penalty-kind", cv_flags.penalty_kind, "Binary-delta anchoring: plain|lasso|ridge")
      ->check(CLI::IsMember({"plain", "lasso", "ridge"}))
      ->capture_default_str();
  cv_cmd->add_option("--strategy", cv_flags.strategies, "Extra whole-design strategy to compare (repeatable)");
  cv_cmd->add_option("--threads", cv_flags.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  cv_cmd->add_option("--tolerance", opts.tolerance, "Convergence tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_output(cv_cmd, of);

  SimulateFlags sim_flags;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a simulation scenario from the catalogue");
  std::string scenario_help = "Scenario name or number:";
  for (const auto& s : simulate::catalogue()) scenario_help += " " + std::to_string(s.id) + "=" + s.name;
  sim_cmd->add_option("--scenario", sim_flags.scenario, scenario_help)->required();
  sim_cmd->add_option("--seed", sim_flags.seed, "Master seed")->capture_default_str();
  sim_cmd->add_option("--set", sim_flags.sets, "Parameter override KEY=VALUE (repeatable; wins over --config)");
  sim_cmd->add_option("--config", sim_flags.config, "File of KEY = VALUE overrides")->check(CLI::ExistingFile);
  sim_cmd->add_option("--threads", sim_flags.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  sim_cmd->add_flag("--summary", sim_flags.summary, "Write per-cell summaries instead of raw records");
  add_output(sim_cmd, of);

  OracleFlags or_flags;
  auto* or_cmd = app.add_subcommand("oracle", "Evaluate closed-form curves for a single binary feature");
  or_cmd->add_option("--curve", or_flags.curve, "selection|estimate|bias|variance|mse|noiseless|limits|gumbel")
      ->required()
      ->check(CLI::IsMember({"selection", "estimate", "bias", "variance", "mse", "noiseless", "limits", "gumbel"}));
  or_cmd->add_option("--beta", or_flags.beta, "True coefficient")->capture_default_str();
  or_cmd->add_option("--n", or_flags.n, "Sample size")->check(CLI::PositiveNumber)->capture_default_str();
  or_cmd->add_option("--sigma", or_flags.sigma, "Noise standard deviation")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  or_cmd->add_option("--lambda1", or_flags.lambda1, "l1 penalty")->check(CLI::NonNegativeNumber)->capture_default_str();
  or_cmd->add_option("--lambda2", or_flags.lambda2, "l2 penalty")->check(CLI::NonNegativeNumber)->capture_default_str();
  or_cmd->add_option("--delta", or_flags.delta, "Scaling exponent grid (default 0,0.5,1)");
  or_cmd->add_option("--omega", or_flags.omega, "Penalty-weight exponent grid, instead of --delta");
  or_cmd->add_option("--q-grid", or_flags.q_grid, "Class-balance grid: a:b:count, log:a:b:count or a list")
      ->capture_default_str();
  or_cmd->add_option("--n-grid", or_flags.n_grid, "Sample sizes for the gumbel curve")->capture_default_str();
  or_cmd->add_option("--mu", or_flags.mu, "Normal mean for the gumbel curve")->capture_default_str();
  or_cmd->add_flag("--anchor", or_flags.anchor, "Apply the comparability anchor (--kappa, --q0, --penalty-kind)");
  or_cmd->add_option("--kappa", or_flags.kappa, "Anchor multiplier")->check(CLI::PositiveNumber)->capture_default_str();
  or_cmd->add_option("--q0", or_flags.q0, "Anchor class balance")->capture_default_str();
  or_cmd->add_option("--penalty-kind", or_flags.penalty_kind, "plain|lasso|ridge")
      ->check(CLI::IsMember({"plain", "lasso", "ridge"}))
      ->capture_default_str();
  add_output(or_cmd, of);

  auto* norm_cmd = app.add_subcommand("normalize", "Print per-column centering and scaling factors");
  add_input(norm_cmd, in);
  add_normalize(norm_cmd, nf);
  add_output(norm_cmd, of);

  app.footer(
      "Exit status: 0 success, 1 usage error, 2 data error, 3 solver did not converge (with --strict).\n"
      "CSV output writes the manifest to <out>.manifest.json; JSON output embeds it.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    err << "run with --help for usage\n";
    return kUsage;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(in, nf, pf, opts, strict, of, out, err);
    if (path_cmd->parsed()) return cmd_path(in, nf, path_flags, opts, strict, of, out, err);
    if (cv_cmd->parsed()) return cmd_cv(in, cv_flags, opts, of, out, err);
    if (sim_cmd->parsed()) return cmd_simulate(sim_flags, of, out, err);
    if (or_cmd->parsed()) return cmd_oracle(or_flags, of, out, err);
    if (norm_cmd->parsed()) return cmd_normalize(in, nf, of, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}

}  // namespace normreg::cli
