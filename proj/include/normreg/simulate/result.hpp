#pragma once

// Tidy scenario output and its per-cell summary.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "normreg/core/parallel.hpp"
#include "normreg/io.hpp"

namespace normreg::simulate {

using io::Cell;

struct ScenarioSpec {
  std::string scenario;
  std::uint64_t seed = 1;
  std::map<std::string, std::string> params;  // includes n, p, replications where relevant
  unsigned threads = 1;
};

struct Record {
  long replication;
  std::vector<Cell> cell;
  std::string metric;
  double value;
};

/// Closed-form value for a (cell, metric): the expected value and, when known, the variance.
struct Reference {
  std::vector<Cell> cell;
  std::string metric;
  double mean;
  double variance = std::numeric_limits<double>::quiet_NaN();
};

struct SummaryRow {
  std::vector<Cell> cell;
  std::string metric;
  long count = 0;
  double mean = 0.0;
  double sd = 0.0;  // uncorrected
  double se = 0.0;
  double ref_mean = std::numeric_limits<double>::quiet_NaN();
  double ref_variance = std::numeric_limits<double>::quiet_NaN();
};

struct ScenarioResult {
  std::string scenario;
  std::vector<std::string> cell_columns;
  std::vector<Record> records;
  std::vector<Reference> references;
  std::vector<std::string> skipped;
  io::json manifest = io::json::object();

  io::Table table() const {
    io::Table t;
    t.columns = {"scenario", "replication"};
    t.columns.insert(t.columns.end(), cell_columns.begin(), cell_columns.end());
    t.columns.push_back("metric");
    t.columns.push_back("value");
    t.manifest = manifest;
    for (const Record& r : records) {
      std::vector<Cell> row{scenario, static_cast<double>(r.replication)};
      row.insert(row.end(), r.cell.begin(), r.cell.end());
      row.emplace_back(r.metric);
      row.emplace_back(r.value);
      t.rows.push_back(std::move(row));
    }
    return t;
  }
};

/// Mean, uncorrected sd and standard error per (cell, metric), in first-seen order.
inline std::vector<SummaryRow> summarize(const ScenarioResult& res) {
  using Key = std::pair<std::vector<Cell>, std::string>;
  std::map<Key, std::size_t> index;
  std::vector<SummaryRow> rows;
  std::vector<double> sum, sumsq;
  for (const Record& r : res.records) {
    Key key{r.cell, r.metric};
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, rows.size()).first;
      rows.push_back({r.cell, r.metric});
      sum.push_back(0.0);
      sumsq.push_back(0.0);
    }
    const std::size_t k = it->second;
    rows[k].count += 1;
    sum[k] += r.value;
  }
  for (std::size_t k = 0; k < rows.size(); ++k) rows[k].mean = sum[k] / static_cast<double>(rows[k].count);
  for (const Record& r : res.records) {
    const std::size_t k = index.at({r.cell, r.metric});
    sumsq[k] += (r.value - rows[k].mean) * (r.value - rows[k].mean);
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double n = static_cast<double>(rows[k].count);
    rows[k].sd = std::sqrt(sumsq[k] / n);
    rows[k].se = rows[k].sd / std::sqrt(n);
  }
  for (const Reference& ref : res.references) {
    const auto it = index.find({ref.cell, ref.metric});
    if (it == index.end()) continue;
    rows[it->second].ref_mean = ref.mean;
    rows[it->second].ref_variance = ref.variance;
  }
  return rows;
}

inline io::Table summary_table(const ScenarioResult& res) {
  io::Table t;
  t.columns = {"scenario"};
  t.columns.insert(t.columns.end(), res.cell_columns.begin(), res.cell_columns.end());
  for (const char* c : {"metric", "count", "mean", "sd", "se", "reference_mean", "reference_variance"}) {
    t.columns.emplace_back(c);
  }
  t.manifest = res.manifest;
  for (const SummaryRow& s : summarize(res)) {
    std::vector<Cell> row{res.scenario};
    row.insert(row.end(), s.cell.begin(), s.cell.end());
    row.emplace_back(s.metric);
    row.emplace_back(static_cast<double>(s.count));
    row.emplace_back(s.mean);
    row.emplace_back(s.sd);
    row.emplace_back(s.se);
    row.emplace_back(s.ref_mean);
    row.emplace_back(s.ref_variance);
    t.rows.push_back(std::move(row));
  }
  return t;
}

struct TaskOutput {
  std::vector<Record> records;
  std::vector<std::string> problems;
};

/// Runs `body(task, out)` for every task and appends outputs to `res` in task
/// order. A task that throws contributes no records, only a problem note.
template <class Body>
void run_tasks(std::size_t count, unsigned threads, ScenarioResult& res, Body body) {
  std::vector<TaskOutput> parts(count);
  parallel_for(count, threads, [&](std::size_t t) {
    try {
      body(t, parts[t]);
    } catch (const Error& e) {
      parts[t].records.clear();
      parts[t].problems.push_back("task " + std::to_string(t) + ": " + e.what());
    }
  });
  std::size_t total = res.records.size();
  for (const auto& p : parts) total += p.records.size();
  res.records.reserve(total);
  for (auto& p : parts) {
    for (auto& r : p.records) res.records.push_back(std::move(r));
    for (auto& s : p.problems) res.skipped.push_back(std::move(s));
  }
}

}  // namespace normreg::simulate
