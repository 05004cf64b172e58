#pragma once

#include <atomic>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mcal/core.hpp"
#include "mcal/reduction.hpp"
#include "mcal/specfile.hpp"
#include "mcal/streams.hpp"

namespace mcal {

struct ResultRow {
  long long T = 0;
  std::uint64_t seed = 0;
  int m = 0;
  double epsilon = 0.0;
  double K = 0.0;
  double regret = 0.0;
  double wall_ms = 0.0;
};

// Results file: '#' comment block echoing the configuration, one header row,
// then one delimited row per (T, seed) cell.
struct ResultsTable {
  std::vector<std::string> config_echo;
  std::vector<ResultRow> rows;

  std::string to_text() const {
    std::ostringstream out;
    for (const std::string& line : config_echo) out << "# " << line << "\n";
    out << "T,seed,m,epsilon,K,regret,wall_ms\n";
    for (const ResultRow& r : rows) {
      out << r.T << "," << r.seed << "," << r.m << "," << format_double(r.epsilon) << ","
          << format_double(r.K) << "," << format_double(r.regret) << ","
          << format_double(r.wall_ms) << "\n";
    }
    return out.str();
  }

  static ResultsTable from_text(const std::string& text) {
    ResultsTable table;
    std::istringstream in(text);
    std::string line;
    bool saw_header = false;
    while (std::getline(in, line)) {
      const std::string t = trim(line);
      if (t.empty()) continue;
      if (t[0] == '#') {
        table.config_echo.push_back(trim(t.substr(1)));
        continue;
      }
      if (!saw_header) {
        if (t != "T,seed,m,epsilon,K,regret,wall_ms") {
          throw std::invalid_argument("results table: unexpected header");
        }
        saw_header = true;
        continue;
      }
      const std::vector<std::string> f = split_csv_line(t);
      if (f.size() != 7) throw std::invalid_argument("results table: ragged row");
      ResultRow r;
      r.T = std::stoll(f[0]);
      r.seed = std::stoull(f[1]);
      r.m = static_cast<int>(std::stol(f[2]));
      r.epsilon = std::strtod(f[3].c_str(), nullptr);
      r.K = std::strtod(f[4].c_str(), nullptr);
      r.regret = std::strtod(f[5].c_str(), nullptr);
      r.wall_ms = std::strtod(f[6].c_str(), nullptr);
      table.rows.push_back(r);
    }
    if (!saw_header) throw std::invalid_argument("results table: missing header");
    return table;
  }
};

struct SweepConfig {
  LearnerKind learner = LearnerKind::kLinOlpo;
  std::vector<long long> t_values;        // strictly increasing
  std::vector<std::uint64_t> seeds;       // run per T
  int m_override = 0;                     // 0 -> learner default rule
  double epsilon_override = -1.0;         // < 0 -> default rule
  int workers = 1;
  bool record_timing = true;              // false -> wall_ms written as 0 (reproducible files)

  void validate() const {
    if (t_values.empty() || seeds.empty()) {
      throw std::invalid_argument("SweepConfig: empty T or seed list");
    }
    for (std::size_t i = 1; i < t_values.size(); ++i) {
      if (t_values[i] <= t_values[i - 1]) {
        throw std::invalid_argument("SweepConfig: T values must be strictly increasing");
      }
    }
    if (workers < 1) throw std::invalid_argument("SweepConfig: workers < 1");
  }
};

inline ResultRow run_cell(const SweepConfig& cfg, const HypothesisClass& H,
                          const StreamSpec& stream_spec, long long T, std::uint64_t seed) {
  ExperimentConfig ec;
  ec.learner = cfg.learner;
  ec.T = T;
  ec.m = cfg.m_override;
  ec.seed = seed;
  ec.epsilon = cfg.epsilon_override;
  if (cfg.learner == LearnerKind::kGftpl) {
    if (stream_spec.universe.empty()) {
      throw std::invalid_argument("run_cell: gftpl sweep needs a transductive universe");
    }
    ec.separator = stream_spec.universe;
  }
  StreamSpec per_cell = stream_spec;
  per_cell.seed = seed;
  const int m = ec.m > 0 ? ec.m : default_grid_m(ec.learner, T);
  auto stream = make_stream(per_cell, std::shared_ptr<const HypothesisClass>(&H, [](auto*) {}),
                            PredictionGrid(m));
  const ExperimentResult res = run_experiment(ec, H, *stream);
  return ResultRow{T,     seed,          res.m_used,
                   res.epsilon_used,     res.k.max_k,
                   res.regret.regret,    cfg.record_timing ? res.wall_ms : 0.0};
}

// One row per (T, seed), cells parallelized up to the worker count; each cell
// owns its generators so the table is identical regardless of scheduling.
inline ResultsTable run_sweep(const SweepConfig& cfg, const HypothesisClass& H,
                              const StreamSpec& stream_spec) {
  cfg.validate();
  struct Cell {
    long long T;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (long long T : cfg.t_values) {
    for (std::uint64_t s : cfg.seeds) cells.push_back({T, s});
  }

  std::vector<ResultRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      rows[i] = run_cell(cfg, H, stream_spec, cells[i].T, cells[i].seed);
    }
  };
  if (cfg.workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < cfg.workers; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  ResultsTable table;
  table.config_echo = {
      std::string("learner: ") + learner_name(cfg.learner),
      "m_rule: " + (cfg.m_override > 0
                        ? "fixed " + std::to_string(cfg.m_override)
                        : std::string(cfg.learner == LearnerKind::kLinOlpo
                                          ? "ceil(T^(1/3))"
                                          : "ceil(T^(1/4))")),
      "epsilon_rule: " + (cfg.epsilon_override >= 0.0
                              ? format_double(cfg.epsilon_override)
                              : std::string("T^(-1/4)")),
      "step_sizes: eta_ogd = sqrt(M/T), eta_mwu = sqrt(ln|H|/T)",
      "noise: Unif[0, sqrt(T)]",
      "stream: " + stream_spec.kind,
      "class_size: " + std::to_string(H.size()),
      "bound: " + format_double(H.bound()),
  };
  table.rows = std::move(rows);
  return table;
}

// Least-squares fit of log mean-K against log T.
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<long long> t_values;
  std::vector<double> mean_k;
  std::vector<double> stderr_k;
};

inline RateFit fit_rate(const ResultsTable& table) {
  std::vector<long long> ts;
  std::vector<double> sums, sq_sums;
  std::vector<int> counts;
  for (const ResultRow& r : table.rows) {
    std::size_t i = 0;
    while (i < ts.size() && ts[i] != r.T) ++i;
    if (i == ts.size()) {
      ts.push_back(r.T);
      sums.push_back(0.0);
      sq_sums.push_back(0.0);
      counts.push_back(0);
    }
    sums[i] += r.K;
    sq_sums[i] += r.K * r.K;
    ++counts[i];
  }
  if (ts.size() < 3) throw std::invalid_argument("fit_rate: need >= 3 distinct T values");

  RateFit fit;
  fit.t_values = ts;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double mean = sums[i] / counts[i];
    fit.mean_k.push_back(mean);
    const double var = counts[i] > 1
                           ? std::max(0.0, (sq_sums[i] - counts[i] * mean * mean) /
                                               (counts[i] - 1))
                           : 0.0;
    fit.stderr_k.push_back(std::sqrt(var / counts[i]));
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double mean = fit.mean_k[i];
    if (!(mean > 0.0)) {
      std::cerr << "fit_rate: nonpositive mean K at T=" << ts[i]
                << ", flooring at machine epsilon\n";
      mean = DBL_EPSILON;
    }
    const double x = std::log(static_cast<double>(ts[i]));
    const double y = std::log(mean);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

}  // namespace mcal
