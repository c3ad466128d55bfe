// Benchmark orchestration: parameter sweeps with warmup and optional
// smoothen ordering, wall-clock collection, CSV output, and a
// self-contained SVG line chart.

#pragma once

#include "joins/bench/benchmark.hpp"

#include <iosfwd>

namespace joins::bench {

struct HarnessConfig {
  std::string benchmark;
  std::int64_t min_param = 0;
  std::int64_t max_param = 0;
  std::int64_t param_step = 1;
  int repetitions = 1;
  int warmup = 0;
  std::vector<AlgorithmId> algorithms;
  bool smoothen = false;
  BenchConfig bench;
  std::string out_dir = ".";
  bool quiet = false;
};

/// Wall times in milliseconds for each (algorithm, main parameter) cell.
struct ResultsTable {
  std::vector<AlgorithmId> algorithms;
  std::vector<std::int64_t> params;
  int repetitions = 0;
  // times_ms[algorithm][param][repetition]
  std::vector<std::vector<std::vector<double>>> times_ms;

  double average(std::size_t algo, std::size_t param) const;
  /// Sample standard deviation ((n-1) denominator); 0 for a single rep.
  double stddev(std::size_t algo, std::size_t param) const;
};

/// One executed repetition, in execution order; used to verify warmup and
/// smoothen scheduling.
struct ScheduleEntry {
  AlgorithmId algorithm;
  std::int64_t param = 0;
  int repetition = 0;
  bool warmup = false;

  bool operator==(const ScheduleEntry&) const = default;
};

/// Runs the configured sweep. Per algorithm: `warmup` untimed repetitions at
/// max_param, then timed repetitions ordered algorithm-param-repetition, or
/// algorithm-repetition-param when smoothen is set. Only the run phase is
/// timed. Throws UsageError for unknown names or bad ranges.
ResultsTable run_sweep(const HarnessConfig& config,
                       std::vector<ScheduleEntry>* schedule_log = nullptr,
                       std::vector<RunReport>* reports = nullptr);

/// CSV layout: header row; column 1 the main parameter; per algorithm one
/// column per repetition, then average, then standard deviation. Values in
/// milliseconds, fixed 3 decimals.
void write_csv(const ResultsTable& table, std::ostream& out);
void write_csv_file(const ResultsTable& table, const std::string& path);

/// SVG line chart: one series per algorithm, x = main parameter, y =
/// average milliseconds, with per-point vertices and a legend.
void render_plot(const ResultsTable& table, std::ostream& out);
void render_plot_file(const ResultsTable& table, const std::string& path);

std::vector<AlgorithmId> parse_algorithm_list(const std::string& csv);

}  // namespace joins::bench
