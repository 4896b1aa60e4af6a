#ifndef GPMANIP_BENCHMARK_HPP_
#define GPMANIP_BENCHMARK_HPP_

#include <map>
#include <string>
#include <vector>

#include "gpmanip/scenario.hpp"

namespace gpmanip {

/// Aggregated Table-I-style row for one method.
struct BenchmarkRow {
  std::string method;
  double manip_avg = 0.0, manip_min = 0.0, manip_max = 0.0;
  double vel_max = 0.0, vel_avg = 0.0;
  double time_total = 0.0, time_opt = 0.0, time_init = 0.0;
  int solved = 0;
  int runs = 0;
};

struct BenchmarkResult {
  std::vector<BenchmarkRow> rows;  // fixed method order
  /// Average manipulability of the interpolated planner per IK candidate
  /// count (candidate sets are nested, so the sweep is seed-stable).
  std::vector<std::pair<int, double>> k_sweep;
};

struct BenchmarkOptions {
  int runs = 50;
  int jobs = 1;
  std::vector<int> ik_sweep = {1, 5, 10, 20};
};

/// Randomized reaching benchmark: for each seeded run, draw a feasible start,
/// then compare the planner (with and without interpolated factors) against
/// the DLS and null-space tracking baselines on the scenario's position goal.
BenchmarkResult run_benchmark(const ScenarioConfig& scenario,
                              const BenchmarkOptions& opts);

/// Deterministic serialization (no wall-clock fields).
std::string benchmark_metrics_json(const BenchmarkResult& result);
/// Full serialization including timing columns.
std::string benchmark_report_json(const BenchmarkResult& result);
/// Human-readable table.
std::string benchmark_table(const BenchmarkResult& result);

}  // namespace gpmanip

#endif  // GPMANIP_BENCHMARK_HPP_
