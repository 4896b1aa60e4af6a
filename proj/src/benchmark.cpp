#include "gpmanip/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <json.hpp>

#include "gpmanip/baselines.hpp"
#include "gpmanip/kinematics.hpp"

namespace gpmanip {

namespace {

struct MethodSample {
  RunMetrics metrics;
  RunTimings timings;
};

struct RunSample {
  std::map<std::string, MethodSample> methods;
  std::map<int, double> k_manip_avg;
};

RunMetrics tracker_metrics(const TrackerTrace& trace) {
  RunMetrics m;
  m.manip_avg = trace.mean_manip;
  m.manip_min = trace.min_manip;
  m.manip_max = trace.max_manip;
  m.vel_max = trace.max_vel;
  m.vel_avg = trace.mean_vel;
  m.solved = trace.solved;
  return m;
}

RunSample run_one(const ScenarioConfig& scenario, const ChainModel& model,
                  const SDFGrid* sdf, const BenchmarkOptions& opts, int run) {
  if (scenario.goal.type != GoalSpec::Type::kPosition) {
    throw std::invalid_argument("benchmark requires a position goal");
  }
  const int n = model.dof();
  const Vec3 x_goal = scenario.goal.position;
  const GPParams params = GPParams::isotropic(
      n, scenario.qc_scale, scenario.total_time, scenario.num_support);

  const uint64_t run_seed =
      scenario.seed + 0x9E3779B97F4A7C15ULL * static_cast<uint64_t>(run + 1);
  std::mt19937_64 rng(run_seed);
  const Vec start = sample_feasible_config(model, rng);

  RunSample sample;

  // Planner, sweeping the number of IK initializations. With a fixed seed
  // the restart stream is identical across K, so candidate sets are nested.
  int max_k = scenario.ik.num_solutions;
  for (int k : opts.ik_sweep) max_k = std::max(max_k, k);
  std::vector<int> sweep = opts.ik_sweep;
  if (std::find(sweep.begin(), sweep.end(), max_k) == sweep.end()) {
    sweep.push_back(max_k);
  }

  for (int k : sweep) {
    IKOptions ik = scenario.ik;
    ik.num_solutions = k;
    ik.seed = run_seed;

    const auto t0 = std::chrono::steady_clock::now();
    InitResult init = best_initialization(model, start, x_goal, params, ik,
                                          scenario.interp_per_interval);
    const double t_init =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();

    ScenarioConfig cfg = scenario;
    cfg.start = start;
    const FactorGraph graph = assemble(cfg, model, sdf, init.trajectory);
    GPTrajectory solution = init.trajectory;
    const SolveReport report = solve(graph, solution, model, scenario.solver);

    RunMetrics metrics = score_trajectory(model, solution);
    metrics.solved =
        report.converged && !report.diverged &&
        (x_goal - fk_position(model, solution.theta(params.num_support - 1)))
                .norm() < 1e-2;
    metrics.iterations = report.iterations;
    sample.k_manip_avg[k] = metrics.manip_avg;

    if (k == max_k) {
      MethodSample ms;
      ms.metrics = metrics;
      ms.timings = {t_init + report.wall_time, report.wall_time, t_init};
      sample.methods["planner_interp"] = ms;

      // Support-state factors only.
      ScenarioConfig no_interp = cfg;
      no_interp.interp_per_interval = 0;
      const FactorGraph graph_ni = assemble(no_interp, model, sdf, init.trajectory);
      GPTrajectory sol_ni = init.trajectory;
      const SolveReport rep_ni = solve(graph_ni, sol_ni, model, scenario.solver);
      MethodSample ni;
      ni.metrics = score_trajectory(model, sol_ni);
      ni.metrics.solved =
          rep_ni.converged && !rep_ni.diverged &&
          (x_goal - fk_position(model, sol_ni.theta(params.num_support - 1)))
                  .norm() < 1e-2;
      ni.metrics.iterations = rep_ni.iterations;
      ni.timings = {t_init + rep_ni.wall_time, rep_ni.wall_time, t_init};
      sample.methods["planner_no_interp"] = ni;
    }
  }

  TrackerOptions topts;
  const TrackerTrace dls =
      run_tracker(model, start, x_goal, topts, TrackerPolicy::kDampedLeastSquares);
  MethodSample dls_sample;
  dls_sample.metrics = tracker_metrics(dls);
  dls_sample.timings = {dls.wall_time, dls.wall_time, 0.0};
  sample.methods["dls"] = dls_sample;

  const TrackerTrace ns =
      run_tracker(model, start, x_goal, topts, TrackerPolicy::kNullspaceManip);
  MethodSample ns_sample;
  ns_sample.metrics = tracker_metrics(ns);
  ns_sample.timings = {ns.wall_time, ns.wall_time, 0.0};
  sample.methods["nullspace"] = ns_sample;

  return sample;
}

}  // namespace

BenchmarkResult run_benchmark(const ScenarioConfig& scenario,
                              const BenchmarkOptions& opts) {
  if (opts.runs < 1) throw std::invalid_argument("runs must be >= 1");

  ChainModel model = ChainModel::from_json_file(scenario.robot_path);
  model.set_m_max(estimate_m_max(model, scenario.m_max_samples, scenario.seed));

  std::optional<SDFGrid> sdf;
  if (!scenario.obstacles.empty()) {
    Vec3 lo = Vec3::Constant(-2.0), hi = Vec3::Constant(2.0);
    if (scenario.sdf.bounds_min) lo = *scenario.sdf.bounds_min;
    if (scenario.sdf.bounds_max) hi = *scenario.sdf.bounds_max;
    sdf.emplace(build_sdf(scenario.obstacles, lo, hi, scenario.sdf.cell_size));
  }
  const SDFGrid* sdf_ptr = sdf ? &*sdf : nullptr;

  std::vector<RunSample> samples(static_cast<size_t>(opts.runs));
  const int jobs = std::max(1, opts.jobs);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= opts.runs) break;
      samples[static_cast<size_t>(r)] =
          run_one(scenario, model, sdf_ptr, opts, r);
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  BenchmarkResult result;
  const std::vector<std::string> order = {"planner_interp", "planner_no_interp",
                                          "dls", "nullspace"};
  for (const std::string& method : order) {
    BenchmarkRow row;
    row.method = method;
    for (const RunSample& s : samples) {
      const MethodSample& ms = s.methods.at(method);
      row.manip_avg += ms.metrics.manip_avg;
      row.manip_min += ms.metrics.manip_min;
      row.manip_max += ms.metrics.manip_max;
      row.vel_max = std::max(row.vel_max, ms.metrics.vel_max);
      row.vel_avg += ms.metrics.vel_avg;
      row.time_total += ms.timings.total;
      row.time_opt += ms.timings.opt;
      row.time_init += ms.timings.init;
      row.solved += ms.metrics.solved ? 1 : 0;
      ++row.runs;
    }
    const double inv = 1.0 / row.runs;
    row.manip_avg *= inv;
    row.manip_min *= inv;
    row.manip_max *= inv;
    row.vel_avg *= inv;
    row.time_total *= inv;
    row.time_opt *= inv;
    row.time_init *= inv;
    result.rows.push_back(row);
  }

  for (const auto& [k, _] : samples.front().k_manip_avg) {
    double avg = 0.0;
    for (const RunSample& s : samples) avg += s.k_manip_avg.at(k);
    result.k_sweep.emplace_back(k, avg / opts.runs);
  }
  return result;
}

namespace {

nlohmann::ordered_json result_json(const BenchmarkResult& result,
                                   bool with_times) {
  nlohmann::ordered_json doc;
  doc["methods"] = nlohmann::ordered_json::array();
  for (const BenchmarkRow& row : result.rows) {
    nlohmann::ordered_json j;
    j["method"] = row.method;
    j["manip"] = {{"avg", row.manip_avg},
                  {"min", row.manip_min},
                  {"max", row.manip_max}};
    j["velocity"] = {{"max", row.vel_max}, {"avg", row.vel_avg}};
    if (with_times) {
      j["time"] = {{"total", row.time_total},
                   {"opt", row.time_opt},
                   {"init", row.time_init}};
    }
    j["solved"] = row.solved;
    j["runs"] = row.runs;
    doc["methods"].push_back(j);
  }
  doc["ik_sweep"] = nlohmann::ordered_json::array();
  for (const auto& [k, avg] : result.k_sweep) {
    doc["ik_sweep"].push_back({{"candidates", k}, {"manip_avg", avg}});
  }
  return doc;
}

}  // namespace

std::string benchmark_metrics_json(const BenchmarkResult& result) {
  return result_json(result, false).dump(2);
}

std::string benchmark_report_json(const BenchmarkResult& result) {
  return result_json(result, true).dump(2);
}

std::string benchmark_table(const BenchmarkResult& result) {
  std::ostringstream out;
  out << "method             avg_m   min_m   max_m   max_v   avg_v   total   "
         "opt     init    solved\n";
  for (const BenchmarkRow& row : result.rows) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "%-18s %-7.4f %-7.4f %-7.4f %-7.4f %-7.4f %-7.4f %-7.4f "
                  "%-7.4f %d/%d\n",
                  row.method.c_str(), row.manip_avg, row.manip_min,
                  row.manip_max, row.vel_max, row.vel_avg, row.time_total,
                  row.time_opt, row.time_init, row.solved, row.runs);
    out << buf;
  }
  out << "\nIK candidate sweep (avg manipulability):\n";
  for (const auto& [k, avg] : result.k_sweep) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "  K=%-3d %.4f\n", k, avg);
    out << buf;
  }
  return out.str();
}

}  // namespace gpmanip
