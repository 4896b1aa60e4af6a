// Scenario-driven front end: plan single scenarios, run the randomized
// reaching benchmark, and check analytic gradients against finite
// differences. Exit codes: 0 ok, 1 check/convergence failure, 2 usage or
// config error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gpmanip/benchmark.hpp"
#include "gpmanip/gradcheck.hpp"
#include "gpmanip/kinematics.hpp"
#include "gpmanip/scenario.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

int log_level() {
  const char* env = std::getenv("MANIP_LOG");
  if (!env) return 1;
  try {
    return std::stoi(env);
  } catch (...) {
    return 1;
  }
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[gpmanip] " << msg << "\n";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_error_json(const std::filesystem::path& out_dir,
                      const std::string& kind, const std::string& message) {
  if (out_dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  std::ofstream out(out_dir / "error.json");
  if (out) out << j.dump(2) << "\n";
}

int cmd_plan(const std::string& scenario_path, const std::string& out_dir,
             double sample_hz) {
  namespace fs = std::filesystem;
  gpmanip::ScenarioConfig scenario;
  try {
    scenario = gpmanip::ScenarioConfig::from_json_file(scenario_path);
  } catch (const std::exception& e) {
    std::cerr << "error: invalid scenario: " << e.what() << "\n";
    write_error_json(out_dir, "config", e.what());
    return 2;
  }

  try {
    gpmanip::ChainModel model =
        gpmanip::ChainModel::from_json_file(scenario.robot_path);
    model.set_m_max(gpmanip::estimate_m_max(model, scenario.m_max_samples,
                                            scenario.seed));
    log_info("model loaded: " + std::to_string(model.dof()) +
             " DOF, m_max=" + std::to_string(model.m_max()));

    gpmanip::PlanResult result = [&] {
      if (!scenario.obstacles.empty()) {
        return gpmanip::run_plan(scenario);
      }
      return gpmanip::run_plan(scenario, model, nullptr);
    }();

    fs::create_directories(out_dir);
    const int per_interval =
        std::max(1, static_cast<int>(sample_hz * result.solution.params().dt()));
    result.solution.write_csv(
        (fs::path(out_dir) / "trajectory.csv").string(), per_interval,
        [&](const gpmanip::Vec& q) {
          return gpmanip::manipulability(model, q).m;
        });
    write_file(fs::path(out_dir) / "metrics.json",
               gpmanip::metrics_to_json(result.metrics) + "\n");

    nlohmann::ordered_json rep;
    rep["iterations"] = result.report.iterations;
    rep["initial_cost"] = result.report.initial_cost;
    rep["final_cost"] = result.report.final_cost;
    rep["converged"] = result.report.converged;
    rep["diverged"] = result.report.diverged;
    rep["wall_time"] = result.report.wall_time;
    rep["cost_trace"] = result.report.cost_trace;
    rep["time"] = {{"total", result.timings.total},
                   {"opt", result.timings.opt},
                   {"init", result.timings.init}};
    rep["init_metrics"] =
        nlohmann::ordered_json::parse(gpmanip::metrics_to_json(result.init_metrics));
    write_file(fs::path(out_dir) / "report.json", rep.dump(2) + "\n");

    log_info("solve: " + std::to_string(result.report.iterations) +
             " iterations, cost " + std::to_string(result.report.initial_cost) +
             " -> " + std::to_string(result.report.final_cost));

    if (!result.metrics.solved) {
      std::cerr << "error: solve did not converge\n";
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    write_error_json(out_dir, "runtime", e.what());
    return 2;
  }
}

int cmd_benchmark(const std::string& scenario_path, int runs, int jobs,
                  const std::string& out_dir) {
  namespace fs = std::filesystem;
  gpmanip::ScenarioConfig scenario;
  try {
    scenario = gpmanip::ScenarioConfig::from_json_file(scenario_path);
  } catch (const std::exception& e) {
    std::cerr << "error: invalid scenario: " << e.what() << "\n";
    write_error_json(out_dir, "config", e.what());
    return 2;
  }

  try {
    gpmanip::BenchmarkOptions opts;
    opts.runs = runs;
    opts.jobs = jobs;
    const gpmanip::BenchmarkResult result = gpmanip::run_benchmark(scenario, opts);

    std::cout << gpmanip::benchmark_table(result);
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "metrics.json",
               gpmanip::benchmark_metrics_json(result) + "\n");
    write_file(fs::path(out_dir) / "results.json",
               gpmanip::benchmark_report_json(result) + "\n");
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    write_error_json(out_dir, "runtime", e.what());
    return 2;
  }
}

int cmd_gradcheck(const std::string& robot_path, int samples, uint64_t seed) {
  try {
    const gpmanip::ChainModel model =
        gpmanip::ChainModel::from_json_file(robot_path);
    const gpmanip::GradCheckReport report =
        gpmanip::run_gradcheck(model, samples, seed);
    std::cout << gpmanip::gradcheck_to_string(report);
    return report.all_passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GP trajectory planner with manipulability maximization"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out", robot_path;
  double sample_hz = 50.0;
  int runs = 50, jobs = 1, samples = 100;
  uint64_t seed = 0;

  CLI::App* plan = app.add_subcommand("plan", "solve one scenario");
  plan->add_option("scenario", scenario_path, "scenario JSON file")->required();
  plan->add_option("--out", out_dir, "output directory");
  plan->add_option("--sample-hz", sample_hz, "trajectory CSV sampling rate");

  CLI::App* bench = app.add_subcommand(
      "benchmark", "randomized reaching benchmark vs tracking baselines");
  bench->add_option("scenario", scenario_path, "scenario JSON file")->required();
  bench->add_option("--runs", runs, "number of random starts");
  bench->add_option("--jobs", jobs, "concurrent solves");
  bench->add_option("--out", out_dir, "output directory");

  CLI::App* grad = app.add_subcommand(
      "gradcheck", "verify analytic gradients against finite differences");
  grad->add_option("robot", robot_path, "robot model JSON file")->required();
  grad->add_option("--samples", samples, "random configurations");
  grad->add_option("--seed", seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (plan->parsed()) return cmd_plan(scenario_path, out_dir, sample_hz);
  if (bench->parsed()) return cmd_benchmark(scenario_path, runs, jobs, out_dir);
  return cmd_gradcheck(robot_path, samples, seed);
}
