#ifndef GPMANIP_SCENARIO_HPP_
#define GPMANIP_SCENARIO_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gpmanip/chain_model.hpp"
#include "gpmanip/factor_graph.hpp"
#include "gpmanip/gp_prior.hpp"
#include "gpmanip/initialization.hpp"
#include "gpmanip/sdf.hpp"
#include "gpmanip/types.hpp"

namespace gpmanip {

struct GoalSpec {
  enum class Type { kConfiguration, kPosition };
  Type type = Type::kConfiguration;
  Vec configuration;  // when type == kConfiguration
  Vec3 position;      // when type == kPosition
};

struct FixedStateSpec {
  int index = 0;
  double sigma = 1e3;
};

struct FactorConfig {
  bool manip_enabled = true;
  double sigma_s = 1e-4;
  std::optional<double> c;  // absolute; default is c_scale * m_max
  double c_scale = 0.01;
  double sigma_obs = 1e2;
  double eps = 0.3;
  double sigma_theta_anchor = 1e-3;
  double sigma_goal = 1e-4;
  std::vector<FixedStateSpec> fixed_states;
};

struct SdfConfig {
  double cell_size = 0.02;
  std::optional<Vec3> bounds_min;
  std::optional<Vec3> bounds_max;  // default: obstacle bounds + margin
  double margin = 1.0;
};

/// Declarative problem description (JSON scenario file).
struct ScenarioConfig {
  std::string robot_path;
  std::optional<Vec> start;  // nullopt = "random" (rejection-sampled)
  GoalSpec goal;

  double qc_scale = 1e5;
  double total_time = 10.0;
  int num_support = 11;

  FactorConfig factors;
  std::vector<Obstacle> obstacles;
  SdfConfig sdf;

  SolveOptions solver;
  int interp_per_interval = 9;  // k interpolated factor times per interval
  IKOptions ik;

  uint64_t seed = 0;
  int m_max_samples = 20000;

  static ScenarioConfig from_json_file(const std::string& path);
  static ScenarioConfig from_json_string(const std::string& text,
                                         const std::string& base_dir = "");
  void validate() const;
};

/// Aggregate run outputs. Timings live in their own struct so deterministic
/// metrics can be serialized separately.
struct RunMetrics {
  double manip_avg = 0.0, manip_min = 0.0, manip_max = 0.0;
  double vel_max = 0.0, vel_avg = 0.0;  // [rad/s], inf-norm per sample
  bool solved = false;
  int iterations = 0;
};

struct RunTimings {
  double total = 0.0, opt = 0.0, init = 0.0;  // [s]
};

/// Build the factor graph for a scenario: GP priors between consecutive
/// states, start/goal anchors, optional fixed intermediate states,
/// manipulability factors on every support state plus k interpolated times
/// per interval, collision factors likewise when obstacles are present, and
/// a goal-position factor for position goals.
FactorGraph assemble(const ScenarioConfig& scenario, const ChainModel& model,
                     const SDFGrid* sdf, const GPTrajectory& init);

/// Sum of GP-prior factor costs of a trajectory (the smoothness term).
double gp_smoothness_cost(const GPTrajectory& traj);

/// Dense-sampled trajectory metrics at `sample_hz`.
RunMetrics score_trajectory(const ChainModel& model, const GPTrajectory& traj,
                            double sample_hz = 50.0);

struct PlanResult {
  GPTrajectory initialization;
  GPTrajectory solution;
  SolveReport report;
  RunMetrics metrics;
  RunMetrics init_metrics;
  RunTimings timings;
  std::vector<InitCandidate> ik_candidates;
};

/// End-to-end scenario run: load model, estimate m_max, build the SDF,
/// initialize (straight line or best-of-K IK), assemble, solve, score.
PlanResult run_plan(const ScenarioConfig& scenario);
PlanResult run_plan(const ScenarioConfig& scenario, const ChainModel& model,
                    const SDFGrid* sdf);

/// Uniform in-limit configuration with manipulability above `m_threshold`
/// (rejection sampling, deterministic per rng state).
Vec sample_feasible_config(const ChainModel& model, std::mt19937_64& rng,
                           double m_threshold = 1e-4);

std::string metrics_to_json(const RunMetrics& metrics);

}  // namespace gpmanip

#endif  // GPMANIP_SCENARIO_HPP_
