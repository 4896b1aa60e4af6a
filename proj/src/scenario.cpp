#include "gpmanip/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "gpmanip/kinematics.hpp"

namespace gpmanip {

namespace {

Vec3 read_vec3(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw std::invalid_argument("expected a 3-element array");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Vec read_vec(const nlohmann::json& j) {
  Vec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

}  // namespace

ScenarioConfig ScenarioConfig::from_json_string(const std::string& text,
                                                const std::string& base_dir) {
  nlohmann::json doc = nlohmann::json::parse(text);
  ScenarioConfig cfg;

  cfg.robot_path = doc.at("robot").get<std::string>();
  if (!base_dir.empty() &&
      !std::filesystem::path(cfg.robot_path).is_absolute()) {
    cfg.robot_path = (std::filesystem::path(base_dir) / cfg.robot_path).string();
  }

  if (doc.contains("seed")) cfg.seed = doc["seed"].get<uint64_t>();
  cfg.ik.seed = cfg.seed;

  const auto& start = doc.at("start");
  if (start.is_string()) {
    if (start.get<std::string>() != "random") {
      throw std::invalid_argument("start must be an array or \"random\"");
    }
  } else {
    cfg.start = read_vec(start);
  }

  const auto& goal = doc.at("goal");
  const std::string goal_type = goal.at("type").get<std::string>();
  if (goal_type == "configuration") {
    cfg.goal.type = GoalSpec::Type::kConfiguration;
    cfg.goal.configuration = read_vec(goal.at("value"));
  } else if (goal_type == "position") {
    cfg.goal.type = GoalSpec::Type::kPosition;
    cfg.goal.position = read_vec3(goal.at("value"));
  } else {
    throw std::invalid_argument("goal type must be configuration or position");
  }

  if (doc.contains("gp")) {
    const auto& gp = doc["gp"];
    if (gp.contains("Qc_scale")) cfg.qc_scale = gp["Qc_scale"].get<double>();
    if (gp.contains("T")) cfg.total_time = gp["T"].get<double>();
    if (gp.contains("num_support")) cfg.num_support = gp["num_support"].get<int>();
  }

  if (doc.contains("factors")) {
    const auto& f = doc["factors"];
    FactorConfig& fc = cfg.factors;
    if (f.contains("manip_enabled")) fc.manip_enabled = f["manip_enabled"].get<bool>();
    if (f.contains("sigma_s")) fc.sigma_s = f["sigma_s"].get<double>();
    if (f.contains("c")) fc.c = f["c"].get<double>();
    if (f.contains("c_scale")) fc.c_scale = f["c_scale"].get<double>();
    if (f.contains("sigma_obs")) fc.sigma_obs = f["sigma_obs"].get<double>();
    if (f.contains("eps")) fc.eps = f["eps"].get<double>();
    if (f.contains("sigma_theta_anchor")) {
      fc.sigma_theta_anchor = f["sigma_theta_anchor"].get<double>();
    }
    if (f.contains("sigma_goal")) fc.sigma_goal = f["sigma_goal"].get<double>();
    if (f.contains("fixed_states")) {
      for (const auto& fs : f["fixed_states"]) {
        fc.fixed_states.push_back(
            {fs.at("index").get<int>(), fs.at("sigma").get<double>()});
      }
    }
  }

  if (doc.contains("obstacles")) {
    for (const auto& jo : doc["obstacles"]) {
      const std::string type = jo.at("type").get<std::string>();
      if (type == "sphere") {
        cfg.obstacles.push_back(
            SphereObstacle{read_vec3(jo.at("center")),
                           jo.at("radius").get<double>()});
      } else if (type == "box") {
        cfg.obstacles.push_back(BoxObstacle{read_vec3(jo.at("center")),
                                            read_vec3(jo.at("half_extents"))});
      } else {
        throw std::invalid_argument("obstacle type must be sphere or box");
      }
    }
  }

  if (doc.contains("sdf")) {
    const auto& s = doc["sdf"];
    if (s.contains("cell_size")) cfg.sdf.cell_size = s["cell_size"].get<double>();
    if (s.contains("bounds_min")) cfg.sdf.bounds_min = read_vec3(s["bounds_min"]);
    if (s.contains("bounds_max")) cfg.sdf.bounds_max = read_vec3(s["bounds_max"]);
    if (s.contains("margin")) cfg.sdf.margin = s["margin"].get<double>();
  }

  if (doc.contains("solver")) {
    const auto& s = doc["solver"];
    if (s.contains("max_iters")) cfg.solver.max_iters = s["max_iters"].get<int>();
    if (s.contains("tol_rel")) cfg.solver.tol_rel = s["tol_rel"].get<double>();
    if (s.contains("tol_abs")) cfg.solver.tol_abs = s["tol_abs"].get<double>();
    if (s.contains("lm_damping_init")) {
      cfg.solver.lm_damping_init = s["lm_damping_init"].get<double>();
    }
    if (s.contains("interp_per_interval")) {
      cfg.interp_per_interval = s["interp_per_interval"].get<int>();
    }
  }

  if (doc.contains("ik")) {
    const auto& ik = doc["ik"];
    if (ik.contains("num_solutions")) cfg.ik.num_solutions = ik["num_solutions"].get<int>();
    if (ik.contains("max_iters")) cfg.ik.max_iters = ik["max_iters"].get<int>();
    if (ik.contains("pos_tol")) cfg.ik.pos_tol = ik["pos_tol"].get<double>();
    if (ik.contains("damping")) cfg.ik.damping = ik["damping"].get<double>();
    if (ik.contains("seed")) cfg.ik.seed = ik["seed"].get<uint64_t>();
  }

  if (doc.contains("m_max_samples")) {
    cfg.m_max_samples = doc["m_max_samples"].get<int>();
  }

  cfg.validate();
  return cfg;
}

ScenarioConfig ScenarioConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_string(buf.str(),
                          std::filesystem::path(path).parent_path().string());
}

void ScenarioConfig::validate() const {
  if (!(qc_scale > 0.0)) throw std::invalid_argument("Qc_scale must be > 0");
  if (num_support < 2) throw std::invalid_argument("num_support must be >= 2");
  if (!(total_time > 0.0)) throw std::invalid_argument("T must be > 0");
  if (interp_per_interval < 0) {
    throw std::invalid_argument("interp_per_interval must be >= 0");
  }
  for (const FixedStateSpec& fs : factors.fixed_states) {
    if (fs.index < 0 || fs.index >= num_support) {
      throw std::invalid_argument("fixed state index out of range");
    }
  }
}

FactorGraph assemble(const ScenarioConfig& scenario, const ChainModel& model,
                     const SDFGrid* sdf, const GPTrajectory& init) {
  const int n = model.dof();
  const GPParams& params = init.params();
  const int N = params.num_intervals();
  const int k = scenario.interp_per_interval;

  FactorGraph graph(params.num_support, 2 * n);

  for (int i = 0; i < N; ++i) {
    graph.add(std::make_unique<GpPriorFactor>(params, i));
  }

  graph.add(std::make_unique<StatePriorFactor>(
      0, init.state(0), scenario.factors.sigma_theta_anchor));
  graph.add(std::make_unique<StatePriorFactor>(
      N, init.state(N), scenario.factors.sigma_theta_anchor));
  for (const FixedStateSpec& fs : scenario.factors.fixed_states) {
    graph.add(std::make_unique<StatePriorFactor>(fs.index, init.state(fs.index),
                                                 fs.sigma));
  }

  auto interp_times = [&](int interval) {
    std::vector<double> taus;
    for (int s = 1; s <= k; ++s) {
      taus.push_back(params.support_time(interval) +
                     params.dt() * s / static_cast<double>(k + 1));
    }
    return taus;
  };

  if (scenario.factors.manip_enabled) {
    if (!(model.m_max() > 0.0)) {
      throw std::invalid_argument(
          "model m_max must be estimated before assembling manip factors");
    }
    ManipFactorParams mp;
    mp.sigma_s = scenario.factors.sigma_s;
    mp.m_max = model.m_max();
    mp.c = scenario.factors.c.value_or(scenario.factors.c_scale * mp.m_max);

    // Interior states only: the anchored boundary states are meant to stay
    // put (often at a singularity), and a manipulability factor there would
    // fight the anchors instead of shaping the path between them.
    for (int i = 1; i < N; ++i) {
      graph.add(std::make_unique<ManipFactor>(model, i, mp));
    }
    for (int i = 0; i < N; ++i) {
      for (double tau : interp_times(i)) {
        graph.add(std::make_unique<InterpManipFactor>(model, params, i, tau, mp));
      }
    }
  }

  if (sdf != nullptr && !model.collision_spheres().empty() &&
      !scenario.obstacles.empty()) {
    CollisionFactorParams cp;
    cp.sigma_obs = scenario.factors.sigma_obs;
    cp.eps = scenario.factors.eps;
    for (int i = 0; i <= N; ++i) {
      graph.add(std::make_unique<CollisionFactor>(model, *sdf, i, cp));
    }
    for (int i = 0; i < N; ++i) {
      for (double tau : interp_times(i)) {
        graph.add(std::make_unique<InterpCollisionFactor>(model, *sdf, params,
                                                          i, tau, cp));
      }
    }
  }

  if (scenario.goal.type == GoalSpec::Type::kPosition) {
    graph.add(std::make_unique<GoalPositionFactor>(
        model, N, scenario.goal.position, scenario.factors.sigma_goal));
  }

  return graph;
}

double gp_smoothness_cost(const GPTrajectory& traj) {
  double cost = 0.0;
  for (int i = 0; i < traj.params().num_intervals(); ++i) {
    cost += GpPriorFactor(traj.params(), i).cost(traj);
  }
  return cost;
}

RunMetrics score_trajectory(const ChainModel& model, const GPTrajectory& traj,
                            double sample_hz) {
  const int n = model.dof();
  const double T = traj.params().total_time;
  // Cap the sample count so scoring stays cheap for long-horizon plans; a few
  // thousand points is still dense relative to the support spacing.
  const int samples = std::clamp(
      static_cast<int>(std::llround(T * sample_hz)) + 1, 2, 4001);

  RunMetrics m;
  m.manip_min = std::numeric_limits<double>::infinity();
  double sum_m = 0.0, sum_v = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double tau = T * s / static_cast<double>(samples - 1);
    const Vec x = traj.interpolate(tau).x;
    const double mi = manipulability(model, x.head(n)).m;
    const double vi = x.tail(n).lpNorm<Eigen::Infinity>();
    m.manip_min = std::min(m.manip_min, mi);
    m.manip_max = std::max(m.manip_max, mi);
    m.vel_max = std::max(m.vel_max, vi);
    sum_m += mi;
    sum_v += vi;
  }
  m.manip_avg = sum_m / samples;
  m.vel_avg = sum_v / samples;
  return m;
}

Vec sample_feasible_config(const ChainModel& model, std::mt19937_64& rng,
                           double m_threshold) {
  const Vec lo = model.lower_limits();
  const Vec hi = model.upper_limits();
  const int n = model.dof();
  Vec q(n);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    for (int i = 0; i < n; ++i) {
      std::uniform_real_distribution<double> dist(lo[i], hi[i]);
      q[i] = dist(rng);
    }
    if (manipulability(model, q).m > m_threshold) return q;
  }
  throw std::runtime_error("could not sample a feasible configuration");
}

namespace {

SDFGrid build_scenario_sdf(const ScenarioConfig& scenario) {
  Vec3 lo, hi;
  if (scenario.sdf.bounds_min && scenario.sdf.bounds_max) {
    lo = *scenario.sdf.bounds_min;
    hi = *scenario.sdf.bounds_max;
  } else {
    lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    hi = -lo;
    for (const Obstacle& obs : scenario.obstacles) {
      if (const auto* s = std::get_if<SphereObstacle>(&obs)) {
        lo = lo.cwiseMin(Vec3(s->center.array() - s->radius));
        hi = hi.cwiseMax(Vec3(s->center.array() + s->radius));
      } else {
        const auto& b = std::get<BoxObstacle>(obs);
        lo = lo.cwiseMin(Vec3(b.center - b.half_extents));
        hi = hi.cwiseMax(Vec3(b.center + b.half_extents));
      }
    }
    lo -= Vec3::Constant(scenario.sdf.margin);
    hi += Vec3::Constant(scenario.sdf.margin);
  }
  return build_sdf(scenario.obstacles, lo, hi, scenario.sdf.cell_size);
}

}  // namespace

PlanResult run_plan(const ScenarioConfig& scenario) {
  ChainModel model = ChainModel::from_json_file(scenario.robot_path);
  model.set_m_max(estimate_m_max(model, scenario.m_max_samples, scenario.seed));
  if (!scenario.obstacles.empty()) {
    const SDFGrid sdf = build_scenario_sdf(scenario);
    return run_plan(scenario, model, &sdf);
  }
  return run_plan(scenario, model, nullptr);
}

PlanResult run_plan(const ScenarioConfig& scenario, const ChainModel& model,
                    const SDFGrid* sdf) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = model.dof();
  const GPParams params = GPParams::isotropic(
      n, scenario.qc_scale, scenario.total_time, scenario.num_support);

  std::mt19937_64 rng(scenario.seed);
  Vec start;
  if (scenario.start) {
    start = *scenario.start;
    if (start.size() != n) {
      throw std::invalid_argument("start configuration dimension mismatch");
    }
  } else {
    start = sample_feasible_config(model, rng);
  }

  std::vector<InitCandidate> candidates;
  GPTrajectory init = [&]() {
    if (scenario.goal.type == GoalSpec::Type::kConfiguration) {
      if (scenario.goal.configuration.size() != n) {
        throw std::invalid_argument("goal configuration dimension mismatch");
      }
      return make_constant_velocity_prior(start, scenario.goal.configuration,
                                          params);
    }
    InitResult res =
        best_initialization(model, start, scenario.goal.position, params,
                            scenario.ik, scenario.interp_per_interval);
    candidates = std::move(res.candidates);
    return std::move(res.trajectory);
  }();
  const double t_init =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  const FactorGraph graph = assemble(scenario, model, sdf, init);

  PlanResult result{init, init, {}, {}, {}, {}, std::move(candidates)};
  result.report = solve(graph, result.solution, model, scenario.solver);

  result.metrics = score_trajectory(model, result.solution);
  result.init_metrics = score_trajectory(model, init);
  result.metrics.solved = result.report.converged && !result.report.diverged;
  result.metrics.iterations = result.report.iterations;
  result.timings.init = t_init;
  result.timings.opt = result.report.wall_time;
  result.timings.total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

std::string metrics_to_json(const RunMetrics& metrics) {
  nlohmann::ordered_json j;
  j["manip"] = {{"avg", metrics.manip_avg},
                {"min", metrics.manip_min},
                {"max", metrics.manip_max}};
  j["velocity"] = {{"max", metrics.vel_max}, {"avg", metrics.vel_avg}};
  j["solved"] = metrics.solved;
  j["iterations"] = metrics.iterations;
  return j.dump(2);
}

}  // namespace gpmanip
