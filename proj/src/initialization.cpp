#include "gpmanip/initialization.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "gpmanip/kinematics.hpp"

namespace gpmanip {

void IKOptions::validate() const {
  if (num_solutions < 1) throw std::invalid_argument("num_solutions must be >= 1");
  if (!(pos_tol > 0.0)) throw std::invalid_argument("pos_tol must be > 0");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
}

std::optional<Vec> ik_solve(const ChainModel& model, const Vec3& x_goal,
                            const Vec& seed_config, const IKOptions& opts) {
  opts.validate();
  const int p = model.task_dim() == 2 ? 2 : 3;
  Vec q = model.clamp_to_limits(seed_config);

  for (int iter = 0; iter <= opts.max_iters; ++iter) {
    const Vec err = (x_goal - fk_position(model, q)).head(p);
    if (err.norm() < opts.pos_tol) return q;
    if (iter == opts.max_iters) break;

    const Mat J = jacobian(model, q).topRows(p);
    const Mat JJt = J * J.transpose() +
                    opts.damping * opts.damping * Mat::Identity(p, p);
    const Vec dq = J.transpose() * JJt.ldlt().solve(err);
    q = model.clamp_to_limits(q + dq);
  }
  return std::nullopt;
}

namespace {

// Min/mean manipulability over support states and interpolated times.
void score_candidate(const ChainModel& model, const GPTrajectory& traj,
                     int interp_per_interval, double& min_m, double& mean_m) {
  min_m = std::numeric_limits<double>::infinity();
  mean_m = 0.0;
  int count = 0;
  const int n = model.dof();
  const int per = interp_per_interval + 1;
  const int intervals = traj.params().num_intervals();
  for (int i = 0; i <= intervals * per; ++i) {
    const double tau = traj.params().total_time * i /
                       static_cast<double>(intervals * per);
    const Vec q = traj.interpolate(tau).x.head(n);
    const double m = manipulability(model, q).m;
    min_m = std::min(min_m, m);
    mean_m += m;
    ++count;
  }
  mean_m /= count;
}

}  // namespace

InitResult best_initialization(const ChainModel& model, const Vec& start,
                               const Vec3& x_goal, const GPParams& params,
                               const IKOptions& opts,
                               int interp_per_interval) {
  opts.validate();
  std::mt19937_64 rng(opts.seed);
  const Vec lo = model.lower_limits();
  const Vec hi = model.upper_limits();
  const int n = model.dof();

  std::vector<Vec> solutions;
  // First restart is seeded from the start configuration, the rest are
  // uniform in the joint limits. Duplicates (< 1e-3 rad apart) are dropped
  // so K counts distinct solutions.
  int attempts = 0;
  const int max_attempts = 20 * opts.num_solutions;
  while (static_cast<int>(solutions.size()) < opts.num_solutions &&
         attempts < max_attempts) {
    Vec seed_q(n);
    if (attempts == 0) {
      seed_q = start;
    } else {
      for (int i = 0; i < n; ++i) {
        std::uniform_real_distribution<double> dist(lo[i], hi[i]);
        seed_q[i] = dist(rng);
      }
    }
    ++attempts;
    const auto sol = ik_solve(model, x_goal, seed_q, opts);
    if (!sol) continue;
    bool duplicate = false;
    for (const Vec& existing : solutions) {
      if ((existing - *sol).lpNorm<Eigen::Infinity>() < 1e-3) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) solutions.push_back(*sol);
  }

  if (solutions.empty()) {
    throw std::runtime_error(
        "all IK candidates failed: goal unreachable from the given model");
  }

  InitResult result{make_constant_velocity_prior(start, solutions[0], params),
                    {},
                    0};
  result.candidates.reserve(solutions.size());
  int best = -1;
  for (size_t k = 0; k < solutions.size(); ++k) {
    GPTrajectory traj = make_constant_velocity_prior(start, solutions[k], params);
    InitCandidate cand;
    cand.goal_config = solutions[k];
    score_candidate(model, traj, interp_per_interval, cand.min_manip,
                    cand.mean_manip);
    result.candidates.push_back(cand);
    // Rank by mean manipulability along the interpolated line (the quantity
    // the planner ultimately maximizes) and break ties with the minimum,
    // which also vetoes candidates whose line grazes a singularity.
    if (best < 0 ||
        cand.mean_manip > result.candidates[static_cast<size_t>(best)].mean_manip ||
        (cand.mean_manip == result.candidates[static_cast<size_t>(best)].mean_manip &&
         cand.min_manip > result.candidates[static_cast<size_t>(best)].min_manip)) {
      best = static_cast<int>(k);
    }
  }

  result.selected_index = best;
  result.candidates[static_cast<size_t>(best)].selected = true;
  result.trajectory = make_constant_velocity_prior(
      start, solutions[static_cast<size_t>(best)], params);
  return result;
}

}  // namespace gpmanip
