#ifndef GPMANIP_INITIALIZATION_HPP_
#define GPMANIP_INITIALIZATION_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "gpmanip/chain_model.hpp"
#include "gpmanip/gp_prior.hpp"
#include "gpmanip/types.hpp"

namespace gpmanip {

struct IKOptions {
  int num_solutions = 20;  // K candidate goal configurations
  int max_iters = 200;
  double pos_tol = 1e-3;   // [m]
  double damping = 0.1;    // DLS lambda
  uint64_t seed = 0;

  void validate() const;
};

/// Damped-least-squares IK to an end-effector position. Joint limits are
/// enforced by per-iteration clamping. Returns nullopt on non-convergence.
std::optional<Vec> ik_solve(const ChainModel& model, const Vec3& x_goal,
                            const Vec& seed_config, const IKOptions& opts);

struct InitCandidate {
  Vec goal_config;
  double min_manip = 0.0;   // over densely interpolated configurations
  double mean_manip = 0.0;
  bool selected = false;
};

struct InitResult {
  GPTrajectory trajectory;
  std::vector<InitCandidate> candidates;  // successful, deduplicated
  int selected_index = -1;
};

/// Generate up to K distinct IK goal configurations by seeded random
/// restarts, build the straight-line trajectory to each, and pick the one
/// with the greatest minimum interpolated manipulability (ties: larger mean,
/// then lower index). Throws if every candidate fails IK.
InitResult best_initialization(const ChainModel& model, const Vec& start,
                               const Vec3& x_goal, const GPParams& params,
                               const IKOptions& opts,
                               int interp_per_interval = 9);

}  // namespace gpmanip

#endif  // GPMANIP_INITIALIZATION_HPP_
