#ifndef GPMANIP_FACTOR_GRAPH_HPP_
#define GPMANIP_FACTOR_GRAPH_HPP_

#include <memory>
#include <vector>

#include <Eigen/Sparse>

#include "gpmanip/chain_model.hpp"
#include "gpmanip/factors.hpp"
#include "gpmanip/gp_prior.hpp"
#include "gpmanip/types.hpp"

namespace gpmanip {

/// MAP objective: N+1 support-state variables (2n each) plus a list of
/// factors adjacent only to single states or consecutive pairs, so the
/// information matrix is block-tridiagonal.
class FactorGraph {
 public:
  FactorGraph(int num_states, int state_dim)
      : num_states_(num_states), state_dim_(state_dim) {}

  void add(FactorPtr factor);

  int num_states() const { return num_states_; }
  int state_dim() const { return state_dim_; }
  int total_dim() const { return num_states_ * state_dim_; }
  const std::vector<FactorPtr>& factors() const { return factors_; }

  /// Sum of 0.5 * ||r||^2 over all factors.
  double total_cost(const GPTrajectory& traj) const;

  /// Gauss-Newton normal equations at the current trajectory:
  /// H = J^T J (sparse), g = J^T r. Returns the current cost.
  double linearize(const GPTrajectory& traj, Eigen::SparseMatrix<double>& H,
                   Vec& g) const;

 private:
  int num_states_;
  int state_dim_;
  std::vector<FactorPtr> factors_;
};

struct SolveOptions {
  int max_iters = 100;
  double tol_rel = 1e-6;
  double tol_abs = 1e-12;
  double lm_damping_init = 1e-4;
  double lm_damping_max = 1e10;
};

struct SolveReport {
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  bool converged = false;
  bool diverged = false;  // non-finite residual encountered
  double wall_time = 0.0;
  std::vector<double> cost_trace;
};

/// Levenberg-Marquardt MAP solve: linearize, solve the block-tridiagonal
/// normal equations by sparse Cholesky, damped update; joint limits enforced
/// by clamping after each accepted step.
SolveReport solve(const FactorGraph& graph, GPTrajectory& traj,
                  const ChainModel& model, const SolveOptions& opts = {});

}  // namespace gpmanip

#endif  // GPMANIP_FACTOR_GRAPH_HPP_
