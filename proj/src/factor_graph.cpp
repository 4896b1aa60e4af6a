#include "gpmanip/factor_graph.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include <Eigen/SparseCholesky>

namespace gpmanip {

void FactorGraph::add(FactorPtr factor) {
  const auto& vars = factor->vars();
  if (vars.empty() || vars.size() > 2) {
    throw std::invalid_argument("factors must touch 1 or 2 states");
  }
  for (int v : vars) {
    if (v < 0 || v >= num_states_) {
      throw std::invalid_argument("factor references invalid state");
    }
  }
  if (vars.size() == 2 && vars[1] != vars[0] + 1) {
    throw std::invalid_argument("binary factors must join consecutive states");
  }
  factors_.push_back(std::move(factor));
}

double FactorGraph::total_cost(const GPTrajectory& traj) const {
  double cost = 0.0;
  Vec r;
  for (const FactorPtr& f : factors_) {
    f->evaluate(traj, r, nullptr);
    cost += 0.5 * r.squaredNorm();
  }
  return cost;
}

double FactorGraph::linearize(const GPTrajectory& traj,
                              Eigen::SparseMatrix<double>& H, Vec& g) const {
  const int D = total_dim();
  g = Vec::Zero(D);
  std::vector<Eigen::Triplet<double>> triplets;
  double cost = 0.0;

  Vec r;
  std::vector<Mat> jac;
  for (const FactorPtr& f : factors_) {
    f->evaluate(traj, r, &jac);
    cost += 0.5 * r.squaredNorm();
    const auto& vars = f->vars();
    for (size_t a = 0; a < vars.size(); ++a) {
      const int row0 = vars[a] * state_dim_;
      g.segment(row0, state_dim_) += jac[a].transpose() * r;
      for (size_t b = 0; b < vars.size(); ++b) {
        const int col0 = vars[b] * state_dim_;
        const Mat block = jac[a].transpose() * jac[b];
        for (int i = 0; i < state_dim_; ++i) {
          for (int j = 0; j < state_dim_; ++j) {
            if (block(i, j) != 0.0) {
              triplets.emplace_back(row0 + i, col0 + j, block(i, j));
            }
          }
        }
      }
    }
  }

  H.resize(D, D);
  H.setFromTriplets(triplets.begin(), triplets.end());
  return cost;
}

namespace {

void clamp_positions(GPTrajectory& traj, const ChainModel& model) {
  const int n = model.dof();
  for (int i = 0; i < traj.num_support(); ++i) {
    traj.state(i).head(n) = model.clamp_to_limits(traj.state(i).head(n));
  }
}

void apply_step(GPTrajectory& traj, const Vec& delta, int state_dim) {
  for (int i = 0; i < traj.num_support(); ++i) {
    traj.state(i) += delta.segment(i * state_dim, state_dim);
  }
}

}  // namespace

SolveReport solve(const FactorGraph& graph, GPTrajectory& traj,
                  const ChainModel& model, const SolveOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const int D = graph.total_dim();
  SolveReport report;

  Eigen::SparseMatrix<double> H;
  Vec g;
  double cost = graph.linearize(traj, H, g);
  report.initial_cost = cost;
  report.cost_trace.push_back(cost);

  if (!std::isfinite(cost)) {
    report.diverged = true;
    report.final_cost = cost;
    return report;
  }

  Eigen::SparseMatrix<double> eye(D, D);
  eye.setIdentity();

  double damping = opts.lm_damping_init;
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() < 1e-14) {
      report.converged = true;
      break;
    }

    bool accepted = false;
    double new_cost = cost;
    GPTrajectory accepted_traj = traj;
    while (damping <= opts.lm_damping_max) {
      Eigen::SparseMatrix<double> A = H + damping * eye;
      Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> chol(A);
      if (chol.info() != Eigen::Success) {
        damping *= 10.0;  // indefinite after round-off; damp harder
        continue;
      }
      const Vec delta = chol.solve(-g);
      GPTrajectory candidate = traj;
      apply_step(candidate, delta, graph.state_dim());
      clamp_positions(candidate, model);
      const double candidate_cost = graph.total_cost(candidate);
      if (!std::isfinite(candidate_cost)) {
        report.diverged = true;
        break;
      }
      if (candidate_cost < cost) {
        accepted = true;
        new_cost = candidate_cost;
        accepted_traj = std::move(candidate);
        damping = std::max(damping / 10.0, 1e-12);
        break;
      }
      damping *= 10.0;
    }

    if (!accepted) {
      // Local minimum up to damping limit (or divergence).
      report.converged = !report.diverged;
      break;
    }

    traj = std::move(accepted_traj);
    report.iterations = iter + 1;
    report.cost_trace.push_back(new_cost);

    const double decrease = cost - new_cost;
    cost = new_cost;
    if (cost < opts.tol_abs || decrease < opts.tol_rel * std::max(cost, 1e-300)) {
      report.converged = true;
      break;
    }
    graph.linearize(traj, H, g);
  }

  report.final_cost = cost;
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

}  // namespace gpmanip
