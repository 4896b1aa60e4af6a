#include "gpmanip/gp_prior.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace gpmanip {

GPParams GPParams::isotropic(int n, double qc_scale, double total_time,
                             int num_support) {
  GPParams p;
  p.Qc = qc_scale * Mat::Identity(n, n);
  p.total_time = total_time;
  p.num_support = num_support;
  p.validate();
  return p;
}

void GPParams::validate() const {
  if (num_support < 2) throw std::invalid_argument("num_support must be >= 2");
  if (!(total_time > 0.0)) throw std::invalid_argument("total_time must be > 0");
  if (Qc.rows() != Qc.cols() || Qc.rows() < 1) {
    throw std::invalid_argument("Qc must be square");
  }
  if (!Qc.isApprox(Qc.transpose(), 1e-12)) {
    throw std::invalid_argument("Qc must be symmetric");
  }
  Eigen::LLT<Mat> llt(Qc);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("Qc must be positive definite");
  }
}

Transition transition(const GPParams& params, double dt) {
  if (dt < 0.0) throw std::invalid_argument("dt must be >= 0");
  const int n = params.dof();
  const Mat I = Mat::Identity(n, n);

  Transition tr;
  tr.Phi = Mat::Identity(2 * n, 2 * n);
  tr.Phi.topRightCorner(n, n) = dt * I;

  tr.Q = Mat::Zero(2 * n, 2 * n);
  tr.Q.topLeftCorner(n, n) = (dt * dt * dt / 3.0) * params.Qc;
  tr.Q.topRightCorner(n, n) = (dt * dt / 2.0) * params.Qc;
  tr.Q.bottomLeftCorner(n, n) = (dt * dt / 2.0) * params.Qc;
  tr.Q.bottomRightCorner(n, n) = dt * params.Qc;
  return tr;
}

GPTrajectory::GPTrajectory(GPParams params, std::vector<Vec> states,
                           std::vector<Vec> mean)
    : params_(std::move(params)),
      states_(std::move(states)),
      mean_(std::move(mean)) {
  params_.validate();
  if (static_cast<int>(states_.size()) != params_.num_support ||
      states_.size() != mean_.size()) {
    throw std::invalid_argument("support state count mismatch");
  }
  for (const Vec& x : states_) {
    if (x.size() != 2 * params_.dof()) {
      throw std::invalid_argument("support state dimension mismatch");
    }
  }
}

void GPTrajectory::interp_matrices(const GPParams& params, int interval,
                                   double tau, Mat& lambda, Mat& psi) {
  const double ti = params.support_time(interval);
  const double dt = params.dt();
  // Rounding in tau can leave (tau - ti) a hair outside [0, dt]; clamp so the
  // tail transition never sees a negative duration.
  const double local = std::clamp(tau - ti, 0.0, dt);

  const Transition full = transition(params, dt);
  const Transition head = transition(params, local);
  const Transition tail = transition(params, dt - local);

  const Eigen::LLT<Mat> llt(full.Q);
  psi = llt.solve(tail.Phi * head.Q.transpose()).transpose();
  lambda = head.Phi - psi * full.Phi;
}

Vec GPTrajectory::mean_at(double tau) const {
  const int n = dof();
  int i = std::min(static_cast<int>(tau / params_.dt()),
                   params_.num_intervals() - 1);
  const double local = tau - time(i);
  const Vec& mu = mean_[static_cast<size_t>(i)];
  Vec out(2 * n);
  out.head(n) = mu.head(n) + local * mu.tail(n);
  out.tail(n) = mu.tail(n);
  return out;
}

InterpResult GPTrajectory::interpolate(double tau) const {
  if (tau < 0.0 || tau > params_.total_time + 1e-12) {
    throw std::out_of_range("interpolation time outside [0, T]");
  }
  tau = std::min(tau, params_.total_time);
  const int i = std::min(static_cast<int>(tau / params_.dt()),
                         params_.num_intervals() - 1);

  InterpResult res;
  res.interval = i;
  interp_matrices(params_, i, tau, res.lambda, res.psi);
  res.x = mean_at(tau) +
          res.lambda * (state(i) - mean(i)) +
          res.psi * (state(i + 1) - mean(i + 1));
  return res;
}

void GPTrajectory::write_csv(
    const std::string& path, int samples_per_interval,
    const std::function<double(const Vec&)>& manip_eval) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  const int n = dof();

  out << "t";
  for (int j = 1; j <= n; ++j) out << ",q" << j;
  for (int j = 1; j <= n; ++j) out << ",dq" << j;
  out << ",m\n";
  out.precision(17);

  auto write_row = [&](double tau) {
    const Vec x = interpolate(tau).x;
    out << tau;
    for (int j = 0; j < 2 * n; ++j) out << "," << x[j];
    out << "," << (manip_eval ? manip_eval(x.head(n)) : 0.0) << "\n";
  };

  const int per = std::max(samples_per_interval, 0);
  for (int i = 0; i < params_.num_intervals(); ++i) {
    for (int s = 0; s <= per; ++s) {
      const double tau =
          time(i) + params_.dt() * static_cast<double>(s) / (per + 1);
      write_row(tau);
    }
  }
  write_row(params_.total_time);
}

GPTrajectory make_constant_velocity_prior(const Vec& start, const Vec& goal,
                                          const GPParams& params) {
  params.validate();
  const int n = params.dof();
  if (start.size() != n || goal.size() != n) {
    throw std::invalid_argument("start/goal dimension mismatch");
  }
  const Vec vel = (goal - start) / params.total_time;
  std::vector<Vec> states;
  states.reserve(static_cast<size_t>(params.num_support));
  for (int i = 0; i < params.num_support; ++i) {
    Vec x(2 * n);
    x.head(n) = start + params.support_time(i) * vel;
    x.tail(n) = vel;
    states.push_back(x);
  }
  std::vector<Vec> mean = states;
  return GPTrajectory(params, std::move(states), std::move(mean));
}

}  // namespace gpmanip
