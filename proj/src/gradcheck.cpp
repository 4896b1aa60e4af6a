#include "gpmanip/gradcheck.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "gpmanip/factors.hpp"
#include "gpmanip/kinematics.hpp"
#include "gpmanip/sdf.hpp"

namespace gpmanip {

bool GradCheckReport::all_passed(double tol) const {
  for (const GradCheckEntry& e : entries) {
    if (!(e.max_rel_error < tol)) return false;
  }
  return true;
}

namespace {

constexpr double kFdStep = 1e-6;

double rel_error(const Mat& analytic, const Mat& numeric) {
  // Floor the denominator well above central-difference noise: some blocks
  // (e.g. the wrist columns of a 6-DOF chain's Jacobian partials) are
  // legitimately ~1e-6 in norm, and pure FD noise would dominate a strict
  // relative comparison there.
  const double denom = std::max(numeric.norm(), 1e-3);
  return (analytic - numeric).norm() / denom;
}

void update(GradCheckEntry& entry, double err, const Vec& q) {
  if (err > entry.max_rel_error) {
    entry.max_rel_error = err;
    entry.worst_config = q;
  }
}

}  // namespace

GradCheckReport run_gradcheck(const ChainModel& model, int samples,
                              uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  const int n = model.dof();
  const int p = model.task_dim();
  std::mt19937_64 rng(seed);
  const Vec lo = model.lower_limits();
  const Vec hi = model.upper_limits();

  const double m_max = model.m_max() > 0.0
                           ? model.m_max()
                           : estimate_m_max(model, 5000, seed);
  ManipFactorParams mparams;
  mparams.m_max = m_max;
  mparams.c = 0.01 * m_max;

  // Synthetic workspace for the collision-gradient check: a large floor slab
  // whose field is exactly linear over the reachable region, so the trilinear
  // interpolation introduces no error of its own and the check isolates the
  // chain rule through the sphere-center point Jacobians.
  std::vector<Obstacle> obstacles{
      BoxObstacle{Vec3(0.0, 0.0, -2.0), Vec3(5.0, 5.0, 1.3)}};
  const SDFGrid sdf = build_sdf(obstacles, Vec3(-2.0, -2.0, -1.9),
                                Vec3(2.0, 2.0, 2.0), 0.05);
  CollisionFactorParams cparams;
  cparams.eps = 3.0;  // margin beyond the workspace: hinge active everywhere
  cparams.sigma_obs = 1.0;

  GradCheckReport report;
  report.entries = {
      {"jacobian_vs_fk", 0.0, Vec()},
      {"jacobian_partial", 0.0, Vec()},
      {"manipulability_gradient", 0.0, Vec()},
      {"manip_cost_gradient", 0.0, Vec()},
      {"goal_position_jacobian", 0.0, Vec()},
      {"collision_cost_gradient", 0.0, Vec()},
  };

  int accepted = 0;
  while (accepted < samples) {
    Vec q(n);
    for (int i = 0; i < n; ++i) {
      std::uniform_real_distribution<double> dist(lo[i], hi[i]);
      q[i] = dist(rng);
    }
    if (manipulability(model, q).m < 1e-3 * m_max) continue;
    ++accepted;

    // Jacobian columns vs finite differences of forward kinematics.
    const Mat J = jacobian(model, q);
    Mat J_fd(p, n);
    for (int j = 0; j < n; ++j) {
      Vec qp = q, qm = q;
      qp[j] += kFdStep;
      qm[j] -= kFdStep;
      if (p == 6) {
        const FkResult fp = forward_kinematics(model, qp);
        const FkResult fm = forward_kinematics(model, qm);
        J_fd.col(j).head(3) = (fp.ee.p - fm.ee.p) / (2.0 * kFdStep);
        // Angular velocity from the skew part of dR R^T.
        const Mat3 dR = (fp.ee.R - fm.ee.R) / (2.0 * kFdStep);
        const Mat3 W = dR * forward_kinematics(model, q).ee.R.transpose();
        J_fd.col(j).tail(3) = Vec3(W(2, 1), W(0, 2), W(1, 0));
      } else {
        J_fd.col(j) =
            ((fk_position(model, qp) - fk_position(model, qm)) / (2.0 * kFdStep))
                .head(p);
      }
    }
    update(report.entries[0], rel_error(J, J_fd), q);

    // dJ/dtheta_j vs finite differences of the Jacobian.
    for (int j = 0; j < n; ++j) {
      Vec qp = q, qm = q;
      qp[j] += kFdStep;
      qm[j] -= kFdStep;
      const Mat dJ_fd = (jacobian(model, qp) - jacobian(model, qm)) / (2.0 * kFdStep);
      update(report.entries[1], rel_error(jacobian_partial(model, q, j), dJ_fd), q);
    }

    // Manipulability gradient (Jacobi-identity form) vs finite differences.
    {
      const Vec g = manipulability_gradient(model, q);
      Vec g_fd(n);
      for (int j = 0; j < n; ++j) {
        Vec qp = q, qm = q;
        qp[j] += kFdStep;
        qm[j] -= kFdStep;
        g_fd[j] = (manipulability(model, qp).m - manipulability(model, qm).m) /
                  (2.0 * kFdStep);
      }
      update(report.entries[2], rel_error(g, g_fd), q);
    }

    // Logarithmic cost gradient.
    {
      const Vec g = manip_cost_gradient(model, q, mparams);
      Vec g_fd(n);
      for (int j = 0; j < n; ++j) {
        Vec qp = q, qm = q;
        qp[j] += kFdStep;
        qm[j] -= kFdStep;
        g_fd[j] = (manip_cost(model, qp, mparams) - manip_cost(model, qm, mparams)) /
                  (2.0 * kFdStep);
      }
      update(report.entries[3], rel_error(g, g_fd), q);
    }

    // Goal-position residual Jacobian is the linear block of J.
    {
      const int d = p == 2 ? 2 : 3;
      const Mat Jg = J.topRows(d);
      Mat Jg_fd(d, n);
      for (int j = 0; j < n; ++j) {
        Vec qp = q, qm = q;
        qp[j] += kFdStep;
        qm[j] -= kFdStep;
        Jg_fd.col(j) = ((fk_position(model, qp) - fk_position(model, qm)) /
                        (2.0 * kFdStep))
                           .head(d);
      }
      update(report.entries[4], rel_error(Jg, Jg_fd), q);
    }

    // Collision hinge-cost gradient through the SDF (skipped for models
    // without collision spheres). The SDF itself is discretized, so compare
    // against finite differences of the same interpolated field.
    if (!model.collision_spheres().empty()) {
      Vec r;
      Mat dq;
      detail::collision_residual(model, sdf, q, cparams, r, &dq);
      const double step = 1e-5;  // larger than the trilinear kinks allow at 1e-6
      Mat dq_fd(r.size(), n);
      bool boundary = false;
      for (int j = 0; j < n; ++j) {
        Vec qp = q, qm = q;
        qp[j] += step;
        qm[j] -= step;
        Vec rp, rm;
        detail::collision_residual(model, sdf, qp, cparams, rp, nullptr);
        detail::collision_residual(model, sdf, qm, cparams, rm, nullptr);
        dq_fd.col(j) = (rp - rm) / (2.0 * step);
        for (Eigen::Index s = 0; s < r.size(); ++s) {
          // Skip samples straddling the hinge knee or a grid cell boundary.
          if ((rp[s] == 0.0) != (rm[s] == 0.0)) boundary = true;
        }
      }
      if (!boundary) {
        update(report.entries[5], rel_error(dq, dq_fd), q);
      }
    }
  }

  return report;
}

std::string gradcheck_to_string(const GradCheckReport& report) {
  std::ostringstream out;
  for (const GradCheckEntry& e : report.entries) {
    out << e.name << ": max relative error " << e.max_rel_error;
    if (e.max_rel_error >= 1e-4 && e.worst_config.size() > 0) {
      out << "  (worst config:";
      for (Eigen::Index i = 0; i < e.worst_config.size(); ++i) {
        out << " " << e.worst_config[i];
      }
      out << ")";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace gpmanip
