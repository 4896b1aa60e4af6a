#include "gpmanip/kinematics.hpp"

#include <random>
#include <stdexcept>

#include <Eigen/SVD>

namespace gpmanip {

FkResult forward_kinematics(const ChainModel& model, const Vec& q) {
  const int n = model.dof();
  if (q.size() != n) {
    throw std::invalid_argument("configuration dimension mismatch");
  }
  if (!q.allFinite()) {
    throw std::invalid_argument("configuration has non-finite entries");
  }

  FkResult out;
  out.link_frames.reserve(static_cast<size_t>(n));
  out.axes.reserve(static_cast<size_t>(n));
  out.origins.reserve(static_cast<size_t>(n));

  Pose T;
  for (int i = 0; i < n; ++i) {
    const Joint& jt = model.joint(i);
    T = T * jt.origin;
    out.axes.push_back(T.R * jt.axis);
    out.origins.push_back(T.p);
    Pose rot;
    rot.R = Eigen::AngleAxisd(q[i], jt.axis).toRotationMatrix();
    T = T * rot;
    out.link_frames.push_back(T);
  }
  out.ee = T * model.ee_offset();
  return out;
}

Vec3 fk_position(const ChainModel& model, const Vec& q) {
  return forward_kinematics(model, q).ee.p;
}

Vec3 sphere_center(const ChainModel& model, const FkResult& fk,
                   const CollisionSphere& sphere) {
  (void)model;
  return fk.link_frames[static_cast<size_t>(sphere.link)].apply(sphere.center);
}

namespace {

// Packs linear (3 x n) and angular (3 x n) blocks per the model's task_dim.
Mat pack_rows(const ChainModel& model, const Mat& lin, const Mat& ang) {
  const int n = model.dof();
  const int p = model.task_dim();
  Mat J(p, n);
  if (p == 2) {
    J = lin.topRows(2);
  } else if (p == 3) {
    J = lin;
  } else {
    J.topRows(3) = lin;
    J.bottomRows(3) = ang;
  }
  return J;
}

}  // namespace

Mat jacobian(const ChainModel& model, const Vec& q) {
  const FkResult fk = forward_kinematics(model, q);
  const int n = model.dof();
  Mat lin(3, n), ang(3, n);
  for (int i = 0; i < n; ++i) {
    lin.col(i) = fk.axes[static_cast<size_t>(i)].cross(
        Vec3(fk.ee.p - fk.origins[static_cast<size_t>(i)]));
    ang.col(i) = fk.axes[static_cast<size_t>(i)];
  }
  return pack_rows(model, lin, ang);
}

Mat jacobian_partial(const ChainModel& model, const Vec& q, int j) {
  const int n = model.dof();
  if (j < 0 || j >= n) throw std::out_of_range("joint index out of range");

  const FkResult fk = forward_kinematics(model, q);
  const Vec3 zj = fk.axes[static_cast<size_t>(j)];
  const Vec3 pj = fk.origins[static_cast<size_t>(j)];
  const Vec3 e = fk.ee.p;

  Mat dlin = Mat::Zero(3, n), dang = Mat::Zero(3, n);
  for (int i = 0; i < n; ++i) {
    const Vec3 zi = fk.axes[static_cast<size_t>(i)];
    const Vec3 pi = fk.origins[static_cast<size_t>(i)];
    if (j < i) {
      // z_i and p_i both rotate with joint j; e - p_i rotates rigidly.
      const Vec3 dzi = zj.cross(zi);
      dlin.col(i) = dzi.cross(Vec3(e - pi)) + zi.cross(zj.cross(Vec3(e - pi)));
      dang.col(i) = dzi;
    } else {
      // z_i, p_i fixed; only the end-effector point moves with joint j.
      dlin.col(i) = zi.cross(zj.cross(Vec3(e - pj)));
    }
  }
  return pack_rows(model, dlin, dang);
}

Mat point_jacobian(const ChainModel& model, const FkResult& fk, int link,
                   const Vec3& world_point) {
  const int n = model.dof();
  Mat J = Mat::Zero(3, n);
  for (int i = 0; i <= link && i < n; ++i) {
    J.col(i) = fk.axes[static_cast<size_t>(i)].cross(
        Vec3(world_point - fk.origins[static_cast<size_t>(i)]));
  }
  return J;
}

ManipReport manipulability(const ChainModel& model, const Vec& q) {
  const Mat J = jacobian(model, q);
  Eigen::JacobiSVD<Mat> svd(J);
  ManipReport rep;
  rep.singular_values = svd.singularValues();
  rep.smallest_sv = rep.singular_values[rep.singular_values.size() - 1];
  rep.m = rep.singular_values.prod();
  return rep;
}

Mat pseudo_inverse(const Mat& J, double rel_tol) {
  Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  const double cutoff = rel_tol * sv[0];
  Vec inv_sv = Vec::Zero(sv.size());
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] > cutoff && sv[i] > 0.0) inv_sv[i] = 1.0 / sv[i];
  }
  return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
}

Vec manipulability_gradient(const ChainModel& model, const Vec& q) {
  const int n = model.dof();
  const Mat J = jacobian(model, q);
  const Mat J_pinv = pseudo_inverse(J);
  const double m = manipulability(model, q).m;
  Vec grad(n);
  for (int j = 0; j < n; ++j) {
    grad[j] = m * (jacobian_partial(model, q, j) * J_pinv).trace();
  }
  return grad;
}

double estimate_m_max(const ChainModel& model, int samples, uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  std::mt19937_64 rng(seed);
  const Vec lo = model.lower_limits();
  const Vec hi = model.upper_limits();
  const int n = model.dof();
  Vec q(n);
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < n; ++i) {
      std::uniform_real_distribution<double> dist(lo[i], hi[i]);
      q[i] = dist(rng);
    }
    best = std::max(best, manipulability(model, q).m);
  }
  return 1.05 * best;
}

}  // namespace gpmanip
