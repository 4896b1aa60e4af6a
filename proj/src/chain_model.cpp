#include "gpmanip/chain_model.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gpmanip {

namespace {

Vec3 read_vec3(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw std::invalid_argument("expected a 3-element array");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Pose read_origin(const nlohmann::json& j) {
  Pose pose;
  if (j.contains("xyz")) pose.p = read_vec3(j["xyz"]);
  if (j.contains("rpy")) {
    const Vec3 rpy = read_vec3(j["rpy"]);
    pose.R = rpy_to_rotation(rpy.x(), rpy.y(), rpy.z());
  }
  return pose;
}

}  // namespace

ChainModel::ChainModel(std::vector<Joint> joints, int task_dim,
                       std::vector<CollisionSphere> spheres, Pose ee_offset)
    : joints_(std::move(joints)),
      task_dim_(task_dim),
      spheres_(std::move(spheres)),
      ee_offset_(ee_offset) {
  if (task_dim_ != 2 && task_dim_ != 3 && task_dim_ != 6) {
    throw std::invalid_argument("task_dim must be 2, 3 or 6");
  }
  if (dof() < task_dim_) {
    throw std::invalid_argument(
        "chain needs at least task_dim joints (JJ^T structurally singular)");
  }
  for (size_t i = 0; i < joints_.size(); ++i) {
    const Joint& jt = joints_[i];
    if (std::abs(jt.axis.norm() - 1.0) > 1e-12) {
      throw std::invalid_argument("joint " + std::to_string(i) +
                                  ": axis is not unit-norm");
    }
    if (!(jt.lower < jt.upper)) {
      throw std::invalid_argument("joint " + std::to_string(i) +
                                  ": limits must satisfy lower < upper");
    }
  }
  for (const CollisionSphere& s : spheres_) {
    if (s.link < 0 || s.link >= dof()) {
      throw std::invalid_argument("collision sphere references invalid link");
    }
    if (s.radius < 0.0) {
      throw std::invalid_argument("collision sphere radius must be >= 0");
    }
  }
}

Vec ChainModel::lower_limits() const {
  Vec lo(dof());
  for (int i = 0; i < dof(); ++i) lo[i] = joints_[static_cast<size_t>(i)].lower;
  return lo;
}

Vec ChainModel::upper_limits() const {
  Vec hi(dof());
  for (int i = 0; i < dof(); ++i) hi[i] = joints_[static_cast<size_t>(i)].upper;
  return hi;
}

Vec ChainModel::clamp_to_limits(const Vec& q) const {
  return q.cwiseMax(lower_limits()).cwiseMin(upper_limits());
}

bool ChainModel::within_limits(const Vec& q, double tol) const {
  for (int i = 0; i < dof(); ++i) {
    const Joint& jt = joints_[static_cast<size_t>(i)];
    if (q[i] < jt.lower - tol || q[i] > jt.upper + tol) return false;
  }
  return true;
}

ChainModel ChainModel::from_json_string(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text);

  std::vector<Joint> joints;
  for (const auto& jj : doc.at("joints")) {
    Joint jt;
    jt.axis = read_vec3(jj.at("axis"));
    if (jj.contains("origin")) jt.origin = read_origin(jj["origin"]);
    if (jj.contains("limits")) {
      jt.lower = jj["limits"].at("lower").get<double>();
      jt.upper = jj["limits"].at("upper").get<double>();
    }
    joints.push_back(jt);
  }

  std::vector<CollisionSphere> spheres;
  if (doc.contains("collision_spheres")) {
    for (const auto& js : doc["collision_spheres"]) {
      CollisionSphere s;
      s.link = js.at("link").get<int>();
      s.center = read_vec3(js.at("center"));
      s.radius = js.at("radius").get<double>();
      spheres.push_back(s);
    }
  }

  Pose ee_offset;
  if (doc.contains("ee_offset")) ee_offset = read_origin(doc["ee_offset"]);

  const int task_dim = doc.at("task_dim").get<int>();
  return ChainModel(std::move(joints), task_dim, std::move(spheres),
                    ee_offset);
}

ChainModel ChainModel::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open robot model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_string(buf.str());
}

}  // namespace gpmanip
