#ifndef GPMANIP_TEST_HELPERS_HPP_
#define GPMANIP_TEST_HELPERS_HPP_

#include <random>
#include <string>

#include "gpmanip/chain_model.hpp"
#include "gpmanip/types.hpp"

namespace gpmanip::test {

inline std::string model_path(const std::string& name) {
  return std::string(GPMANIP_SOURCE_DIR) + "/models/" + name;
}

inline std::string scenario_path(const std::string& name) {
  return std::string(GPMANIP_SOURCE_DIR) + "/scenarios/" + name;
}

inline ChainModel planar_2r() {
  return ChainModel::from_json_file(model_path("planar_2r.json"));
}

inline ChainModel planar_3r() {
  return ChainModel::from_json_file(model_path("planar_3r.json"));
}

inline ChainModel ur10() {
  return ChainModel::from_json_file(model_path("ur10.json"));
}

inline Vec random_config(const ChainModel& model, std::mt19937_64& rng) {
  const Vec lo = model.lower_limits();
  const Vec hi = model.upper_limits();
  Vec q(model.dof());
  for (int i = 0; i < model.dof(); ++i) {
    std::uniform_real_distribution<double> dist(lo[i], hi[i]);
    q[i] = dist(rng);
  }
  return q;
}

}  // namespace gpmanip::test

#endif  // GPMANIP_TEST_HELPERS_HPP_
