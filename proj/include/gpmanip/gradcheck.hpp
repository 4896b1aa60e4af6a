#ifndef GPMANIP_GRADCHECK_HPP_
#define GPMANIP_GRADCHECK_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "gpmanip/chain_model.hpp"
#include "gpmanip/types.hpp"

namespace gpmanip {

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  Vec worst_config;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  bool all_passed(double tol = 1e-4) const;
};

/// Compare every analytic derivative against central finite differences on
/// `samples` random in-limit configurations. Near-singular samples
/// (m < 1e-3 * m_max) are skipped and resampled: the truncated pseudo-inverse
/// is deliberately biased there.
GradCheckReport run_gradcheck(const ChainModel& model, int samples,
                              uint64_t seed);

std::string gradcheck_to_string(const GradCheckReport& report);

}  // namespace gpmanip

#endif  // GPMANIP_GRADCHECK_HPP_
