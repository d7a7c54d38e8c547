#pragma once

#include <string>
#include <vector>

#include "ipmsm/config.hpp"

namespace ipmsm {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast self-check of the library invariants (MTPA closed form vs grid search,
/// RLS vs batch least squares, covariance positivity, dual objective identities,
/// bank purity under prediction, observer steady-state exactness, RK4 order,
/// and CSV determinism on a short run of `cfg`).
std::vector<CheckResult> run_validation(const RunConfig& cfg);

}  // namespace ipmsm
