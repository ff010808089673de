#pragma once

#include <string>
#include <vector>

namespace fvi {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// The fast property checks (tableau invariants, weight structure, CQ
/// identities, closed-form agreement, energy, action stationarity).
std::vector<CheckResult> run_property_suite(double newton_tol = 1e-12);

}  // namespace fvi
