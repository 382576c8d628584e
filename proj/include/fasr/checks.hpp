#pragma once

#include <string>
#include <vector>

#include "fasr/config.hpp"
#include "fasr/scorenet.hpp"

namespace fasr {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Max relative error between hand-written backprop and central finite
// differences of a random linear functional of the raw head, over every
// parameter element. worst_param names the offending tensor, if any.
double gradient_check_max_rel_error(const ArchDescriptor& arch,
                                    std::size_t image_size, std::uint64_t seed,
                                    std::string* worst_param = nullptr);

// Release-gate diagnostics: schedule closed forms, analytic score vs
// finite differences, forward-SDE variance agreement, network gradient
// check, metric oracles.
std::vector<CheckResult> run_diagnostics(const RunConfig& cfg);

}  // namespace fasr
