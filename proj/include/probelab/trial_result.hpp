// trial_result.hpp
#pragma once

#include <cstdint>

namespace probelab {

// One completed detection trial.
struct TrialResult {
    int true_cell = 0;
    int declared = 0;
    std::int64_t tau = 0;    // observations taken
    std::int64_t tau_s = 0;  // switches between consecutive probes
    bool correct = false;
    bool truncated = false;  // step cap hit, or forced stop from a degenerate state
};

}  // namespace probelab
