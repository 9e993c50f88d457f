#pragma once

#include <cstdint>
#include <span>

namespace s2gen::stats {

struct MannKendallResult {
    std::int64_t s = 0;
    /// Tie-corrected variance of S.
    double variance = 0.0;
    double z = 0.0;
    /// -1 downward, 0 no trend, +1 upward.
    int trend = 0;
};

/// Two-sided Mann-Kendall test with the normal approximation and continuity
/// correction. O(L log L).
MannKendallResult mann_kendall_test(std::span<const double> series, double alpha = 0.05);

inline int mann_kendall(std::span<const double> series, double alpha = 0.05) {
    return mann_kendall_test(series, alpha).trend;
}

}  // namespace s2gen::stats
