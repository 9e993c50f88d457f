#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace s2gen::stats {

/// Counts of each ordinal pattern of length m at the given delay, indexed by
/// the pattern's Lehmer code (0 .. m!-1). Equal values rank by position.
std::vector<std::size_t> ordinal_pattern_counts(std::span<const double> series, int m = 3, int delay = 1);

/// Shannon entropy (natural log) of the ordinal pattern distribution; lies in [0, ln m!].
/// Throws std::invalid_argument when L < m * delay + 1.
double permutation_entropy(std::span<const double> series, int m = 3, int delay = 1);

}  // namespace s2gen::stats
