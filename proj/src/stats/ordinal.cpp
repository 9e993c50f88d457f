#include "s2gen/stats/ordinal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace s2gen::stats {

namespace {

constexpr int kMaxOrder = 10;

std::size_t factorial(int m) {
    std::size_t f = 1;
    for (int i = 2; i <= m; ++i) f *= static_cast<std::size_t>(i);
    return f;
}

}  // namespace

std::vector<std::size_t> ordinal_pattern_counts(std::span<const double> series, int m, int delay) {
    if (m < 2 || m > kMaxOrder) throw std::invalid_argument("ordinal patterns: m must be in [2, 10]");
    if (delay < 1) throw std::invalid_argument("ordinal patterns: delay must be >= 1");
    const std::size_t span = static_cast<std::size_t>(m - 1) * static_cast<std::size_t>(delay);
    if (series.size() < static_cast<std::size_t>(m) * static_cast<std::size_t>(delay) + 1) {
        throw std::invalid_argument("ordinal patterns: series shorter than m * delay + 1");
    }

    std::vector<std::size_t> counts(factorial(m), 0);
    std::array<int, kMaxOrder> order{};
    std::array<double, kMaxOrder> window{};
    for (std::size_t t = 0; t + span < series.size(); ++t) {
        for (int k = 0; k < m; ++k) window[static_cast<std::size_t>(k)] = series[t + static_cast<std::size_t>(k * delay)];
        std::iota(order.begin(), order.begin() + m, 0);
        std::stable_sort(order.begin(), order.begin() + m,
                         [&](int a, int b) { return window[static_cast<std::size_t>(a)] < window[static_cast<std::size_t>(b)]; });
        // Lehmer code of the sorting permutation.
        std::size_t code = 0;
        for (int i = 0; i < m; ++i) {
            int smaller_after = 0;
            for (int j = i + 1; j < m; ++j) {
                if (order[static_cast<std::size_t>(j)] < order[static_cast<std::size_t>(i)]) ++smaller_after;
            }
            code = code * static_cast<std::size_t>(m - i) + static_cast<std::size_t>(smaller_after);
        }
        ++counts[code];
    }
    return counts;
}

double permutation_entropy(std::span<const double> series, int m, int delay) {
    const auto counts = ordinal_pattern_counts(series, m, delay);
    const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
    double entropy = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / total;
        entropy -= p * std::log(p);
    }
    return entropy;
}

}  // namespace s2gen::stats
