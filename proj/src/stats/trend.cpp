#include "s2gen/stats/trend.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace s2gen::stats {

namespace {

// Sorts `values` and returns the number of pairs i < j with values[i] > values[j].
std::int64_t count_strict_inversions(std::vector<double>& values, std::vector<double>& scratch, std::size_t lo,
                                     std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::int64_t count = count_strict_inversions(values, scratch, lo, mid) +
                         count_strict_inversions(values, scratch, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        // Equal elements are taken from the left so ties never count.
        if (values[j] < values[i]) {
            count += static_cast<std::int64_t>(mid - i);
            scratch[k++] = values[j++];
        } else {
            scratch[k++] = values[i++];
        }
    }
    while (i < mid) scratch[k++] = values[i++];
    while (j < hi) scratch[k++] = values[j++];
    std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.begin() + static_cast<std::ptrdiff_t>(hi),
              values.begin() + static_cast<std::ptrdiff_t>(lo));
    return count;
}

}  // namespace

MannKendallResult mann_kendall_test(std::span<const double> series, double alpha) {
    if (series.size() < 10) throw std::invalid_argument("mann_kendall: need at least 10 observations");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("mann_kendall: alpha must be in (0, 1)");

    std::vector<double> sorted(series.begin(), series.end());
    std::vector<double> scratch(sorted.size());
    const std::int64_t discordant = count_strict_inversions(sorted, scratch, 0, sorted.size());

    const auto n = static_cast<std::int64_t>(series.size());
    std::int64_t tied_pairs = 0;
    double tie_term = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const auto t = static_cast<std::int64_t>(j - i);
        tied_pairs += t * (t - 1) / 2;
        tie_term += static_cast<double>(t) * static_cast<double>(t - 1) * static_cast<double>(2 * t + 5);
        i = j;
    }
    const std::int64_t total_pairs = n * (n - 1) / 2;
    const std::int64_t concordant = total_pairs - discordant - tied_pairs;

    MannKendallResult result;
    result.s = concordant - discordant;
    const double nd = static_cast<double>(n);
    result.variance = (nd * (nd - 1.0) * (2.0 * nd + 5.0) - tie_term) / 18.0;
    if (result.variance <= 0.0) return result;

    const double sd = std::sqrt(result.variance);
    if (result.s > 0) {
        result.z = static_cast<double>(result.s - 1) / sd;
    } else if (result.s < 0) {
        result.z = static_cast<double>(result.s + 1) / sd;
    }
    const double critical = boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - alpha / 2.0);
    if (std::fabs(result.z) > critical) result.trend = result.z > 0.0 ? 1 : -1;
    return result;
}

}  // namespace s2gen::stats
