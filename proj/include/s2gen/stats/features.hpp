#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace s2gen::stats {

/// Characterization of one series segment. A metric that could not be
/// computed is NaN and has an entry in Characterization::errors.
struct FeatureVector {
    static constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

    double adf_stat = kMissing;
    double adf_p = kMissing;
    double forecastability = kMissing;
    double fft_mean = kMissing;
    double perm_entropy = kMissing;
    double seasonality = kMissing;
    int mk_trend = 0;
};

struct MetricError {
    std::string metric;
    std::string message;
};

struct Characterization {
    FeatureVector features;
    std::vector<MetricError> errors;

    bool complete() const noexcept { return errors.empty(); }
};

/// All six metrics with their default settings. Requires L >= 32
/// (std::invalid_argument otherwise); per-metric failures are collected.
Characterization characterize(std::span<const double> series);

}  // namespace s2gen::stats
