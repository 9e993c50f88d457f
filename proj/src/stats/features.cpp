#include "s2gen/stats/features.hpp"

#include <exception>
#include <stdexcept>

#include "s2gen/stats/adf.hpp"
#include "s2gen/stats/ordinal.hpp"
#include "s2gen/stats/spectral.hpp"
#include "s2gen/stats/stl.hpp"
#include "s2gen/stats/trend.hpp"

namespace s2gen::stats {

Characterization characterize(std::span<const double> series) {
    if (series.size() < 32) throw std::invalid_argument("characterize: need at least 32 samples");
    Characterization out;
    auto guarded = [&](const char* metric, auto&& compute) {
        try {
            compute();
        } catch (const std::exception& e) {
            out.errors.push_back({metric, e.what()});
        }
    };
    FeatureVector& f = out.features;
    guarded("adf", [&] {
        const AdfResult adf = adf_test(series);
        f.adf_stat = adf.statistic;
        f.adf_p = adf.p_value;
    });
    guarded("forecastability", [&] { f.forecastability = forecastability(series); });
    guarded("fft_mean", [&] { f.fft_mean = fft_mean(series); });
    guarded("perm_entropy", [&] { f.perm_entropy = permutation_entropy(series); });
    guarded("seasonality", [&] { f.seasonality = stl_seasonality(series); });
    guarded("mk_trend", [&] { f.mk_trend = mann_kendall(series); });
    return out;
}

}  // namespace s2gen::stats
