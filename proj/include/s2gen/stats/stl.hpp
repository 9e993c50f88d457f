#pragma once

#include <optional>
#include <span>
#include <vector>

namespace s2gen::stats {

/// Parameters of the Cleveland et al. (1990) STL procedure. Unset spans and
/// jumps take the usual defaults: trend = next odd >= 1.5 p / (1 - 1.5 / ns),
/// low-pass = next odd > p, jump = ceil(span / 10).
struct StlOptions {
    /// Seasonal smoother span (odd, >= 3). Unset selects a periodic fit:
    /// span 10 L + 1 with degree 0, i.e. cycle-subseries means.
    std::optional<int> seasonal;
    int seasonal_degree = 0;
    std::optional<int> trend;
    int trend_degree = 1;
    std::optional<int> low_pass;
    int low_pass_degree = 1;
    std::optional<int> seasonal_jump;
    std::optional<int> trend_jump;
    std::optional<int> low_pass_jump;
    int inner_iterations = 2;
};

struct StlDecomposition {
    std::vector<double> trend;
    std::vector<double> seasonal;
    std::vector<double> residual;
    int period = 0;
};

/// Additive decomposition y = trend + seasonal + residual.
/// Throws std::invalid_argument if period < 2 or L < 2 * period.
StlDecomposition stl_decompose(std::span<const double> series, int period, const StlOptions& options = {});

/// round(L / dominant frequency), clamped to [2, L / 2].
int infer_period(std::span<const double> series);

/// max{0, 1 - Var(R) / Var(S + R)}; 0 when Var(S + R) is 0.
double seasonality_strength(const StlDecomposition& decomposition);
double stl_seasonality(std::span<const double> series, std::optional<int> period = std::nullopt,
                       const StlOptions& options = {});

}  // namespace s2gen::stats
