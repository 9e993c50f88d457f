#pragma once

#include <optional>
#include <span>

namespace s2gen::stats {

enum class LagSelection {
    /// Use exactly max_lag lagged differences.
    fixed,
    /// Minimize AIC over 0..max_lag on a common sample, then refit on the full sample.
    aic,
};

struct AdfOptions {
    LagSelection lag_selection = LagSelection::aic;
    /// Defaults to floor(12 * (L / 100)^(1/4)), capped at L/2 - 2.
    std::optional<int> max_lag;
};

/// Augmented Dickey-Fuller test with a constant term:
///
///   dy_t = c + gamma * y_{t-1} + sum_{j=1..k} beta_j dy_{t-j} + e_t
///
/// `statistic` is the t-ratio of gamma; more negative means more evidence
/// against a unit root.
struct AdfResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int used_lag = 0;
    int nobs = 0;
};

/// Schwert rule, capped so the regression keeps enough observations.
int default_max_lag(std::size_t length) noexcept;

/// Throws std::invalid_argument for L < 20 and std::domain_error for a
/// constant or otherwise degenerate series.
AdfResult adf_test(std::span<const double> series, const AdfOptions& options = {});

/// MacKinnon (1994) response-surface p-value for the constant-only, single
/// series case.
double mackinnon_p_value(double statistic) noexcept;

}  // namespace s2gen::stats
