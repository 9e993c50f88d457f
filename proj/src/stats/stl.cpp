#include "s2gen/stats/stl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "s2gen/stats/spectral.hpp"

namespace s2gen::stats {

namespace {

// Positions are 1-based throughout, matching the original formulation:
// value y[j - 1] sits at position j.

// Local polynomial estimate at position xs from points nleft..nright.
// Returns false when every tricube weight vanishes.
bool loess_estimate(std::span<const double> y, int len, int degree, double xs, int nleft, int nright,
                    std::vector<double>& w, double& ys) {
    const int n = static_cast<int>(y.size());
    const double range = static_cast<double>(n) - 1.0;
    double h = std::max(xs - nleft, nright - xs);
    if (len > n) h += static_cast<double>((len - n) / 2);
    const double h9 = 0.999 * h;
    const double h1 = 0.001 * h;

    double total = 0.0;
    for (int j = nleft; j <= nright; ++j) {
        double& wj = w[static_cast<std::size_t>(j - 1)];
        wj = 0.0;
        const double r = std::fabs(j - xs);
        if (r <= h9) {
            if (r <= h1) {
                wj = 1.0;
            } else {
                const double q = r / h;
                const double t = 1.0 - q * q * q;
                wj = t * t * t;
            }
            total += wj;
        }
    }
    if (total <= 0.0) return false;
    for (int j = nleft; j <= nright; ++j) w[static_cast<std::size_t>(j - 1)] /= total;

    if (h > 0.0 && degree > 0) {
        double centre = 0.0;
        for (int j = nleft; j <= nright; ++j) centre += w[static_cast<std::size_t>(j - 1)] * j;
        double slope = xs - centre;
        double spread = 0.0;
        for (int j = nleft; j <= nright; ++j) {
            const double d = j - centre;
            spread += w[static_cast<std::size_t>(j - 1)] * d * d;
        }
        if (std::sqrt(spread) > 0.001 * range) {
            slope /= spread;
            for (int j = nleft; j <= nright; ++j) {
                w[static_cast<std::size_t>(j - 1)] *= slope * (j - centre) + 1.0;
            }
        }
    }
    double estimate = 0.0;
    for (int j = nleft; j <= nright; ++j) estimate += w[static_cast<std::size_t>(j - 1)] * y[static_cast<std::size_t>(j - 1)];
    ys = estimate;
    return true;
}

// LOESS smoother evaluated every `jump` positions with linear interpolation between.
void loess_smooth(std::span<const double> y, int len, int degree, int jump, std::span<double> out,
                  std::vector<double>& w) {
    const int n = static_cast<int>(y.size());
    auto at = [&](int pos) -> double& { return out[static_cast<std::size_t>(pos - 1)]; };
    auto fit = [&](int xs, int nleft, int nright) {
        double value;
        if (!loess_estimate(y, len, degree, xs, nleft, nright, w, value)) value = y[static_cast<std::size_t>(xs - 1)];
        at(xs) = value;
    };
    if (n < 2) {
        out[0] = y[0];
        return;
    }
    const int step = std::min(jump, n - 1);
    if (len >= n) {
        for (int i = 1; i <= n; i += step) fit(i, 1, n);
    } else if (step == 1) {
        const int half = (len + 1) / 2;
        int nleft = 1;
        int nright = len;
        for (int i = 1; i <= n; ++i) {
            if (i > half && nright != n) {
                ++nleft;
                ++nright;
            }
            fit(i, nleft, nright);
        }
    } else {
        const int half = (len + 1) / 2;
        for (int i = 1; i <= n; i += step) {
            int nleft, nright;
            if (i < half) {
                nleft = 1;
                nright = len;
            } else if (i >= n - half + 1) {
                nleft = n - len + 1;
                nright = n;
            } else {
                nleft = i - half + 1;
                nright = len + i - half;
            }
            fit(i, nleft, nright);
        }
    }
    if (step != 1) {
        for (int i = 1; i <= n - step; i += step) {
            const double delta = (at(i + step) - at(i)) / step;
            for (int j = i + 1; j < i + step; ++j) at(j) = at(i) + delta * (j - i);
        }
        const int k = ((n - 1) / step) * step + 1;
        if (k != n) {
            fit(n, std::max(1, n - len + 1), n);
            if (k != n - 1) {
                const double delta = (at(n) - at(k)) / (n - k);
                for (int j = k + 1; j < n; ++j) at(j) = at(k) + delta * (j - k);
            }
        }
    }
}

// Smooths each cycle-subseries and extends it by one position at both ends.
// Output has n + 2 * period entries.
void smooth_cycle_subseries(std::span<const double> y, int period, int span, int degree, int jump,
                            std::vector<double>& extended) {
    const int n = static_cast<int>(y.size());
    extended.assign(static_cast<std::size_t>(n + 2 * period), 0.0);
    std::vector<double> sub, smoothed, w(static_cast<std::size_t>(n + 2 * period));
    for (int j = 1; j <= period; ++j) {
        const int k = (n - j) / period + 1;
        sub.resize(static_cast<std::size_t>(k));
        for (int i = 1; i <= k; ++i) sub[static_cast<std::size_t>(i - 1)] = y[static_cast<std::size_t>((i - 1) * period + j - 1)];
        smoothed.assign(static_cast<std::size_t>(k + 2), 0.0);
        loess_smooth(sub, span, degree, jump, std::span<double>(smoothed).subspan(1, static_cast<std::size_t>(k)), w);

        double edge;
        const int nright = std::min(span, k);
        smoothed[0] = loess_estimate(sub, span, degree, 0.0, 1, nright, w, edge) ? edge : smoothed[1];
        const int nleft = std::max(1, k - span + 1);
        smoothed[static_cast<std::size_t>(k + 1)] = loess_estimate(sub, span, degree, k + 1.0, nleft, k, w, edge)
                                                        ? edge
                                                        : smoothed[static_cast<std::size_t>(k)];
        for (int m = 1; m <= k + 2; ++m) {
            extended[static_cast<std::size_t>((m - 1) * period + j - 1)] = smoothed[static_cast<std::size_t>(m - 1)];
        }
    }
}

std::vector<double> moving_average(std::span<const double> x, int len) {
    const int n = static_cast<int>(x.size());
    const int out_len = n - len + 1;
    std::vector<double> out(static_cast<std::size_t>(out_len));
    double sum = 0.0;
    for (int i = 0; i < len; ++i) sum += x[static_cast<std::size_t>(i)];
    out[0] = sum / len;
    for (int j = 1; j < out_len; ++j) {
        sum += x[static_cast<std::size_t>(j + len - 1)] - x[static_cast<std::size_t>(j - 1)];
        out[static_cast<std::size_t>(j)] = sum / len;
    }
    return out;
}

int next_odd_at_least(double v) {
    int k = static_cast<int>(std::ceil(v));
    if (k % 2 == 0) ++k;
    return k;
}

int require_odd_span(int span, const char* what) {
    if (span < 3 || span % 2 == 0) {
        throw std::invalid_argument(std::string("stl: ") + what + " span must be odd and >= 3");
    }
    return span;
}

double variance(std::span<const double> v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return acc / static_cast<double>(v.size());
}

}  // namespace

StlDecomposition stl_decompose(std::span<const double> series, int period, const StlOptions& options) {
    const int n = static_cast<int>(series.size());
    if (period < 2) throw std::invalid_argument("stl: period must be >= 2");
    if (n < 2 * period) throw std::invalid_argument("stl: series shorter than two periods");

    int seasonal_degree = options.seasonal_degree;
    int seasonal_span;
    if (options.seasonal) {
        seasonal_span = require_odd_span(*options.seasonal, "seasonal");
    } else {
        seasonal_span = 10 * n + 1;
        seasonal_degree = 0;
    }
    const int trend_span = options.trend ? require_odd_span(*options.trend, "trend")
                                         : next_odd_at_least(1.5 * period / (1.0 - 1.5 / seasonal_span));
    const int low_pass_span = options.low_pass ? require_odd_span(*options.low_pass, "low-pass")
                                               : next_odd_at_least(period + 1.0);
    auto default_jump = [](int span) { return static_cast<int>(std::ceil(span / 10.0)); };
    const int seasonal_jump = options.seasonal_jump.value_or(default_jump(seasonal_span));
    const int trend_jump = options.trend_jump.value_or(default_jump(trend_span));
    const int low_pass_jump = options.low_pass_jump.value_or(default_jump(low_pass_span));
    if (seasonal_jump < 1 || trend_jump < 1 || low_pass_jump < 1) throw std::invalid_argument("stl: jumps must be >= 1");

    StlDecomposition out;
    out.period = period;
    out.trend.assign(static_cast<std::size_t>(n), 0.0);
    out.seasonal.assign(static_cast<std::size_t>(n), 0.0);

    std::vector<double> detrended(static_cast<std::size_t>(n));
    std::vector<double> extended;
    std::vector<double> low_pass(static_cast<std::size_t>(n));
    std::vector<double> weights(static_cast<std::size_t>(n + 2 * period));
    for (int iter = 0; iter < options.inner_iterations; ++iter) {
        for (int i = 0; i < n; ++i) detrended[static_cast<std::size_t>(i)] = series[static_cast<std::size_t>(i)] - out.trend[static_cast<std::size_t>(i)];
        smooth_cycle_subseries(detrended, period, seasonal_span, seasonal_degree, seasonal_jump, extended);

        const auto pass1 = moving_average(extended, period);
        const auto pass2 = moving_average(pass1, period);
        const auto pass3 = moving_average(pass2, 3);
        loess_smooth(pass3, low_pass_span, options.low_pass_degree, low_pass_jump, low_pass, weights);

        for (int i = 0; i < n; ++i) {
            out.seasonal[static_cast<std::size_t>(i)] =
                extended[static_cast<std::size_t>(period + i)] - low_pass[static_cast<std::size_t>(i)];
        }
        for (int i = 0; i < n; ++i) {
            detrended[static_cast<std::size_t>(i)] = series[static_cast<std::size_t>(i)] - out.seasonal[static_cast<std::size_t>(i)];
        }
        loess_smooth(detrended, trend_span, options.trend_degree, trend_jump, out.trend, weights);
    }

    out.residual.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        out.residual[k] = series[k] - out.trend[k] - out.seasonal[k];
    }
    return out;
}

int infer_period(std::span<const double> series) {
    if (series.size() < 4) throw std::invalid_argument("infer_period: need at least 4 samples");
    const std::size_t k = dominant_frequency(series);
    const int raw = static_cast<int>(std::lround(static_cast<double>(series.size()) / static_cast<double>(k)));
    const int period = std::clamp(raw, 2, static_cast<int>(series.size() / 2));
    if (period < 2) throw std::domain_error("infer_period: inferred period below 2");
    return period;
}

double seasonality_strength(const StlDecomposition& d) {
    std::vector<double> detrended(d.seasonal.size());
    for (std::size_t i = 0; i < detrended.size(); ++i) detrended[i] = d.seasonal[i] + d.residual[i];
    const double total = variance(detrended);
    if (!(total > 0.0)) return 0.0;
    return std::max(0.0, 1.0 - variance(d.residual) / total);
}

double stl_seasonality(std::span<const double> series, std::optional<int> period, const StlOptions& options) {
    const int p = period ? *period : infer_period(series);
    return seasonality_strength(stl_decompose(series, p, options));
}

}  // namespace s2gen::stats
