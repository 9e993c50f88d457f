#include "s2gen/stats/adf.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace s2gen::stats {

namespace {

// MacKinnon (1994) surface, regression with constant, N = 1.
constexpr double kTauMax = 2.74;
constexpr double kTauMin = -18.83;
constexpr double kTauStar = -1.61;
constexpr double kSmallP[3] = {2.1659, 1.4412, 3.8269e-2};
constexpr double kLargeP[4] = {1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2};

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

struct OlsFit {
    double ssr = 0.0;
    double level_t = 0.0;
    int rank = 0;
};

// Columns of `design` are [level, constant, lags...]; the level coefficient's
// t-ratio is read from the first column.
OlsFit ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    OlsFit fit;
    fit.rank = static_cast<int>(qr.rank());
    if (fit.rank < design.cols()) throw std::domain_error("adf_test: singular regression");
    const Eigen::VectorXd beta = qr.solve(response);
    fit.ssr = (response - design * beta).squaredNorm();

    const auto rows = design.rows();
    const auto cols = design.cols();
    const double sigma2 = fit.ssr / static_cast<double>(rows - cols);
    // (X'X)^-1 = P R^-1 R^-T P'; only the [0,0] entry is needed.
    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(cols, cols).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(cols, cols));
    const Eigen::MatrixXd xtx_inv_permuted = r_inv * r_inv.transpose();
    const auto& perm = qr.colsPermutation().indices();
    Eigen::Index pos = 0;
    for (Eigen::Index i = 0; i < cols; ++i) {
        if (perm(i) == 0) pos = i;
    }
    const double var0 = sigma2 * xtx_inv_permuted(pos, pos);
    fit.level_t = beta(0) / std::sqrt(var0);
    return fit;
}

// Regression design for `lags` lagged differences using the rows t in [first_t, n-1).
void build_design(std::span<const double> x, const std::vector<double>& diff, int lags, int first_t,
                  Eigen::MatrixXd& design, Eigen::VectorXd& response) {
    const int n_diff = static_cast<int>(diff.size());
    const int rows = n_diff - first_t;
    design.resize(rows, 2 + lags);
    response.resize(rows);
    for (int r = 0; r < rows; ++r) {
        const int t = first_t + r;
        response(r) = diff[static_cast<std::size_t>(t)];
        design(r, 0) = x[static_cast<std::size_t>(t)];
        design(r, 1) = 1.0;
        for (int j = 1; j <= lags; ++j) design(r, 1 + j) = diff[static_cast<std::size_t>(t - j)];
    }
}

}  // namespace

int default_max_lag(std::size_t length) noexcept {
    const double n = static_cast<double>(length);
    const int schwert = static_cast<int>(std::floor(12.0 * std::pow(n / 100.0, 0.25)));
    const int cap = static_cast<int>(length / 2) - 2;
    return std::max(0, std::min(schwert, cap));
}

double mackinnon_p_value(double statistic) noexcept {
    if (std::isnan(statistic)) return std::numeric_limits<double>::quiet_NaN();
    if (statistic > kTauMax) return 1.0;
    if (statistic < kTauMin) return 0.0;
    double z;
    if (statistic <= kTauStar) {
        z = kSmallP[0] + statistic * (kSmallP[1] + statistic * kSmallP[2]);
    } else {
        z = kLargeP[0] + statistic * (kLargeP[1] + statistic * (kLargeP[2] + statistic * kLargeP[3]));
    }
    return normal_cdf(z);
}

AdfResult adf_test(std::span<const double> series, const AdfOptions& options) {
    if (series.size() < 20) throw std::invalid_argument("adf_test: need at least 20 observations");
    const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
    if (*lo == *hi) throw std::domain_error("adf_test: constant series");
    for (double v : series) {
        if (!std::isfinite(v)) throw std::domain_error("adf_test: non-finite value");
    }

    const int max_lag = options.max_lag ? *options.max_lag : default_max_lag(series.size());
    if (max_lag < 0 || max_lag > static_cast<int>(series.size() / 2) - 2) {
        throw std::invalid_argument("adf_test: max_lag out of range for the sample size");
    }

    std::vector<double> diff(series.size() - 1);
    for (std::size_t t = 0; t + 1 < series.size(); ++t) diff[t] = series[t + 1] - series[t];

    Eigen::MatrixXd design;
    Eigen::VectorXd response;
    int lag = max_lag;
    if (options.lag_selection == LagSelection::aic) {
        // Every candidate is fit on the same rows so the criteria are comparable.
        double best_aic = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= max_lag; ++k) {
            build_design(series, diff, k, max_lag, design, response);
            const OlsFit fit = ols(design, response);
            const double nobs = static_cast<double>(response.size());
            const double llf = -0.5 * nobs * (std::log(2.0 * std::numbers::pi) + std::log(fit.ssr / nobs) + 1.0);
            const double aic = -2.0 * llf + 2.0 * fit.rank;
            if (aic < best_aic) {
                best_aic = aic;
                lag = k;
            }
        }
    }

    build_design(series, diff, lag, lag, design, response);
    const OlsFit fit = ols(design, response);
    if (!std::isfinite(fit.level_t)) throw std::domain_error("adf_test: degenerate regression");

    AdfResult result;
    result.statistic = fit.level_t;
    result.p_value = mackinnon_p_value(fit.level_t);
    result.used_lag = lag;
    result.nobs = static_cast<int>(response.size());
    return result;
}

}  // namespace s2gen::stats
