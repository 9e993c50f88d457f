#include "s2gen/stats/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace s2gen::stats {

namespace {

// The FFTW planner is not reentrant; execution of a finished plan is.
std::mutex planner_mutex;

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

std::vector<std::complex<double>> real_fft(std::span<const double> series) {
    const int n = static_cast<int>(series.size());
    const int bins = n / 2 + 1;
    std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * series.size())));
    std::unique_ptr<fftw_complex, FftwFree> out(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(bins))));
    if (!in || !out) throw std::bad_alloc();

    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex);
        plan = fftw_plan_dft_r2c_1d(n, in.get(), out.get(), FFTW_ESTIMATE);
    }
    std::copy(series.begin(), series.end(), in.get());
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex);
        fftw_destroy_plan(plan);
    }

    std::vector<std::complex<double>> spectrum(static_cast<std::size_t>(bins));
    for (int k = 0; k < bins; ++k) spectrum[static_cast<std::size_t>(k)] = {out.get()[k][0], out.get()[k][1]};
    return spectrum;
}

}  // namespace

std::vector<double> power_spectrum(std::span<const double> series) {
    if (series.size() < 2) throw std::invalid_argument("power_spectrum: need at least 2 samples");
    const auto spectrum = real_fft(series);
    const std::size_t n = series.size();
    std::vector<double> power(spectrum.size());
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        // Interior bins stand for both +k and -k.
        const bool self_conjugate = k == 0 || (n % 2 == 0 && k == n / 2);
        power[k] = (self_conjugate ? 1.0 : 2.0) * std::norm(spectrum[k]) / static_cast<double>(n);
    }
    return power;
}

double fft_mean(std::span<const double> series) {
    const auto power = power_spectrum(series);
    return std::accumulate(power.begin(), power.end(), 0.0) / static_cast<double>(power.size());
}

double forecastability(std::span<const double> series) {
    if (series.size() < 16) throw std::invalid_argument("forecastability: need at least 16 samples");
    const auto power = power_spectrum(series);
    const std::size_t bins = series.size() / 2;
    double total = 0.0;
    for (std::size_t k = 1; k <= bins; ++k) total += power[k];
    if (!(total > 0.0)) throw std::domain_error("forecastability: zero spectral power");
    double entropy = 0.0;
    for (std::size_t k = 1; k <= bins; ++k) {
        const double p = power[k] / total;
        if (p > 0.0) entropy -= p * std::log(p);
    }
    const double omega = 1.0 - entropy / std::log(static_cast<double>(bins));
    return std::clamp(omega, 0.0, 1.0);
}

std::size_t dominant_frequency(std::span<const double> series) {
    const auto power = power_spectrum(series);
    std::size_t best = 1;
    for (std::size_t k = 2; k < power.size(); ++k) {
        if (power[k] > power[best]) best = k;
    }
    return best;
}

}  // namespace s2gen::stats
