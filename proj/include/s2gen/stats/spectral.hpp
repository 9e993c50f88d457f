#pragma once

#include <span>
#include <vector>

namespace s2gen::stats {

/// One-sided power spectrum, bins 0..floor(L/2), scaled so that the bins sum
/// to sum(x^2) (Parseval).
std::vector<double> power_spectrum(std::span<const double> series);

/// Mean of the one-sided power spectrum.
double fft_mean(std::span<const double> series);

/// 1 - H(p) / log(floor(L/2)), where p is the normalized one-sided power
/// spectrum without the DC bin. 0 for a flat spectrum, 1 for a single line.
/// Throws std::invalid_argument for L < 16 and std::domain_error when all
/// non-DC power is zero.
double forecastability(std::span<const double> series);

/// Index k >= 1 of the strongest non-DC bin (lowest k on ties).
std::size_t dominant_frequency(std::span<const double> series);

}  // namespace s2gen::stats
