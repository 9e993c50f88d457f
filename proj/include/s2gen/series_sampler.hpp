#pragma once

#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "s2gen/rng.hpp"
#include "s2gen/series_matrix.hpp"

namespace s2gen {

struct GaussianComponent {
    double mean = 0.0;
    double stddev = 1.0;
    friend bool operator==(const GaussianComponent&, const GaussianComponent&) = default;
};

struct UniformComponent {
    double lo = 0.0;
    double hi = 1.0;
    friend bool operator==(const UniformComponent&, const UniformComponent&) = default;
};

using MixtureComponent = std::variant<GaussianComponent, UniformComponent>;

struct MixtureSpec {
    std::vector<double> weights;
    std::vector<MixtureComponent> components;

    /// Throws std::invalid_argument unless k >= 1, weights >= 0 and sum to 1 within 1e-12.
    void validate() const;

    friend bool operator==(const MixtureSpec&, const MixtureSpec&) = default;
};

/// Y_t = sum_i phi_i Y_{t-i} + e_t - sum_j theta_j e_{t-j}
struct ArmaParams {
    std::vector<double> phi;
    std::vector<double> theta;

    /// sum(phi) < 1 and |phi_p| < 1. This is weaker than full AR stationarity for p >= 2.
    bool satisfies_constraints() const noexcept;

    friend bool operator==(const ArmaParams&, const ArmaParams&) = default;
};

struct InputSamplerConfig {
    double p_mixture = 0.5;
    int k_max = 5;
    int p_max = 3;
    int q_max = 3;
    int length = 256;
    /// Negative selects 10 * max(p, q) + 100.
    int burn_in = -1;

    void validate() const;

    friend bool operator==(const InputSamplerConfig&, const InputSamplerConfig&) = default;
};

/// Thrown when the ARMA recursion leaves the finite range.
class ArmaDivergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RejectionBudgetExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// U(0, mu) with the bounds ordered, so a negative mu gives U(mu, 0).
UniformComponent uniform_zero_to(double mu) noexcept;

MixtureSpec sample_mixture_spec(const InputSamplerConfig& cfg, Rng& rng);
/// Same as above with k fixed; used where the component count must be pinned.
MixtureSpec sample_mixture_spec(int k, Rng& rng);
Series draw_mixture(const MixtureSpec& spec, std::size_t length, Rng& rng);

ArmaParams sample_arma_params(const InputSamplerConfig& cfg, Rng& rng);
int default_burn_in(const ArmaParams& params) noexcept;
Series simulate_arma(const ArmaParams& params, std::size_t length, int burn_in, Rng& rng);
/// Deterministic recursion over caller-supplied innovations, zero initial state, no burn-in.
Series simulate_arma(const ArmaParams& params, std::span<const double> innovations);

using ChannelProvenance = std::variant<MixtureSpec, ArmaParams>;

struct InputSample {
    SeriesMatrix values;
    std::vector<ChannelProvenance> channels;
};

/// Each channel independently: mixture with probability p_mixture, else ARMA.
InputSample sample_input(int m_inputs, const InputSamplerConfig& cfg, Rng& rng);

}  // namespace s2gen
