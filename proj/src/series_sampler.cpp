#include "s2gen/series_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "s2gen/overloaded.hpp"

namespace s2gen {

namespace {

constexpr int kMaxArmaRejections = 10'000;

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

}  // namespace

void MixtureSpec::validate() const {
    require(!weights.empty(), "mixture: k must be >= 1");
    require(weights.size() == components.size(), "mixture: weights and components differ in length");
    double total = 0.0;
    for (double w : weights) {
        require(w >= 0.0, "mixture: negative weight");
        total += w;
    }
    require(std::fabs(total - 1.0) <= 1e-12, "mixture: weights must sum to 1");
}

bool ArmaParams::satisfies_constraints() const noexcept {
    if (phi.empty() || theta.empty()) return false;
    const double total = std::accumulate(phi.begin(), phi.end(), 0.0);
    const auto in_open_unit = [](double v) { return v > -1.0 && v < 1.0; };
    return total < 1.0 && std::fabs(phi.back()) < 1.0 && std::all_of(phi.begin(), phi.end(), in_open_unit) &&
           std::all_of(theta.begin(), theta.end(), in_open_unit);
}

void InputSamplerConfig::validate() const {
    require(p_mixture >= 0.0 && p_mixture <= 0.5, "p_mixture must be in [0, 0.5]");
    require(k_max >= 1, "k_max must be >= 1");
    require(p_max >= 1, "p_max must be >= 1");
    require(q_max >= 1, "q_max must be >= 1");
    require(length >= 1, "length must be >= 1");
}

UniformComponent uniform_zero_to(double mu) noexcept { return {std::min(0.0, mu), std::max(0.0, mu)}; }

MixtureSpec sample_mixture_spec(int k, Rng& rng) {
    if (k < 1) throw std::invalid_argument("sample_mixture_spec: k must be >= 1");
    MixtureSpec spec;
    spec.weights.resize(static_cast<std::size_t>(k));
    for (double& w : spec.weights) w = rng.uniform01();
    const double total = std::accumulate(spec.weights.begin(), spec.weights.end(), 0.0);
    if (total > 0.0) {
        for (double& w : spec.weights) w /= total;
    } else {
        std::fill(spec.weights.begin(), spec.weights.end(), 1.0 / k);
    }
    spec.components.reserve(spec.weights.size());
    for (int j = 0; j < k; ++j) {
        const double mu = rng.normal();
        if (rng.bernoulli(0.5)) {
            spec.components.emplace_back(GaussianComponent{mu, rng.uniform01()});
        } else {
            spec.components.emplace_back(uniform_zero_to(mu));
        }
    }
    return spec;
}

MixtureSpec sample_mixture_spec(const InputSamplerConfig& cfg, Rng& rng) {
    return sample_mixture_spec(rng.uniform_int(1, cfg.k_max), rng);
}

Series draw_mixture(const MixtureSpec& spec, std::size_t length, Rng& rng) {
    spec.validate();
    std::vector<double> cumulative(spec.weights.size());
    std::partial_sum(spec.weights.begin(), spec.weights.end(), cumulative.begin());
    Series out(length);
    for (double& value : out) {
        const double u = rng.uniform01() * cumulative.back();
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        // Skip zero-weight components that share a cumulative boundary.
        std::size_t j = std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
        while (spec.weights[j] == 0.0 && j + 1 < spec.weights.size()) ++j;
        value = std::visit(Overloaded{
                               [&](const GaussianComponent& g) { return rng.normal(g.mean, g.stddev); },
                               [&](const UniformComponent& u01) { return rng.uniform(u01.lo, u01.hi); },
                           },
                           spec.components[j]);
    }
    return out;
}

ArmaParams sample_arma_params(const InputSamplerConfig& cfg, Rng& rng) {
    ArmaParams params;
    const int p = rng.uniform_int(1, cfg.p_max);
    const int q = rng.uniform_int(1, cfg.q_max);
    params.phi.resize(static_cast<std::size_t>(p));
    params.theta.resize(static_cast<std::size_t>(q));
    for (double& t : params.theta) t = rng.uniform(-1.0, 1.0);
    for (int attempt = 0; attempt < kMaxArmaRejections; ++attempt) {
        for (double& f : params.phi) f = rng.uniform(-1.0, 1.0);
        if (params.satisfies_constraints()) return params;
    }
    throw RejectionBudgetExhausted("sample_arma_params: no admissible AR coefficients after 10000 draws");
}

int default_burn_in(const ArmaParams& params) noexcept {
    return 10 * static_cast<int>(std::max(params.phi.size(), params.theta.size())) + 100;
}

Series simulate_arma(const ArmaParams& params, std::span<const double> innovations) {
    const std::size_t p = params.phi.size();
    const std::size_t q = params.theta.size();
    Series y(innovations.size(), 0.0);
    for (std::size_t t = 0; t < innovations.size(); ++t) {
        double value = innovations[t];
        for (std::size_t i = 1; i <= p && i <= t; ++i) value += params.phi[i - 1] * y[t - i];
        for (std::size_t j = 1; j <= q && j <= t; ++j) value -= params.theta[j - 1] * innovations[t - j];
        if (!std::isfinite(value)) {
            throw ArmaDivergence("simulate_arma: non-finite state at step " + std::to_string(t));
        }
        y[t] = value;
    }
    return y;
}

Series simulate_arma(const ArmaParams& params, std::size_t length, int burn_in, Rng& rng) {
    if (burn_in < 0) burn_in = default_burn_in(params);
    std::vector<double> innovations(length + static_cast<std::size_t>(burn_in));
    for (double& e : innovations) e = rng.normal();
    Series full = simulate_arma(params, innovations);
    return Series(full.begin() + burn_in, full.end());
}

InputSample sample_input(int m_inputs, const InputSamplerConfig& cfg, Rng& rng) {
    if (m_inputs < 1) throw std::invalid_argument("sample_input: M must be >= 1");
    const auto length = static_cast<std::size_t>(cfg.length);
    InputSample sample{SeriesMatrix(static_cast<std::size_t>(m_inputs), length), {}};
    sample.channels.reserve(static_cast<std::size_t>(m_inputs));
    for (int c = 0; c < m_inputs; ++c) {
        Series values;
        if (rng.bernoulli(cfg.p_mixture)) {
            MixtureSpec spec = sample_mixture_spec(cfg, rng);
            values = draw_mixture(spec, length, rng);
            sample.channels.emplace_back(std::move(spec));
        } else {
            ArmaParams params = sample_arma_params(cfg, rng);
            values = simulate_arma(params, length, cfg.burn_in, rng);
            sample.channels.emplace_back(std::move(params));
        }
        std::copy(values.begin(), values.end(), sample.values.row(static_cast<std::size_t>(c)).begin());
    }
    return sample;
}

}  // namespace s2gen
