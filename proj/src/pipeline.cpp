#include "s2gen/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace s2gen {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

constexpr double kDegenerateStd = 1e-12;

}  // namespace

void GenConfig::validate() const {
    expr.validate();
    input.validate();
    require(std::isfinite(y_abs_limit) && y_abs_limit > 0.0, "y_abs_limit must be > 0");
    require(std::isfinite(x_abs_limit) && x_abs_limit >= 0.0, "x_abs_limit must be >= 0");
    require(max_retries_per_expression >= 1, "max_retries_per_expression must be >= 1");
    require(grid.m_min >= 1 && grid.m_min <= grid.m_max, "grid: need 1 <= m_min <= m_max");
    require(grid.n_min >= 1 && grid.n_min <= grid.n_max, "grid: need 1 <= n_min <= n_max");
    require(grid.m_max <= expr.m_max, "grid: m_max exceeds the sampler's M_max");
    require(grid.n_max <= expr.n_max, "grid: n_max exceeds the sampler's N_max");
    require(seeds.count() >= 1, "seeds: empty range");
    require(shard_size >= 0, "shard_size must be >= 0");
}

void RejectionCounts::record(DomainReason reason) noexcept {
    switch (reason) {
        case DomainReason::non_finite: ++non_finite; break;
        case DomainReason::log_nonpositive: ++log_nonpositive; break;
        case DomainReason::sqrt_negative: ++sqrt_negative; break;
        case DomainReason::div_by_zero: ++div_by_zero; break;
    }
}

std::uint64_t RejectionCounts::total() const noexcept {
    return non_finite + log_nonpositive + sqrt_negative + div_by_zero + y_limit + input_divergence + x_limit;
}

RejectionCounts& RejectionCounts::operator+=(const RejectionCounts& o) noexcept {
    non_finite += o.non_finite;
    log_nonpositive += o.log_nonpositive;
    sqrt_negative += o.sqrt_negative;
    div_by_zero += o.div_by_zero;
    y_limit += o.y_limit;
    input_divergence += o.input_divergence;
    x_limit += o.x_limit;
    return *this;
}

SeriesMatrix normalize_channels(const SeriesMatrix& raw) {
    SeriesMatrix out(raw.channels(), raw.length());
    const auto n = static_cast<double>(raw.length());
    for (std::size_t c = 0; c < raw.channels(); ++c) {
        auto src = raw.row(c);
        auto dst = out.row(c);
        if (src.empty()) continue;
        double peak = 0.0;
        for (double v : src) peak = std::max(peak, std::fabs(v));
        // Explosive ARMA channels can reach magnitudes whose squares overflow.
        const double scale = peak > 1e100 ? peak : 1.0;
        double mean = 0.0;
        for (double v : src) mean += v / scale;
        mean /= n;
        double var = 0.0;
        for (double v : src) {
            const double d = v / scale - mean;
            var += d * d;
        }
        const double sd = std::sqrt(var / n);
        if (!(sd * scale >= kDegenerateStd)) continue;  // zeros
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = (src[i] / scale - mean) / sd;
    }
    return out;
}

PairResult curate_system(SymbolicSystem system, const GenConfig& cfg, std::uint64_t seed) {
    const int m = system.input_dim;
    const int n = static_cast<int>(system.expressions.size());
    system.provenance = {seed, m, n};

    PairResult result;
    std::vector<std::uint32_t> versions(static_cast<std::size_t>(n), 0);
    const int per_window = cfg.max_retries_per_expression;
    const long long budget = static_cast<long long>(per_window) * per_window;
    int window_failures = 0;
    int resampled = 0;
    std::vector<std::size_t> offending;
    SeriesMatrix y(static_cast<std::size_t>(n), static_cast<std::size_t>(cfg.input.length));

    for (long long draw = 0; draw < budget; ++draw) {
        ++result.input_draws;
        const auto started = std::chrono::steady_clock::now();
        Rng input_rng(seed, StreamTag::input, grid_slot(m, n), static_cast<std::uint32_t>(draw));
        offending.clear();

        std::optional<InputSample> sample;
        try {
            sample = sample_input(m, cfg.input, input_rng);
        } catch (const ArmaDivergence&) {
            ++result.rejections.input_divergence;
        }
        if (sample && cfg.x_abs_limit > 0.0) {
            const auto raw = sample->values.data();
            if (std::any_of(raw.begin(), raw.end(), [&](double v) { return std::fabs(v) > cfg.x_abs_limit; })) {
                ++result.rejections.x_limit;
                sample.reset();
            }
        }

        SeriesMatrix x;
        if (sample) {
            x = normalize_channels(sample->values);
            for (std::size_t i = 0; i < system.expressions.size(); ++i) {
                EvalOutcome outcome = evaluate(system.expressions[i], x);
                if (!outcome.ok()) {
                    result.rejections.record(outcome.violation().reason);
                    offending.push_back(i);
                    continue;
                }
                const Series& values = outcome.values();
                const bool over = std::any_of(values.begin(), values.end(),
                                              [&](double v) { return std::fabs(v) > cfg.y_abs_limit; });
                if (over) {
                    ++result.rejections.y_limit;
                    offending.push_back(i);
                    continue;
                }
                std::copy(values.begin(), values.end(), y.row(i).begin());
            }
            if (offending.empty()) {
                result.accepted_draw_time = std::chrono::steady_clock::now() - started;
                S2Pair pair;
                pair.x = std::move(x);
                pair.y = std::move(y);
                pair.system = std::move(system);
                pair.provenance = {seed, m, n, static_cast<int>(draw), resampled, std::move(sample->channels)};
                result.pair = std::move(pair);
                return result;
            }
        }

        if (++window_failures >= per_window) {
            window_failures = 0;
            for (std::size_t i : offending) {
                ++versions[i];
                ++resampled;
                Rng expr_rng(seed, StreamTag::expression, grid_slot(m, n, static_cast<int>(i)), versions[i]);
                system.expressions[i] = sample_expression(m, cfg.expr, expr_rng);
            }
        }
    }
    return result;
}

PairResult generate_pair(int m_inputs, int n_outputs, const GenConfig& cfg, std::uint64_t seed) {
    if (m_inputs < 1 || m_inputs > cfg.expr.m_max) throw std::invalid_argument("generate_pair: M outside [1, M_max]");
    if (n_outputs < 1 || n_outputs > cfg.expr.n_max) throw std::invalid_argument("generate_pair: N outside [1, N_max]");
    SymbolicSystem system;
    system.input_dim = m_inputs;
    for (int i = 0; i < n_outputs; ++i) {
        Rng expr_rng(seed, StreamTag::expression, grid_slot(m_inputs, n_outputs, i), 0);
        system.expressions.push_back(sample_expression(m_inputs, cfg.expr, expr_rng));
    }
    return curate_system(std::move(system), cfg, seed);
}

}  // namespace s2gen
