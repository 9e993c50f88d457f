#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "s2gen/expr.hpp"
#include "s2gen/expr_sampler.hpp"
#include "s2gen/series_matrix.hpp"
#include "s2gen/series_sampler.hpp"

namespace s2gen {

struct GridRange {
    int m_min = 1;
    int m_max = 6;
    int n_min = 1;
    int n_max = 12;

    std::size_t cells() const noexcept {
        return static_cast<std::size_t>(m_max - m_min + 1) * static_cast<std::size_t>(n_max - n_min + 1);
    }
    friend bool operator==(const GridRange&, const GridRange&) = default;
};

/// Half-open [first, last).
struct SeedRange {
    std::uint64_t first = 0;
    std::uint64_t last = 1;

    std::uint64_t count() const noexcept { return last > first ? last - first : 0; }
    friend bool operator==(const SeedRange&, const SeedRange&) = default;
};

struct GenConfig {
    ExprSamplerConfig expr;
    InputSamplerConfig input;
    double y_abs_limit = 1e4;
    /// Raw (pre-normalization) input draws with any |x| above this are discarded;
    /// 0 disables the guard. Screens out explosive ARMA paths that the
    /// sum(phi) < 1, |phi_p| < 1 constraint admits.
    double x_abs_limit = 256.0;
    int max_retries_per_expression = 32;
    GridRange grid;
    SeedRange seeds;
    /// Pairs per shard; 0 writes one shard per seed.
    int shard_size = 0;

    /// Throws std::invalid_argument with the offending field named.
    void validate() const;

    friend bool operator==(const GenConfig&, const GenConfig&) = default;
};

struct PairProvenance {
    std::uint64_t seed = 0;
    int m = 0;
    int n = 0;
    /// Rejected input draws before the accepted one.
    int retries_used = 0;
    int expressions_resampled = 0;
    std::vector<ChannelProvenance> inputs;

    friend bool operator==(const PairProvenance&, const PairProvenance&) = default;
};

/// One curated record: Y == evaluate(system, X) with X stored normalized.
struct S2Pair {
    SeriesMatrix x;
    SeriesMatrix y;
    SymbolicSystem system;
    PairProvenance provenance;

    std::size_t length() const noexcept { return x.length(); }
    std::uint64_t timestamps() const noexcept { return (x.channels() + y.channels()) * x.length(); }

    friend bool operator==(const S2Pair&, const S2Pair&) = default;
};

struct RejectionCounts {
    std::uint64_t non_finite = 0;
    std::uint64_t log_nonpositive = 0;
    std::uint64_t sqrt_negative = 0;
    std::uint64_t div_by_zero = 0;
    std::uint64_t y_limit = 0;
    /// Input draws whose ARMA recursion diverged.
    std::uint64_t input_divergence = 0;
    /// Raw input draws above x_abs_limit.
    std::uint64_t x_limit = 0;

    void record(DomainReason reason) noexcept;
    std::uint64_t total() const noexcept;
    RejectionCounts& operator+=(const RejectionCounts& other) noexcept;

    friend bool operator==(const RejectionCounts&, const RejectionCounts&) = default;
};

struct PairResult {
    /// Empty when the global draw budget ran out (Exhausted).
    std::optional<S2Pair> pair;
    RejectionCounts rejections;
    int input_draws = 0;
    /// Wall time of the accepted draw alone: sample, normalize, evaluate.
    std::chrono::nanoseconds accepted_draw_time{0};

    bool exhausted() const noexcept { return !pair.has_value(); }
};

/// Per-channel z-score with the population standard deviation; channels with
/// std < 1e-12 become all zeros.
SeriesMatrix normalize_channels(const SeriesMatrix& raw);

/// Streams are keyed by (seed, M, N, role, counter), so the result depends
/// only on the arguments.
PairResult generate_pair(int m_inputs, int n_outputs, const GenConfig& cfg, std::uint64_t seed);

/// Curation loop around a caller-supplied starting system. Offending
/// expressions are resampled from the sampler after max_retries consecutive
/// rejected inputs.
PairResult curate_system(SymbolicSystem system, const GenConfig& cfg, std::uint64_t seed);

}  // namespace s2gen
