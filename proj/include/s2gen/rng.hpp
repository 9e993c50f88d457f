#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace s2gen {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A stream is identified by a 64-bit key and three 32-bit counter words;
/// the fourth counter word is the block index within the stream. Two
/// generators with the same key and stream words produce the same sequence,
/// independent of which thread or in which order they are used.
class Philox4x32 {
public:
    using result_type = std::uint32_t;
    using Block = std::array<std::uint32_t, 4>;

    Philox4x32(std::uint64_t key, std::array<std::uint32_t, 3> stream) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// The raw bijection: ten rounds over (counter, key).
    static Block encrypt(Block counter, std::array<std::uint32_t, 2> key) noexcept;

private:
    std::array<std::uint32_t, 2> key_;
    Block counter_;
    Block buffer_{};
    unsigned position_ = 4;
};

/// Purpose tags mixed into the stream identity so that draws for different
/// roles never share a stream.
enum class StreamTag : std::uint32_t {
    generic = 0,
    expression = 1,
    input = 2,
    bench = 3,
    fixture = 4,
};

/// Distribution helpers over one Philox stream. All draws are implemented
/// here rather than with <random> distributions, whose algorithms differ
/// between standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept : Rng(seed, StreamTag::generic, 0, 0) {}
    Rng(std::uint64_t seed, StreamTag tag, std::uint32_t slot, std::uint32_t attempt) noexcept;

    std::uint32_t next_u32() noexcept { return engine_(); }
    std::uint64_t next_u64() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }
    /// Uniform integer on the closed range [lo, hi].
    int uniform_int(int lo, int hi) noexcept;
    std::size_t index(std::size_t n) noexcept;
    double normal() noexcept;
    double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }
    bool bernoulli(double p) noexcept { return uniform01() < p; }

    /// k distinct values from [0, n), in selection order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    Philox4x32 engine_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// Packs a grid cell into one stream word.
constexpr std::uint32_t grid_slot(int m, int n, int index = 0) noexcept {
    return (static_cast<std::uint32_t>(m & 0xff) << 24) | (static_cast<std::uint32_t>(n & 0xff) << 16) |
           static_cast<std::uint32_t>(index & 0xffff);
}

}  // namespace s2gen
