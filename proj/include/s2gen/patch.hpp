#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "s2gen/pipeline.hpp"

namespace s2gen {

inline constexpr std::size_t kPatchKernel = 16;
/// 18 channels (6 inputs + 12 outputs) x 256 steps / 16.
inline constexpr std::size_t kPatchPadTo = 288;

/// Non-overlapping windows, one per row; rows at and beyond n_valid are zero.
struct PatchMatrix {
    std::size_t kernel = kPatchKernel;
    std::size_t n_valid = 0;
    std::size_t padded_to = 0;
    std::vector<double> values;  // padded_to x kernel, row-major

    std::span<const double> row(std::size_t r) const { return {values.data() + r * kernel, kernel}; }
};

/// Throws std::invalid_argument unless kernel == stride, L is divisible by
/// kernel and the valid patches fit into pad_to rows.
PatchMatrix patchify(std::span<const double> series, std::size_t kernel = kPatchKernel,
                     std::size_t stride = kPatchKernel, std::size_t pad_to = kPatchPadTo);

/// Patches of all channels of a pair, X rows first, concatenated.
PatchMatrix patchify(const S2Pair& pair, std::size_t pad_to = kPatchPadTo);

}  // namespace s2gen
