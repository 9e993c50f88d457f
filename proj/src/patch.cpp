#include "s2gen/patch.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace s2gen {

PatchMatrix patchify(std::span<const double> series, std::size_t kernel, std::size_t stride, std::size_t pad_to) {
    if (kernel == 0) throw std::invalid_argument("patchify: kernel must be > 0");
    if (kernel != stride) throw std::invalid_argument("patchify: patches must not overlap (kernel == stride)");
    if (series.size() % kernel != 0) {
        throw std::invalid_argument("patchify: length " + std::to_string(series.size()) +
                                    " is not divisible by kernel " + std::to_string(kernel));
    }
    PatchMatrix out;
    out.kernel = kernel;
    out.n_valid = series.size() / kernel;
    if (out.n_valid > pad_to) {
        throw std::invalid_argument("patchify: " + std::to_string(out.n_valid) + " patches exceed pad_to " +
                                    std::to_string(pad_to));
    }
    out.padded_to = pad_to;
    out.values.assign(pad_to * kernel, 0.0);
    std::copy(series.begin(), series.end(), out.values.begin());
    return out;
}

PatchMatrix patchify(const S2Pair& pair, std::size_t pad_to) {
    std::vector<double> stacked;
    stacked.reserve(static_cast<std::size_t>(pair.timestamps()));
    stacked.insert(stacked.end(), pair.x.data().begin(), pair.x.data().end());
    stacked.insert(stacked.end(), pair.y.data().begin(), pair.y.data().end());
    if (pair.length() % kPatchKernel != 0) {
        throw std::invalid_argument("patchify: series length is not divisible by the kernel");
    }
    return patchify(stacked, kPatchKernel, kPatchKernel, pad_to);
}

}  // namespace s2gen
