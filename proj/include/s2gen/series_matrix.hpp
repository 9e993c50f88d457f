#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace s2gen {

using Series = std::vector<double>;

/// Row-major channels x length matrix of doubles.
class SeriesMatrix {
public:
    SeriesMatrix() = default;
    SeriesMatrix(std::size_t channels, std::size_t length, double fill = 0.0)
        : channels_(channels), length_(length), data_(channels * length, fill) {}

    static SeriesMatrix from_rows(const std::vector<Series>& rows) {
        if (rows.empty()) return {};
        SeriesMatrix out(rows.size(), rows.front().size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != out.length_) throw std::invalid_argument("SeriesMatrix: ragged rows");
            std::copy(rows[r].begin(), rows[r].end(), out.row(r).begin());
        }
        return out;
    }

    std::size_t channels() const noexcept { return channels_; }
    std::size_t length() const noexcept { return length_; }
    bool empty() const noexcept { return data_.empty(); }

    std::span<double> row(std::size_t r) { return {data_.data() + r * length_, length_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * length_, length_}; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * length_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * length_ + c]; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    friend bool operator==(const SeriesMatrix&, const SeriesMatrix&) = default;

private:
    std::size_t channels_ = 0;
    std::size_t length_ = 0;
    std::vector<double> data_;
};

}  // namespace s2gen
