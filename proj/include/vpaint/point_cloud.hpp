#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace vpaint {

/// Where a row of an augmented cloud came from.
enum class Provenance : std::uint8_t { Raw = 0, Virtual = 1 };

/**
 * Dense row-major N x D point array. Columns 0-2 are x, y, z in the LiDAR
 * frame (meters); column 3, when present, is intensity. D >= 3 and the x, y, z
 * values of every row are finite.
 */
class PointCloud {
public:
    explicit PointCloud(std::size_t cols = 4);
    PointCloud(std::vector<double> data, std::size_t cols);

    std::size_t rows() const noexcept { return data_.size() / cols_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }
    std::span<double> row(std::size_t i) {
        return {data_.data() + i * cols_, cols_};
    }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const noexcept { return data_; }

    void reserve(std::size_t n) { data_.reserve(n * cols_); }
    /// Appends one row; throws LayoutMismatch on width mismatch and
    /// InvalidArgument on non-finite coordinates.
    void append(std::span<const double> values);
    void append(const PointCloud& other);

    friend bool operator==(const PointCloud&, const PointCloud&) = default;

private:
    std::vector<double> data_;
    std::size_t cols_;
};

}  // namespace vpaint
