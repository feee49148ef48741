#pragma once

#include <cstddef>
#include <vector>

#include "vpaint/depth_map.hpp"
#include "vpaint/geometry.hpp"
#include "vpaint/point_cloud.hpp"

namespace vpaint {

/// Background is class 0 by convention.
inline constexpr std::size_t kBackgroundClass = 0;

/// H x W x C per-pixel class scores, row-major with the channel fastest.
class ScoreMap {
public:
    ScoreMap() = default;
    /// Throws InvalidArgument when classes < 2 or sizes are non-positive.
    ScoreMap(int width, int height, int classes);
    ScoreMap(int width, int height, int classes, std::vector<float> scores);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int classes() const noexcept { return classes_; }
    ImageSize size() const noexcept { return {width_, height_}; }

    const float* at(int row, int col) const {
        return scores_.data() + (static_cast<std::size_t>(row) * width_ + col) * classes_;
    }
    float* at(int row, int col) {
        return scores_.data() + (static_cast<std::size_t>(row) * width_ + col) * classes_;
    }
    const std::vector<float>& scores() const noexcept { return scores_; }

    /// True when every score vector is finite, in [0, 1] and sums to 1 within 1e-5.
    bool is_normalized() const;

    friend bool operator==(const ScoreMap&, const ScoreMap&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    int classes_ = 0;
    std::vector<float> scores_;
};

/// N x (D + C) cloud: the base columns followed by appended class scores.
struct PaintedCloud {
    PointCloud points{3};
    std::size_t base_dims = 0;
    std::size_t class_dims = 0;
    std::vector<Provenance> provenance;
};

/**
 * Appends the score vector of the pixel each point projects to. Points behind
 * the camera or outside the image receive the background one-hot vector.
 * Rows keep their order; provenance (if given, one entry per row) is carried
 * through, otherwise every row is marked raw.
 * Throws DimensionMismatch when the score map and calibration sizes differ.
 */
PaintedCloud paint(const PointCloud& augmented, const ScoreMap& scores, const CalibrationSet& calib,
                   const std::vector<Provenance>& provenance = {});

inline PaintedCloud paint(const FusedCloud& fused, const ScoreMap& scores, const CalibrationSet& calib) {
    return paint(fused.points, scores, calib, fused.provenance);
}

struct PaintStats {
    std::size_t total = 0;
    std::vector<std::size_t> class_counts;          // by argmax class
    std::vector<std::size_t> raw_class_counts;      // by argmax class, raw rows only
    std::vector<std::size_t> virtual_class_counts;  // by argmax class, virtual rows only
    std::size_t raw_count = 0;
    std::size_t virtual_count = 0;
    std::size_t foreground_raw = 0;
    std::size_t foreground_virtual = 0;
    double background_fraction = 0.0;  // 0 for an empty cloud
};

/// Argmax of a painted row's score block; ties resolve to the lowest index.
std::size_t argmax_class(const PaintedCloud& painted, std::size_t row);

PaintStats paint_stats(const PaintedCloud& painted);

}  // namespace vpaint
