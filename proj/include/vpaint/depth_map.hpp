#pragma once

#include <vector>

#include "vpaint/geometry.hpp"
#include "vpaint/point_cloud.hpp"

namespace vpaint {

/// Largest depth representable in a 16-bit PNG at 1/256 m per count.
inline constexpr double kMaxEncodableDepth = 65535.0 / 256.0;
/// Intensity assigned to virtual points (cameras measure no reflectance).
inline constexpr double kVirtualIntensity = 0.5;

/// H x W metric depth image, row-major; 0 marks an invalid cell.
class DepthMap {
public:
    DepthMap() = default;
    DepthMap(int width, int height);
    DepthMap(int width, int height, std::vector<double> values);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    ImageSize size() const noexcept { return {width_, height_}; }

    double at(int row, int col) const { return values_[static_cast<std::size_t>(row) * width_ + col]; }
    double& at(int row, int col) { return values_[static_cast<std::size_t>(row) * width_ + col]; }
    bool valid(int row, int col) const { return at(row, col) > 0.0; }

    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t valid_count() const;
    double valid_fraction() const;

    friend bool operator==(const DepthMap&, const DepthMap&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> values_;
};

struct VirtualPointOptions {
    int stride = 4;
    double max_range = 80.0;
};

/// Rasterizes a cloud into a sparse depth map sized to the calibration image.
/// Nearest depth wins on collisions; depths beyond kMaxEncodableDepth are skipped.
DepthMap sparsify(const PointCloud& cloud, const CalibrationSet& calib);

/**
 * Back-projects every valid cell on the stride grid (rows and columns that are
 * multiples of `stride`) whose depth is at most `max_range`, using the pixel
 * center. Output is row-major, four columns (x, y, z, kVirtualIntensity).
 * Throws DimensionMismatch when the map and calibration disagree on size.
 */
PointCloud virtual_points_from_depth(const DepthMap& dense, const CalibrationSet& calib,
                                     VirtualPointOptions options = {});

/// Raw rows followed by virtual rows, with a parallel provenance vector.
struct FusedCloud {
    PointCloud points;
    std::vector<Provenance> provenance;
};

/// Throws LayoutMismatch when the column counts differ.
FusedCloud fuse(const PointCloud& raw, const PointCloud& virtual_pts);

/// Rows of `fused` whose provenance equals `which`, in order.
PointCloud select_provenance(const FusedCloud& fused, Provenance which);

}  // namespace vpaint
