#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <optional>
#include <string_view>

namespace vpaint {

struct ImageSize {
    int width = 0;
    int height = 0;
    friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

/// A point expressed in image space: column u, row v, camera-frame depth.
struct PixelCoord {
    double u = 0.0;
    double v = 0.0;
    double depth = 0.0;
};

/// Projections at or below this camera depth are reported as behind the camera.
inline constexpr double kBehindDepth = 1e-6;

/**
 * Camera matrix and LiDAR-to-camera transform for one frame.
 *
 * `lidar_to_cam` already includes rectification, so a LiDAR point x maps to
 * pixels through cam_matrix * lidar_to_cam * [x; 1]. Construction validates the
 * homogeneous bottom row, the invertibility of the left 3x3 intrinsics block
 * and the image size, then caches the inverses used by back_project.
 */
class CalibrationSet {
public:
    using CamMatrix = Eigen::Matrix<double, 3, 4>;

    CalibrationSet(const CamMatrix& cam_matrix, const Eigen::Matrix4d& lidar_to_cam,
                   ImageSize image_size);

    const CamMatrix& cam_matrix() const noexcept { return cam_matrix_; }
    const Eigen::Matrix4d& lidar_to_cam() const noexcept { return lidar_to_cam_; }
    const Eigen::Matrix4d& cam_to_lidar() const noexcept { return cam_to_lidar_; }
    const Eigen::Matrix3d& intrinsics_inverse() const noexcept { return k_inv_; }
    ImageSize image_size() const noexcept { return image_size_; }

    /// Same geometry with a different image size.
    CalibrationSet with_image_size(ImageSize size) const;

private:
    CamMatrix cam_matrix_;
    Eigen::Matrix4d lidar_to_cam_;
    Eigen::Matrix4d cam_to_lidar_;
    Eigen::Matrix3d k_inv_;
    ImageSize image_size_;
};

/// Parses KITTI calibration text (keys P2, R0_rect, Tr_velo_to_cam).
/// Throws MissingKey, MalformedNumber or SingularIntrinsics.
CalibrationSet parse_calibration(std::string_view text, ImageSize image_size = {1216, 352});

/// Writes the calibration in the same KITTI key/value layout (R0_rect = identity).
std::string format_calibration(const CalibrationSet& calib);

/// Homogeneous projection; nullopt when the point is behind the camera.
std::optional<PixelCoord> project(const CalibrationSet& calib, const Eigen::Vector3d& xyz);

/// Inverse of project for a pixel with positive depth. Returns the LiDAR-frame point.
Eigen::Vector3d back_project(const CalibrationSet& calib, const PixelCoord& pixel);

/**
 * Round-to-nearest pixel index with half-up ties. Coordinates in [-0.5, extent - 0.5]
 * map into [0, extent); the exact upper boundary extent - 0.5 is clamped inward.
 */
std::optional<int> pixel_index(double coord, int extent);

struct Spherical {
    double range = 0.0;
    double azimuth = 0.0;    // atan2(y, x), (-pi, pi]
    double elevation = 0.0;  // asin(z / r), [-pi/2, pi/2]
};

/// Throws ZeroRadius for the origin.
Spherical to_spherical(const Eigen::Vector3d& xyz);
Eigen::Vector3d from_spherical(const Spherical& s);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

}  // namespace vpaint
