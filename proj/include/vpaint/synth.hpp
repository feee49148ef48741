#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vpaint/dada.hpp"
#include "vpaint/depth_map.hpp"
#include "vpaint/geometry.hpp"
#include "vpaint/painting.hpp"
#include "vpaint/point_cloud.hpp"

namespace vpaint {

struct SynthBox {
    Box3D box;
    /// Probability that a ray hitting this box's surface returns a point.
    double density = 1.0;
};

struct SynthSceneSpec {
    std::vector<double> beam_elevations;  // radians, strictly increasing
    double azimuth_step = 0.2 * 3.14159265358979323846 / 180.0;
    double max_range = 120.0;
    double ground_z = -1.73;
    std::vector<SynthBox> boxes;
    std::uint64_t seed = 0;

    /// Throws InvalidArgument when the spec is inconsistent.
    void validate() const;
};

/// 64 beams evenly spaced over [-24.8, +2.0] degrees.
std::vector<double> default_beam_elevations(int beams = 64);

/// KITTI-like rig: focal 721.5377, principal point (608, 176), 1216 x 352
/// image, camera 0.1 m above the LiDAR looking along +x.
CalibrationSet synthetic_calibration(ImageSize size = {1216, 352});

struct SynthScan {
    PointCloud cloud;
    std::vector<Box3D> boxes;
    CalibrationSet calib;
};

/**
 * One ray per (azimuth, beam) pair from the sensor origin. The first hit
 * against the ground plane or a box surface within max_range produces a point
 * with intensity 0.3 (ground) or 0.8 (box). Rows are ordered azimuth-major,
 * beams ascending within an azimuth column.
 */
SynthScan generate_scan(const SynthSceneSpec& spec);

/// Per-pixel ground truth seen by the camera: dense depth (0 where the ray
/// escapes or exceeds max_range) and the class id of the hit (0 for ground/sky).
struct CameraRender {
    DepthMap depth;
    std::vector<int> class_ids;  // row-major, width x height
};

CameraRender render_camera(const SynthSceneSpec& spec, const CalibrationSet& calib);

/// Scores with `confidence` on the pixel's class and the remainder spread
/// evenly over the other classes. Class ids outside [0, classes) count as background.
ScoreMap scores_from_classes(const std::vector<int>& class_ids, ImageSize size, int classes,
                             float confidence = 0.9f);

/// Randomized street-like scene: `box_count` non-overlapping cars,
/// pedestrians and cyclists on the ground, ranges in [min_range, max_range],
/// mostly inside the camera field of view.
SynthSceneSpec random_scene(std::uint64_t seed, int box_count = 12, double min_range = 6.0,
                            double max_range = 75.0);

/// Nearest positive ray parameter at which origin + t * dir meets the box surface.
std::optional<double> ray_box_hit(const Box3D& box, const Eigen::Vector3d& origin, const Eigen::Vector3d& dir);

}  // namespace vpaint
