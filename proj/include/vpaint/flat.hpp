#pragma once

// Array-level entry points for foreign-language bindings. Inputs are
// contiguous row-major float32 buffers with explicit shapes; outputs are
// freshly allocated buffers. Every function delegates to the core library,
// so results are bit-identical to calling it directly.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vpaint/dada.hpp"
#include "vpaint/error.hpp"
#include "vpaint/geometry.hpp"

namespace vpaint::flat {

/// Error annotated with the pipeline stage that raised it.
class StageError : public Error {
public:
    StageError(ErrorCode code, std::string stage, const std::string& message)
        : Error(code, stage + ": " + message), stage_(std::move(stage)), message_(message) {}

    const std::string& stage() const noexcept { return stage_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::string stage_;
    std::string message_;
};

/// 12 reals of the 3x4 camera matrix and 16 reals of the 4x4 LiDAR-to-camera
/// transform, both row-major.
struct FlatCalib {
    std::array<double, 12> cam_matrix{};
    std::array<double, 16> lidar_to_cam{};
};

struct FlatArray {
    std::vector<float> data;
    std::size_t rows = 0;
    std::size_t cols = 0;
};

CalibrationSet to_calibration(const FlatCalib& calib, ImageSize size);

/// points: rows x cols; scores: height x width x classes (channel fastest).
FlatArray paint(std::span<const float> points, std::size_t rows, std::size_t cols, std::span<const float> scores,
                int height, int width, int classes, const FlatCalib& calib);

/// depth: height x width meters (0 invalid). Output is M x 4.
FlatArray virtual_points(std::span<const float> depth, int height, int width, const FlatCalib& calib, int stride,
                         double max_range);

/// Boxes as 8 reals each: x, y, z, length, width, height, yaw, class_id.
struct FlatScene {
    FlatArray points;
    std::vector<double> boxes;
};

/**
 * Runs DADA over donors extracted from a donor scene and inserts them into the
 * target scene, the same way the dada-apply command processes one frame.
 */
FlatScene dada(const FlatScene& scene, const FlatScene& donor_scene, const DadaConfig& cfg, std::size_t max_insert,
               std::size_t donor_pool, double box_margin, const std::string& frame_id);

}  // namespace vpaint::flat
