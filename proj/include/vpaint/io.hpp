#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "vpaint/dada.hpp"
#include "vpaint/depth_map.hpp"
#include "vpaint/geometry.hpp"
#include "vpaint/painting.hpp"
#include "vpaint/point_cloud.hpp"

namespace vpaint::io {

using Bytes = std::vector<std::uint8_t>;

Bytes read_file(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

// KITTI velodyne .bin: little-endian float32 (x, y, z, intensity) records.
PointCloud decode_kitti_bin(std::span<const std::uint8_t> bytes);
/// Writes the first four columns; clouds with three columns get intensity 0.
Bytes encode_kitti_bin(const PointCloud& cloud);

CalibrationSet read_calibration(const std::filesystem::path& path, ImageSize image_size = {1216, 352});

// Depth PNG: 16-bit grayscale, depth = value / 256, 0 = invalid.
Bytes encode_depth_png(const DepthMap& map);
DepthMap decode_depth_png(std::span<const std::uint8_t> bytes);
/// 16-bit code for a depth; valid depths encode to at least 1.
std::uint16_t depth_to_code(double depth);

// "VPTN" score tensor: magic, u32 height, u32 width, u32 channels, float32 H*W*C.
Bytes encode_score_map(const ScoreMap& scores);
ScoreMap decode_score_map(std::span<const std::uint8_t> bytes);

// "VPPC" painted cloud: magic, u32 N, u32 total_dims, u32 base_dims,
// float32 N*total_dims, then N provenance bytes (0 raw, 1 virtual).
Bytes encode_painted(const PaintedCloud& painted);
PaintedCloud decode_painted(std::span<const std::uint8_t> bytes);

/// Class ids used for KITTI object types; 0 is background, -1 unknown.
int kitti_class_id(std::string_view type);
std::string kitti_class_name(int class_id);

/**
 * KITTI label text to LiDAR-frame boxes. Locations are box bottom centers in
 * the rectified camera frame and rotation_y turns about the camera y axis; both
 * are mapped through the calibration's camera-to-LiDAR transform. DontCare and
 * unknown types are skipped. Throws Format on malformed lines.
 */
std::vector<Box3D> parse_kitti_labels(std::string_view text, const CalibrationSet& calib);
/// Inverse mapping. Truncation and occlusion are written as 0; alpha and the
/// 2D box are derived from the projection.
std::string format_kitti_labels(const std::vector<Box3D>& boxes, const CalibrationSet& calib);

/// One line of a donor database index.
struct DonorRecord {
    std::string file;  // VPPC file name relative to the database directory
    std::string frame_id;
    Box3D box;
    std::size_t point_count = 0;
};

std::string encode_donor_record(const DonorRecord& record);
DonorRecord decode_donor_record(std::string_view line);
std::vector<DonorRecord> read_donor_index(const std::filesystem::path& path);

}  // namespace vpaint::io
