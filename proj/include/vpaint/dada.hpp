#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "vpaint/point_cloud.hpp"
#include "vpaint/rng.hpp"

namespace vpaint {

/// Oriented 3D box in the LiDAR frame; `center` is the geometric center and
/// `yaw` rotates the length axis about +z.
struct Box3D {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    double length = 1.0;
    double width = 1.0;
    double height = 1.0;
    double yaw = 0.0;
    int class_id = 0;

    /// Throws InvalidArgument for non-positive sizes or yaw outside (-pi, pi].
    void validate() const;
    /// Point expressed in the box frame (box center at origin, length along x).
    Eigen::Vector3d to_local(const Eigen::Vector3d& p) const;
    bool contains(const Eigen::Vector3d& p, double margin = 0.0) const;
    /// The eight corners, bottom face first.
    std::array<Eigen::Vector3d, 8> corners() const;
};

/// Containment tolerance applied when collecting interior points.
inline constexpr double kBoxEpsilon = 1e-6;

/// Axis-aligned bird's-eye rectangle.
struct BevRect {
    double min_x, min_y, max_x, max_y;
};

/// Axis-aligned bound of the yawed footprint, grown by `inflate` on every side.
BevRect bev_footprint(const Box3D& box, double inflate);
/// Open-interval overlap: rectangles that only touch do not intersect.
bool bev_intersects(const BevRect& a, const BevRect& b);

/// Box plus the points inside it (LiDAR frame), with per-point provenance.
struct BoxSample {
    Box3D box;
    PointCloud points{4};
    std::vector<Provenance> provenance;
};

/// Angular voxel resolution. `range_res` is carried for completeness; bucketing
/// uses only azimuth and elevation.
struct SphericalGrid {
    double range_res = 0.0;
    double azimuth_res = 0.2 * 3.14159265358979323846 / 180.0;
    double elevation_res = 0.4 * 3.14159265358979323846 / 180.0;
};

struct VoxelKey {
    std::int64_t azimuth;
    std::int64_t elevation;
    friend auto operator<=>(const VoxelKey&, const VoxelKey&) = default;
};

/// floor(angle / res) per angular axis. Throws ZeroRadius at the origin.
VoxelKey voxel_of(const SphericalGrid& grid, const Eigen::Vector3d& p);

struct DadaConfig {
    double offset_min = 10.0;
    double offset_max = 40.0;
    double merge_threshold = 0.05;
    SphericalGrid grid;
    double occlusion_min = 0.1;
    double occlusion_max = 0.4;
    double occlusion_probability = 0.5;
    std::uint64_t seed = 0;

    /// Throws InvalidArgument when a field is out of range.
    void validate() const;
};

/**
 * Collects, for every box, the points within its half extents grown by
 * `margin`. A point inside several boxes belongs to the first in list order.
 */
std::vector<BoxSample> extract_box_samples(const PointCloud& cloud, const std::vector<Box3D>& boxes,
                                           double margin = kBoxEpsilon,
                                           const std::vector<Provenance>& provenance = {});

/// Shifts box and points by `delta` meters along the ego-to-center direction.
/// Throws ZeroRadius when the box is centered on the ego origin.
BoxSample apply_distance_offset(const BoxSample& sample, double delta);

/**
 * Re-samples the points through angular voxels. Inside a voxel, points closer
 * than `merge_threshold` are linked (single linkage) and every connected
 * cluster is replaced by the mean of its members over all columns. The pass
 * repeats on the resulting points, weighting each by the number of original
 * points it stands for, until no voxel holds two points closer than the
 * threshold. Output is sorted by voxel, then by first member within a voxel.
 * A merged point is raw only if every member was raw.
 */
BoxSample spherical_resample(const BoxSample& sample, const SphericalGrid& grid, double merge_threshold);

/// Deletes the points inside a contiguous azimuth window covering `fraction`
/// of the sample's azimuth extent, placed uniformly at random.
BoxSample simulate_occlusion(const BoxSample& sample, double fraction, Rng& rng);

/// Azimuth extent of a point set, robust to the +-pi seam: the start angle and
/// the width of the smallest arc covering every point.
struct AzimuthSpan {
    double start = 0.0;
    double width = 0.0;
};
AzimuthSpan azimuth_span(const PointCloud& points);

/// Points, provenance and boxes of one training frame.
struct Scene {
    PointCloud points{4};
    std::vector<Provenance> provenance;
    std::vector<Box3D> boxes;
};

/// Inflation of BEV footprints in the insertion collision test.
inline constexpr double kBevInflate = 0.1;

/**
 * GT-AUG style insertion. Donors are visited in an rng-shuffled order and
 * accepted until `max_insert` succeed. A donor is rejected when empty, when
 * its column count differs from the scene, or when its inflated BEV footprint
 * meets that of any existing or already inserted box. On acceptance the scene
 * points inside the donor box are removed and the donor points and box appended.
 */
Scene gt_aug_insert(const Scene& scene, const std::vector<BoxSample>& donors, std::size_t max_insert,
                    Rng& rng);

/**
 * Distance offset, spherical resampling and (with probability
 * cfg.occlusion_probability) occlusion for each sample. Sample i draws from
 * Rng::stream(cfg.seed, i), so the result is a pure function of the inputs.
 */
std::vector<BoxSample> dada_pipeline(const std::vector<BoxSample>& samples, const DadaConfig& cfg);

/// Fisher-Yates shuffle of indices [0, n) driven by `rng`.
std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng);

}  // namespace vpaint
