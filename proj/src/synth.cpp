#include "vpaint/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "vpaint/error.hpp"
#include "vpaint/rng.hpp"

namespace vpaint {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kGroundIntensity = 0.3;
constexpr double kBoxIntensity = 0.8;

struct Hit {
    double t = std::numeric_limits<double>::infinity();
    int box = -1;  // -1 for ground
};

Hit first_hit(const SynthSceneSpec& spec, const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) {
    Hit hit;
    if (dir.z() < 0.0 && origin.z() > spec.ground_z) {
        hit.t = (spec.ground_z - origin.z()) / dir.z();
    }
    for (std::size_t b = 0; b < spec.boxes.size(); ++b) {
        const auto t = ray_box_hit(spec.boxes[b].box, origin, dir);
        if (t && *t < hit.t) {
            hit.t = *t;
            hit.box = static_cast<int>(b);
        }
    }
    return hit;
}

}  // namespace

void SynthSceneSpec::validate() const {
    if (!(azimuth_step > 0.0)) throw Error(ErrorCode::InvalidArgument, "azimuth step must be positive");
    if (!(max_range > 0.0)) throw Error(ErrorCode::InvalidArgument, "max range must be positive");
    for (std::size_t i = 1; i < beam_elevations.size(); ++i) {
        if (!(beam_elevations[i] > beam_elevations[i - 1])) {
            throw Error(ErrorCode::InvalidArgument, "beam elevations must be strictly increasing");
        }
    }
    for (const auto& b : boxes) {
        b.box.validate();
        if (!(b.density >= 0.0 && b.density <= 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "box density must lie in [0, 1]");
        }
    }
}

std::vector<double> default_beam_elevations(int beams) {
    std::vector<double> out(beams);
    const double lo = -24.8 * kDeg;
    const double hi = 2.0 * kDeg;
    for (int i = 0; i < beams; ++i) {
        out[i] = beams == 1 ? lo : lo + (hi - lo) * i / (beams - 1);
    }
    return out;
}

CalibrationSet synthetic_calibration(ImageSize size) {
    CalibrationSet::CamMatrix cam;
    cam << 721.5377, 0.0, size.width / 2.0, 0.0,
           0.0, 721.5377, size.height / 2.0, 0.0,
           0.0, 0.0, 1.0, 0.0;
    Eigen::Matrix4d t;
    t << 0.0, -1.0, 0.0, 0.0,
         0.0, 0.0, -1.0, 0.1,
         1.0, 0.0, 0.0, 0.0,
         0.0, 0.0, 0.0, 1.0;
    return CalibrationSet(cam, t, size);
}

std::optional<double> ray_box_hit(const Box3D& box, const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) {
    const double c = std::cos(box.yaw);
    const double s = std::sin(box.yaw);
    const Eigen::Vector3d o = box.to_local(origin);
    const Eigen::Vector3d d(c * dir.x() + s * dir.y(), -s * dir.x() + c * dir.y(), dir.z());
    const double half[3] = {0.5 * box.length, 0.5 * box.width, 0.5 * box.height};
    double t_near = -std::numeric_limits<double>::infinity();
    double t_far = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
        if (d[k] == 0.0) {
            if (std::abs(o[k]) > half[k]) return std::nullopt;
            continue;
        }
        double t0 = (-half[k] - o[k]) / d[k];
        double t1 = (half[k] - o[k]) / d[k];
        if (t0 > t1) std::swap(t0, t1);
        t_near = std::max(t_near, t0);
        t_far = std::min(t_far, t1);
    }
    if (t_near > t_far || t_far <= 0.0) return std::nullopt;
    // Rays starting inside a box report its exit face.
    return t_near > 0.0 ? t_near : t_far;
}

SynthScan generate_scan(const SynthSceneSpec& spec) {
    spec.validate();
    const auto columns = static_cast<std::int64_t>(std::floor(2.0 * std::numbers::pi / spec.azimuth_step + 1e-9));
    const std::size_t beams = spec.beam_elevations.size();
    std::vector<double> cos_el(beams), sin_el(beams);
    for (std::size_t b = 0; b < beams; ++b) {
        cos_el[b] = std::cos(spec.beam_elevations[b]);
        sin_el[b] = std::sin(spec.beam_elevations[b]);
    }

    PointCloud cloud(4);
    const Eigen::Vector3d origin = Eigen::Vector3d::Zero();
    for (std::int64_t k = 0; k < std::max<std::int64_t>(columns, 1); ++k) {
        const double az = static_cast<double>(k) * spec.azimuth_step;
        const double ca = std::cos(az);
        const double sa = std::sin(az);
        for (std::size_t b = 0; b < beams; ++b) {
            const Eigen::Vector3d dir(cos_el[b] * ca, cos_el[b] * sa, sin_el[b]);
            const Hit hit = first_hit(spec, origin, dir);
            if (!(hit.t <= spec.max_range)) continue;
            if (hit.box >= 0 && spec.boxes[hit.box].density < 1.0) {
                Rng rng = Rng::stream(spec.seed, static_cast<std::uint64_t>(k) * beams + b);
                if (!(rng.uniform() < spec.boxes[hit.box].density)) continue;
            }
            const Eigen::Vector3d p = dir * hit.t;
            const double row[4] = {p.x(), p.y(), hit.box >= 0 ? p.z() : spec.ground_z,
                                   hit.box >= 0 ? kBoxIntensity : kGroundIntensity};
            cloud.append(row);
        }
    }

    std::vector<Box3D> boxes;
    boxes.reserve(spec.boxes.size());
    for (const auto& b : spec.boxes) boxes.push_back(b.box);
    return {std::move(cloud), std::move(boxes), synthetic_calibration()};
}

CameraRender render_camera(const SynthSceneSpec& spec, const CalibrationSet& calib) {
    spec.validate();
    const ImageSize size = calib.image_size();
    CameraRender out{DepthMap(size.width, size.height),
                     std::vector<int>(static_cast<std::size_t>(size.width) * size.height, 0)};
    // Optical center: the point whose projective depth is zero.
    const Eigen::Vector3d center_cam = -(calib.intrinsics_inverse() * calib.cam_matrix().col(3));
    const Eigen::Vector3d origin = (calib.cam_to_lidar() * center_cam.homogeneous()).head<3>();
    for (int r = 0; r < size.height; ++r) {
        for (int c = 0; c < size.width; ++c) {
            const Eigen::Vector3d far = back_project(calib, {c + 0.5, r + 0.5, 1.0});
            const Eigen::Vector3d dir = far - origin;
            const Hit hit = first_hit(spec, origin, dir);
            if (!std::isfinite(hit.t)) continue;
            const Eigen::Vector3d p = origin + dir * hit.t;
            if (p.norm() > spec.max_range) continue;
            // The ray parameter equals projective depth since `far` sits at depth 1.
            if (hit.t > kMaxEncodableDepth) continue;
            out.depth.at(r, c) = hit.t;
            if (hit.box >= 0) out.class_ids[static_cast<std::size_t>(r) * size.width + c] = spec.boxes[hit.box].box.class_id;
        }
    }
    return out;
}

ScoreMap scores_from_classes(const std::vector<int>& class_ids, ImageSize size, int classes, float confidence) {
    ScoreMap map(size.width, size.height, classes);
    if (class_ids.size() != static_cast<std::size_t>(size.width) * size.height) {
        throw Error(ErrorCode::DimensionMismatch, "class id buffer does not match image size");
    }
    const float rest = (1.0f - confidence) / static_cast<float>(classes - 1);
    for (int r = 0; r < size.height; ++r) {
        for (int c = 0; c < size.width; ++c) {
            int id = class_ids[static_cast<std::size_t>(r) * size.width + c];
            if (id < 0 || id >= classes) id = 0;
            float* s = map.at(r, c);
            for (int k = 0; k < classes; ++k) s[k] = k == id ? confidence : rest;
        }
    }
    return map;
}

SynthSceneSpec random_scene(std::uint64_t seed, int box_count, double min_range, double max_range) {
    SynthSceneSpec spec;
    spec.beam_elevations = default_beam_elevations();
    spec.seed = seed;
    Rng rng(seed);
    struct Template {
        int class_id;
        double length, width, height;
    };
    constexpr Template templates[] = {
        {1, 3.9, 1.6, 1.56}, {1, 4.3, 1.8, 1.6}, {2, 0.8, 0.6, 1.73}, {3, 1.76, 0.6, 1.73}};

    std::vector<BevRect> placed;
    int attempts = 0;
    while (static_cast<int>(spec.boxes.size()) < box_count && attempts < box_count * 50) {
        ++attempts;
        const Template& t = templates[rng.below(std::size(templates))];
        const double range = rng.uniform(min_range, max_range);
        const double az = rng.uniform(-35.0, 35.0) * kDeg;
        Box3D box;
        box.center = Eigen::Vector3d(range * std::cos(az), range * std::sin(az), spec.ground_z + 0.5 * t.height);
        box.length = t.length;
        box.width = t.width;
        box.height = t.height;
        box.yaw = wrap_angle(rng.uniform(-std::numbers::pi, std::numbers::pi));
        box.class_id = t.class_id;
        const BevRect fp = bev_footprint(box, 0.5);
        if (std::any_of(placed.begin(), placed.end(), [&](const BevRect& r) { return bev_intersects(fp, r); })) {
            continue;
        }
        placed.push_back(fp);
        spec.boxes.push_back({box, 1.0});
    }
    return spec;
}

}  // namespace vpaint
