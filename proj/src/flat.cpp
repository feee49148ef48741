#include "vpaint/flat.hpp"

#include "vpaint/depth_map.hpp"
#include "vpaint/painting.hpp"
#include "vpaint/pipeline.hpp"

namespace vpaint::flat {

namespace {

template <typename Fn>
auto staged(const char* stage, Fn&& fn) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(e.code(), stage, e.detail());
    } catch (const std::exception& e) {
        throw StageError(ErrorCode::InvalidArgument, stage, e.what());
    }
}

void check_shape(std::span<const float> buffer, std::size_t expected, const char* what) {
    if (buffer.size() != expected) {
        throw Error(ErrorCode::DimensionMismatch, std::string(what) + ": buffer holds " + std::to_string(buffer.size()) +
                                                      " values, shape implies " + std::to_string(expected));
    }
}

PointCloud to_cloud(std::span<const float> points, std::size_t rows, std::size_t cols, std::size_t empty_cols = 4) {
    if (rows == 0 && cols == 0) return PointCloud(empty_cols);
    check_shape(points, rows * cols, "points");
    return PointCloud(std::vector<double>(points.begin(), points.end()), cols);
}

FlatArray to_flat(const PointCloud& cloud) {
    FlatArray out{std::vector<float>(cloud.data().size()), cloud.rows(), cloud.cols()};
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = static_cast<float>(cloud.data()[i]);
    return out;
}

std::vector<Box3D> to_boxes(const std::vector<double>& flat) {
    if (flat.size() % 8 != 0) throw Error(ErrorCode::DimensionMismatch, "boxes need 8 values each");
    std::vector<Box3D> boxes;
    for (std::size_t i = 0; i < flat.size(); i += 8) {
        Box3D b;
        b.center = {flat[i], flat[i + 1], flat[i + 2]};
        b.length = flat[i + 3];
        b.width = flat[i + 4];
        b.height = flat[i + 5];
        b.yaw = flat[i + 6];
        b.class_id = static_cast<int>(flat[i + 7]);
        b.validate();
        boxes.push_back(b);
    }
    return boxes;
}

std::vector<double> from_boxes(const std::vector<Box3D>& boxes) {
    std::vector<double> out;
    for (const auto& b : boxes) {
        out.insert(out.end(), {b.center.x(), b.center.y(), b.center.z(), b.length, b.width, b.height, b.yaw,
                               static_cast<double>(b.class_id)});
    }
    return out;
}

}  // namespace

CalibrationSet to_calibration(const FlatCalib& calib, ImageSize size) {
    CalibrationSet::CamMatrix cam;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) cam(r, c) = calib.cam_matrix[r * 4 + c];
    Eigen::Matrix4d t;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) t(r, c) = calib.lidar_to_cam[r * 4 + c];
    return CalibrationSet(cam, t, size);
}

FlatArray paint(std::span<const float> points, std::size_t rows, std::size_t cols, std::span<const float> scores,
                int height, int width, int classes, const FlatCalib& calib) {
    return staged("paint", [&] {
        const PointCloud cloud = to_cloud(points, rows, cols);
        check_shape(scores, static_cast<std::size_t>(height) * width * classes, "scores");
        const ScoreMap map(width, height, classes, std::vector<float>(scores.begin(), scores.end()));
        return to_flat(vpaint::paint(cloud, map, to_calibration(calib, {width, height})).points);
    });
}

FlatArray virtual_points(std::span<const float> depth, int height, int width, const FlatCalib& calib, int stride,
                         double max_range) {
    return staged("virtual_points", [&] {
        check_shape(depth, static_cast<std::size_t>(height) * width, "depth");
        const DepthMap map(width, height, std::vector<double>(depth.begin(), depth.end()));
        return to_flat(virtual_points_from_depth(map, to_calibration(calib, {width, height}), {stride, max_range}));
    });
}

FlatScene dada(const FlatScene& scene, const FlatScene& donor_scene, const DadaConfig& cfg, std::size_t max_insert,
               std::size_t donor_pool, double box_margin, const std::string& frame_id) {
    return staged("dada", [&] {
        cfg.validate();
        const PointCloud target = to_cloud(scene.points.data, scene.points.rows, scene.points.cols);
        const PointCloud source =
            to_cloud(donor_scene.points.data, donor_scene.points.rows, donor_scene.points.cols, target.cols());
        const auto donors = extract_box_samples(source, to_boxes(donor_scene.boxes), box_margin);
        PipelineConfig pc;
        pc.seed = cfg.seed;
        pc.dada = cfg;
        pc.max_insert = max_insert;
        pc.donor_pool = donor_pool;
        const std::vector<std::string> donor_frames(donors.size(), "<donor>");
        const Scene out = augment_frame(Scene{target, {}, to_boxes(scene.boxes)}, donors, donor_frames, frame_id, pc);
        return FlatScene{to_flat(out.points), from_boxes(out.boxes)};
    });
}

}  // namespace vpaint::flat
