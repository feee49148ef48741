#include <gtest/gtest.h>

#include <random>

#include "vpaint/flat.hpp"
#include "vpaint/painting.hpp"
#include "vpaint/pipeline.hpp"
#include "vpaint/synth.hpp"

using namespace vpaint;

namespace {

flat::FlatCalib flatten(const CalibrationSet& c) {
    flat::FlatCalib f;
    for (int r = 0; r < 3; ++r)
        for (int k = 0; k < 4; ++k) f.cam_matrix[r * 4 + k] = c.cam_matrix()(r, k);
    for (int r = 0; r < 4; ++r)
        for (int k = 0; k < 4; ++k) f.lidar_to_cam[r * 4 + k] = c.lidar_to_cam()(r, k);
    return f;
}

std::vector<float> to_float(const PointCloud& c) { return {c.data().begin(), c.data().end()}; }

PointCloud from_float(const std::vector<float>& v, std::size_t cols) {
    return PointCloud(std::vector<double>(v.begin(), v.end()), cols);
}

std::vector<float> to_float_out(const PointCloud& c) {
    std::vector<float> out;
    for (double v : c.data()) out.push_back(static_cast<float>(v));
    return out;
}

}  // namespace

TEST(Flat, PaintMatchesCore) {
    const SynthSceneSpec spec = random_scene(21);
    const SynthScan scan = generate_scan(spec);
    const CameraRender render = render_camera(spec, scan.calib);
    const ScoreMap scores = scores_from_classes(render.class_ids, scan.calib.image_size(), 4);
    const std::vector<float> pts = to_float(scan.cloud);
    const flat::FlatArray got = flat::paint(pts, scan.cloud.rows(), 4, scores.scores(), 352, 1216, 4, flatten(scan.calib));
    const PaintedCloud want = paint(from_float(pts, 4), scores, scan.calib);
    EXPECT_EQ(got.rows, want.points.rows());
    EXPECT_EQ(got.cols, 8u);
    EXPECT_EQ(got.data, to_float_out(want.points));
}

TEST(Flat, EmptyCloudPaintsToEmpty) {
    const ScoreMap scores(4, 4, 4);
    const flat::FlatArray got = flat::paint({}, 0, 4, scores.scores(), 4, 4, 4, flatten(synthetic_calibration({4, 4})));
    EXPECT_EQ(got.rows, 0u);
    EXPECT_EQ(got.cols, 8u);
}

TEST(Flat, VirtualPointsMatchCore) {
    const SynthSceneSpec spec = random_scene(22);
    const CalibrationSet calib = synthetic_calibration();
    const CameraRender render = render_camera(spec, calib);
    const std::vector<float> depth(render.depth.values().begin(), render.depth.values().end());
    const flat::FlatArray got = flat::virtual_points(depth, 352, 1216, flatten(calib), 4, 80.0);
    const DepthMap map(1216, 352, std::vector<double>(depth.begin(), depth.end()));
    const PointCloud want = virtual_points_from_depth(map, calib, {4, 80.0});
    EXPECT_EQ(got.rows, want.rows());
    EXPECT_EQ(got.data, to_float_out(want));

    const flat::FlatArray none = flat::virtual_points(std::vector<float>(16, 0.0f), 4, 4, flatten(calib), 1, 80.0);
    EXPECT_EQ(none.rows, 0u);
    EXPECT_EQ(none.cols, 4u);
}

TEST(Flat, StrideTwoQuartersDenseCount) {
    const CalibrationSet calib = synthetic_calibration({64, 48});
    const std::vector<float> depth(64 * 48, 10.0f);
    const auto s1 = flat::virtual_points(depth, 48, 64, flatten(calib), 1, 80.0);
    const auto s2 = flat::virtual_points(depth, 48, 64, flatten(calib), 2, 80.0);
    EXPECT_EQ(s1.rows, 4 * s2.rows);
}

TEST(Flat, ShapeErrorsCarryStage) {
    try {
        flat::paint(std::vector<float>(7), 2, 4, std::vector<float>(64), 4, 4, 4, flatten(synthetic_calibration({4, 4})));
        FAIL();
    } catch (const flat::StageError& e) {
        EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
        EXPECT_EQ(e.stage(), "paint");
    }
    try {
        DadaConfig bad;
        bad.merge_threshold = -1;
        flat::dada({}, {}, bad, 1, 1, 0.02, "x");
        FAIL();
    } catch (const flat::StageError& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
        EXPECT_EQ(e.stage(), "dada");
    }
}

TEST(Flat, DadaMatchesAugmentFrame) {
    const SynthScan target = generate_scan(random_scene(23));
    const SynthScan source = generate_scan(random_scene(24, 12, 6.0, 20.0));
    auto flat_boxes = [](const std::vector<Box3D>& boxes) {
        std::vector<double> out;
        for (const auto& b : boxes)
            out.insert(out.end(), {b.center.x(), b.center.y(), b.center.z(), b.length, b.width, b.height, b.yaw,
                                   static_cast<double>(b.class_id)});
        return out;
    };
    const flat::FlatScene scene{{to_float(target.cloud), target.cloud.rows(), 4}, flat_boxes(target.boxes)};
    const flat::FlatScene donors{{to_float(source.cloud), source.cloud.rows(), 4}, flat_boxes(source.boxes)};
    DadaConfig cfg;
    cfg.seed = 5;
    const flat::FlatScene got = flat::dada(scene, donors, cfg, 4, 24, 0.02, "000001");

    PipelineConfig pc;
    pc.seed = 5;
    pc.dada = cfg;
    pc.max_insert = 4;
    pc.donor_pool = 24;
    const auto samples = extract_box_samples(from_float(donors.points.data, 4), source.boxes, 0.02);
    const Scene want = augment_frame(Scene{from_float(scene.points.data, 4), {}, target.boxes}, samples,
                                     std::vector<std::string>(samples.size(), "<donor>"), "000001", pc);
    EXPECT_EQ(got.points.data, to_float_out(want.points));
    EXPECT_EQ(got.boxes, flat_boxes(want.boxes));
    EXPECT_GT(want.boxes.size(), target.boxes.size());

    const flat::FlatScene again = flat::dada(scene, donors, cfg, 4, 24, 0.02, "000001");
    EXPECT_EQ(again.points.data, got.points.data);
}

TEST(Flat, DadaIdentityConfigLeavesSceneAlone) {
    const SynthScan target = generate_scan(random_scene(25));
    const flat::FlatScene scene{{to_float(target.cloud), target.cloud.rows(), 4}, {}};
    const flat::FlatScene got = flat::dada(scene, {}, DadaConfig{}, 4, 24, 0.02, "a");
    EXPECT_EQ(got.points.data, scene.points.data);
    EXPECT_TRUE(got.boxes.empty());
}
