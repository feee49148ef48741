#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "dada_oracle.hpp"
#include "vpaint/dada.hpp"
#include "vpaint/error.hpp"

using namespace vpaint;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Box3D make_box(Eigen::Vector3d center, double l, double w, double h, double yaw = 0.0, int cls = 1) {
    Box3D b;
    b.center = center;
    b.length = l;
    b.width = w;
    b.height = h;
    b.yaw = yaw;
    b.class_id = cls;
    return b;
}

PointCloud cloud_of(std::initializer_list<std::array<double, 4>> rows) {
    PointCloud cloud(4);
    for (const auto& r : rows) cloud.append(r);
    return cloud;
}

BoxSample random_sample(std::uint64_t seed, std::size_t n) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> range(8.0, 25.0), az(-0.6, 0.6), u(-0.6, 0.6);
    const double r = range(gen);
    const double a = az(gen);
    BoxSample s{make_box({r * std::cos(a), r * std::sin(a), -0.8}, 1.2, 1.2, 1.2), PointCloud(4), {}};
    for (std::size_t i = 0; i < n; ++i) {
        const double row[4] = {s.box.center.x() + u(gen), s.box.center.y() + u(gen), s.box.center.z() + u(gen),
                               u(gen) + 0.6};
        s.points.append(row);
        s.provenance.push_back(i % 7 == 0 ? Provenance::Virtual : Provenance::Raw);
    }
    return s;
}

}  // namespace

TEST(Extract, ContainmentAxisAligned) {
    const auto samples = extract_box_samples(cloud_of({{0, 0, 0, 1}, {2, 0, 0, 1}}), {make_box({0, 0, 0}, 1, 1, 1)});
    ASSERT_EQ(samples.size(), 1u);
    ASSERT_EQ(samples[0].points.rows(), 1u);
    EXPECT_EQ(samples[0].points(0, 0), 0.0);
}

TEST(Extract, YawedBoxMatchesRotationOracle) {
    const Box3D box = make_box({0, 0, 0}, 1.0, 0.5, 1.0, 90 * kDeg);
    const Eigen::Vector3d p(0, 0.4, 0);
    // Rotate the point by -yaw with an explicit rotation matrix.
    const Eigen::Matrix3d rz = Eigen::AngleAxisd(-box.yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    const Eigen::Vector3d local = rz * p;
    EXPECT_TRUE(std::abs(local.x()) <= 0.5 && std::abs(local.y()) <= 0.25);
    EXPECT_NEAR((box.to_local(p) - local).norm(), 0.0, 1e-12);
    const auto samples = extract_box_samples(cloud_of({{0, 0.4, 0, 1}, {0.4, 0, 0, 1}}), {box});
    ASSERT_EQ(samples[0].points.rows(), 1u);
    EXPECT_EQ(samples[0].points(0, 1), 0.4);
}

TEST(Extract, NoBoxesGivesEmptyList) {
    EXPECT_TRUE(extract_box_samples(cloud_of({{1, 1, 1, 1}}), {}).empty());
}

TEST(Extract, OverlapGoesToFirstBox) {
    const auto samples = extract_box_samples(cloud_of({{0.2, 0, 0, 1}}),
                                             {make_box({0, 0, 0}, 1, 1, 1), make_box({0.4, 0, 0}, 1, 1, 1)});
    EXPECT_EQ(samples[0].points.rows(), 1u);
    EXPECT_EQ(samples[1].points.rows(), 0u);
}

TEST(Offset, RadialAlongX) {
    BoxSample s{make_box({10, 0, 0}, 2, 2, 2), cloud_of({{10, 0.5, 0.1, 0.3}, {9.5, -0.2, 0, 0.9}}), {}};
    const BoxSample out = apply_distance_offset(s, 20.0);
    EXPECT_EQ(out.box.center, Eigen::Vector3d(30, 0, 0));
    EXPECT_EQ(out.points(0, 0), 30.0);
    EXPECT_EQ(out.points(0, 1), 0.5);
    EXPECT_EQ(out.points(1, 0), 29.5);
    EXPECT_EQ(out.points(1, 3), 0.9);
    EXPECT_EQ(out.box.length, 2.0);
}

TEST(Offset, ZeroDeltaIsIdentity) {
    const BoxSample s = random_sample(1, 50);
    const BoxSample out = apply_distance_offset(s, 0.0);
    EXPECT_EQ(out.points, s.points);
    EXPECT_EQ(out.box.center, s.box.center);
}

TEST(Offset, ZeroRadiusThrows) {
    BoxSample s{make_box({0, 0, 0}, 1, 1, 1), PointCloud(4), {}};
    try {
        apply_distance_offset(s, 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroRadius);
    }
}

TEST(Offset, RangeGrowsByDeltaAndDistancesPreserved) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> delta(0.0, 50.0);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const BoxSample s = random_sample(seed, 30);
        const double d = delta(gen);
        const BoxSample out = apply_distance_offset(s, d);
        EXPECT_NEAR(out.box.center.norm(), s.box.center.norm() + d, 1e-9);
        for (std::size_t i = 0; i < 30; ++i)
            for (std::size_t j = i + 1; j < 30; ++j) {
                auto dist = [](const PointCloud& c, std::size_t a, std::size_t b) {
                    return std::hypot(c(a, 0) - c(b, 0), c(a, 1) - c(b, 1), c(a, 2) - c(b, 2));
                };
                ASSERT_NEAR(dist(out.points, i, j), dist(s.points, i, j), 1e-9);
            }
    }
}

TEST(Resample, PairInOneVoxelMergesToMidpoint) {
    const SphericalGrid grid;
    const double lambda = 0.05;
    BoxSample s{make_box({10, 0, 0}, 1, 1, 1), cloud_of({{10, 0.0001, 0.0001, 0.2}, {10.025, 0.0001, 0.0001, 0.6}}),
                {Provenance::Raw, Provenance::Raw}};
    ASSERT_TRUE(voxel_of(grid, {10, 0.0001, 0.0001}) == voxel_of(grid, {10.025, 0.0001, 0.0001}));
    const BoxSample out = spherical_resample(s, grid, lambda);
    ASSERT_EQ(out.points.rows(), 1u);
    EXPECT_DOUBLE_EQ(out.points(0, 0), 10.0125);
    EXPECT_DOUBLE_EQ(out.points(0, 3), 0.4);
}

TEST(Resample, DifferentVoxelsNeverMerge) {
    const SphericalGrid grid;
    // Same range, azimuths one full cell apart but only ~3.5 cm apart in space.
    const double a0 = 0.5 * grid.azimuth_res, a1 = 1.5 * grid.azimuth_res;
    BoxSample s{make_box({10, 0, 0}, 1, 1, 1),
                cloud_of({{10 * std::cos(a0), 10 * std::sin(a0), 0.01, 0}, {10 * std::cos(a1), 10 * std::sin(a1), 0.01, 0}}),
                {}};
    EXPECT_EQ(spherical_resample(s, grid, 0.05).points.rows(), 2u);
}

TEST(Resample, MergedProvenanceIsRawOnlyWhenAllMembersRaw) {
    BoxSample s{make_box({10, 0, 0}, 1, 1, 1), cloud_of({{10, 0.0001, 0.0001, 0}, {10.01, 0.0001, 0.0001, 0}}),
                {Provenance::Raw, Provenance::Virtual}};
    const BoxSample out = spherical_resample(s, SphericalGrid{}, 0.05);
    ASSERT_EQ(out.points.rows(), 1u);
    EXPECT_EQ(out.provenance[0], Provenance::Virtual);
}

TEST(Resample, MatchesNaiveOracle) {
    const SphericalGrid grid;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const BoxSample s = random_sample(seed, 500);
        const BoxSample got = spherical_resample(s, grid, 0.05);
        EXPECT_TRUE(oracle::same_up_to_order(got, oracle::naive_resample(s, grid, 0.05))) << "seed " << seed;
    }
}

TEST(Resample, OutputSortedByVoxel) {
    const SphericalGrid grid;
    const BoxSample got = spherical_resample(random_sample(4, 500), grid, 0.05);
    for (std::size_t i = 1; i < got.points.rows(); ++i) {
        const auto a = voxel_of(grid, {got.points(i - 1, 0), got.points(i - 1, 1), got.points(i - 1, 2)});
        const auto b = voxel_of(grid, {got.points(i, 0), got.points(i, 1), got.points(i, 2)});
        ASSERT_TRUE(a <= b);
    }
}

TEST(Resample, CentroidConservation) {
    const SphericalGrid grid;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const BoxSample s = random_sample(seed + 100, 400);
        const BoxSample got = spherical_resample(s, grid, 0.08);
        // Merging keeps the per-column sum when each output is weighted by its
        // member count, so the global sums over a voxel must match.
        std::map<VoxelKey, std::array<double, 4>> before;
        for (std::size_t i = 0; i < s.points.rows(); ++i) {
            auto& acc = before[voxel_of(grid, {s.points(i, 0), s.points(i, 1), s.points(i, 2)})];
            for (int k = 0; k < 4; ++k) acc[k] += s.points(i, k);
        }
        const auto naive = oracle::naive_resample(s, grid, 0.08);
        std::map<VoxelKey, std::array<double, 4>> after;
        for (const auto& p : naive) {
            auto& acc = after[voxel_of(grid, {p.v[0], p.v[1], p.v[2]})];
            for (int k = 0; k < 4; ++k) acc[k] += p.weight * p.v[k];
        }
        double total_before = 0, total_after = 0;
        for (const auto& [k, v] : before)
            for (double x : v) total_before += x;
        for (const auto& [k, v] : after)
            for (double x : v) total_after += x;
        EXPECT_NEAR(total_before, total_after, 1e-9 * std::max(1.0, std::abs(total_before)));
        ASSERT_EQ(got.points.rows(), naive.size());
    }
}

TEST(Resample, TwoPointClusterSumEqualsCentroidTimesSize) {
    BoxSample s{make_box({10, 0, 0}, 1, 1, 1),
                cloud_of({{10.0, 0.0001, 0.0002, 0.1}, {10.02, 0.0003, 0.0001, 0.7}, {10.04, 0.0002, 0.0002, 0.4}}), {}};
    const BoxSample out = spherical_resample(s, SphericalGrid{}, 0.05);
    ASSERT_EQ(out.points.rows(), 1u);
    for (int k = 0; k < 4; ++k) {
        const double sum = s.points(0, k) + s.points(1, k) + s.points(2, k);
        EXPECT_NEAR(out.points(0, k) * 3, sum, 1e-9);
    }
}

TEST(Resample, NeverIncreasesCountAndTinyLambdaIsIdentity) {
    const SphericalGrid grid;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const BoxSample s = random_sample(seed, 300);
        EXPECT_LE(spherical_resample(s, grid, 0.2).points.rows(), s.points.rows());
        const BoxSample same = spherical_resample(s, grid, 1e-12);
        ASSERT_EQ(same.points.rows(), s.points.rows());
        EXPECT_TRUE(oracle::same_up_to_order(same, oracle::naive_resample(s, grid, 0.0)));
    }
}

TEST(Resample, NoVoxelKeepsTwoPointsWithinLambda) {
    const SphericalGrid grid;
    for (double lambda : {0.05, 0.1, 0.3}) {
        const BoxSample got = spherical_resample(random_sample(7, 500), grid, lambda);
        for (std::size_t i = 0; i < got.points.rows(); ++i)
            for (std::size_t j = i + 1; j < got.points.rows(); ++j) {
                const Eigen::Vector3d a(got.points(i, 0), got.points(i, 1), got.points(i, 2));
                const Eigen::Vector3d b(got.points(j, 0), got.points(j, 1), got.points(j, 2));
                if (voxel_of(grid, a) == voxel_of(grid, b)) {
                    ASSERT_GE((a - b).norm(), lambda);
                }
            }
    }
}

TEST(Occlusion, ZeroFractionIsIdentity) {
    const BoxSample s = random_sample(2, 200);
    Rng rng(1);
    const BoxSample out = simulate_occlusion(s, 0.0, rng);
    EXPECT_EQ(out.points, s.points);
    EXPECT_EQ(out.provenance, s.provenance);
}

TEST(Occlusion, SingleAzimuthIsNeverRemoved) {
    BoxSample s{make_box({10, 0, 0}, 1, 1, 1), cloud_of({{10, 1, 0, 0}, {20, 2, 1, 0}, {5, 0.5, -1, 0}}), {}};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        EXPECT_EQ(simulate_occlusion(s, 0.5, rng).points.rows(), 3u);
    }
}

TEST(Occlusion, RemovedFractionNearRequested) {
    std::size_t good = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        std::mt19937_64 gen(seed);
        std::uniform_real_distribution<double> az(-0.2, 0.2);
        BoxSample s{make_box({20, 0, 0}, 1, 1, 1), PointCloud(4), {}};
        for (int i = 0; i < 5000; ++i) {
            const double a = az(gen);
            const double row[4] = {20 * std::cos(a), 20 * std::sin(a), 0, 0};
            s.points.append(row);
        }
        Rng rng(seed);
        const double removed = 1.0 - simulate_occlusion(s, 0.5, rng).points.rows() / 5000.0;
        good += std::abs(removed - 0.5) <= 0.02;
    }
    EXPECT_GE(good, 190u);
}

TEST(Occlusion, WorksAcrossTheSeam) {
    BoxSample s{make_box({-20, 0, 0}, 1, 1, 1), PointCloud(4), {}};
    for (int i = 0; i < 1000; ++i) {
        const double a = std::numbers::pi - 0.1 + 0.2 * (i + 0.5) / 1000;
        const double row[4] = {20 * std::cos(a), 20 * std::sin(a), 0, 0};
        s.points.append(row);
    }
    EXPECT_NEAR(azimuth_span(s.points).width, 0.2, 1e-3);
    Rng rng(5);
    const auto out = simulate_occlusion(s, 0.3, rng);
    EXPECT_NEAR(static_cast<double>(out.points.rows()), 700.0, 2.0);
}

TEST(Occlusion, RejectsBadFraction) {
    Rng rng(0);
    EXPECT_THROW(simulate_occlusion(random_sample(0, 5), 1.0, rng), Error);
}

TEST(GtAug, EmptySceneTakesDonor) {
    BoxSample donor{make_box({15, 3, -1}, 4, 2, 1.5), cloud_of({{15, 3, -1, 0.5}, {15.5, 3.2, -0.8, 0.5}}), {}};
    Rng rng(1);
    const Scene out = gt_aug_insert(Scene{}, {donor}, 5, rng);
    EXPECT_EQ(out.points, donor.points);
    ASSERT_EQ(out.boxes.size(), 1u);
    EXPECT_EQ(out.boxes[0].center, donor.box.center);
}

TEST(GtAug, OverlappingDonorRejected) {
    Scene scene;
    scene.points = cloud_of({{15, 3, -1, 0.2}, {40, 0, -1, 0.2}});
    scene.boxes = {make_box({15, 3, -1}, 4, 2, 1.5)};
    BoxSample donor{scene.boxes[0], cloud_of({{15.1, 3, -1, 0.5}}), {}};
    Rng rng(1);
    const Scene out = gt_aug_insert(scene, {donor}, 5, rng);
    EXPECT_EQ(out.points, scene.points);
    EXPECT_EQ(out.boxes.size(), 1u);
}

TEST(GtAug, TouchingAfterInflationIsRejectedGapIsAccepted) {
    Scene scene;
    scene.boxes = {make_box({10, 0, -1}, 2, 2, 1)};
    // Footprints inflated by 0.1 each: centers 2.15 apart overlap, 2.25 apart do not.
    BoxSample close{make_box({12.15, 0, -1}, 2, 2, 1), cloud_of({{12.15, 0, -1, 0}}), {}};
    BoxSample far{make_box({12.25, 0, -1}, 2, 2, 1), cloud_of({{12.25, 0, -1, 0}}), {}};
    Rng a(0), b(0);
    EXPECT_EQ(gt_aug_insert(scene, {close}, 1, a).boxes.size(), 1u);
    EXPECT_EQ(gt_aug_insert(scene, {far}, 1, b).boxes.size(), 2u);
}

TEST(GtAug, RemovesScenePointsInsideDonorBox) {
    Scene scene;
    scene.points = cloud_of({{20, 0, -1, 0.1}, {30, 0, -1, 0.1}});
    BoxSample donor{make_box({20, 0, -1}, 2, 2, 2), cloud_of({{20.5, 0, -1, 0.9}}), {Provenance::Virtual}};
    Rng rng(0);
    const Scene out = gt_aug_insert(scene, {donor}, 1, rng);
    ASSERT_EQ(out.points.rows(), 2u);
    EXPECT_EQ(out.points(0, 0), 30.0);
    EXPECT_EQ(out.points(1, 0), 20.5);
    EXPECT_EQ(out.provenance[1], Provenance::Virtual);
}

TEST(GtAug, ContainmentAndDisjointnessOracle) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        std::mt19937_64 gen(seed);
        std::uniform_real_distribution<double> x(5, 60), y(-20, 20), yaw(-3.1, 3.1);
        Scene scene;
        while (scene.boxes.size() < 3) {
            const Box3D b = make_box({x(gen), y(gen), -1}, 4, 1.8, 1.5, yaw(gen));
            const bool clear = std::none_of(scene.boxes.begin(), scene.boxes.end(), [&](const Box3D& o) {
                return bev_intersects(bev_footprint(b, kBevInflate), bev_footprint(o, kBevInflate));
            });
            if (clear) scene.boxes.push_back(b);
        }
        std::vector<BoxSample> donors;
        for (int i = 0; i < 15; ++i) {
            const Box3D b = make_box({x(gen), y(gen), -1}, 4, 1.8, 1.5, yaw(gen));
            BoxSample d{b, PointCloud(4), {}};
            std::uniform_real_distribution<double> u(-0.5, 0.5);
            for (int k = 0; k < 20; ++k) {
                const Eigen::Vector3d local(u(gen) * 4, u(gen) * 1.8, u(gen) * 1.5);
                const Eigen::Vector3d p =
                    b.center + Eigen::AngleAxisd(b.yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix() * local;
                const double row[4] = {p.x(), p.y(), p.z(), 0.5};
                d.points.append(row);
            }
            donors.push_back(d);
        }
        Rng rng(seed);
        const Scene out = gt_aug_insert(scene, donors, 6, rng);
        EXPECT_LE(out.boxes.size(), 9u);
        for (std::size_t i = 0; i < out.boxes.size(); ++i)
            for (std::size_t j = i + 1; j < out.boxes.size(); ++j)
                ASSERT_FALSE(bev_intersects(bev_footprint(out.boxes[i], kBevInflate),
                                            bev_footprint(out.boxes[j], kBevInflate)));
        // Every appended row sits inside the box it arrived with.
        for (std::size_t b = scene.boxes.size(); b < out.boxes.size(); ++b) {
            for (std::size_t k = 0; k < 20; ++k) {
                const std::size_t r = out.points.rows() - 20 * (out.boxes.size() - b) + k;
                ASSERT_TRUE(out.boxes[b].contains({out.points(r, 0), out.points(r, 1), out.points(r, 2)}, kBoxEpsilon));
            }
        }
    }
}

TEST(Pipeline, IdentityConfiguration) {
    DadaConfig cfg;
    cfg.offset_min = cfg.offset_max = 0.0;
    cfg.merge_threshold = 1e-12;
    cfg.occlusion_min = cfg.occlusion_max = 0.0;
    std::vector<BoxSample> samples{random_sample(1, 100), random_sample(2, 100)};
    const auto out = dada_pipeline(samples, cfg);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        EXPECT_EQ(out[i].box.center, samples[i].box.center);
        std::vector<oracle::NaivePoint> want;
        for (std::size_t r = 0; r < samples[i].points.rows(); ++r) {
            const auto row = samples[i].points.row(r);
            want.push_back({{row.begin(), row.end()}, 1.0, samples[i].provenance[r] == Provenance::Raw});
        }
        EXPECT_TRUE(oracle::same_up_to_order(out[i], want));
    }
}

TEST(Pipeline, SameSeedBitIdentical) {
    DadaConfig cfg;
    cfg.seed = 99;
    std::vector<BoxSample> samples;
    for (std::uint64_t s = 0; s < 8; ++s) samples.push_back(random_sample(s, 300));
    const auto a = dada_pipeline(samples, cfg);
    const auto b = dada_pipeline(samples, cfg);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].points, b[i].points);
        EXPECT_EQ(a[i].box.center, b[i].box.center);
        EXPECT_EQ(a[i].provenance, b[i].provenance);
    }
    cfg.seed = 100;
    const auto c = dada_pipeline(samples, cfg);
    EXPECT_NE(a[0].box.center, c[0].box.center);
}

TEST(Pipeline, OffsetsStayInRange) {
    DadaConfig cfg;
    cfg.occlusion_probability = 0.0;
    std::vector<BoxSample> samples;
    for (std::uint64_t s = 0; s < 20; ++s) samples.push_back(random_sample(s, 10));
    const auto out = dada_pipeline(samples, cfg);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double grew = out[i].box.center.norm() - samples[i].box.center.norm();
        EXPECT_GE(grew, cfg.offset_min - 1e-9);
        EXPECT_LE(grew, cfg.offset_max + 1e-9);
    }
}

TEST(Pipeline, DoublingRangeSparsifiesDenseDonor) {
    const Box3D box = make_box({10, 2, -0.9}, 4.0, 1.8, 1.6, 0.4);
    const BoxSample dense = oracle::dense_donor(box, 0.05 * kDeg);
    ASSERT_GT(dense.points.rows(), 10000u);
    const SphericalGrid grid;
    const double near = static_cast<double>(spherical_resample(dense, grid, 0.05).points.rows());
    const BoxSample moved = apply_distance_offset(dense, box.center.norm());
    const double far = static_cast<double>(spherical_resample(moved, grid, 0.05).points.rows());
    EXPECT_GE(far / near, 0.15);
    EXPECT_LE(far / near, 0.6);
}

TEST(Config, Validation) {
    DadaConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.merge_threshold = 0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = {};
    cfg.offset_min = 50;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = {};
    cfg.occlusion_max = 1.0;
    EXPECT_THROW(cfg.validate(), Error);
}
