#include "vpaint/dada.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "vpaint/error.hpp"
#include "vpaint/geometry.hpp"

namespace vpaint {

void Box3D::validate() const {
    if (!(length > 0.0 && width > 0.0 && height > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "box size components must be positive");
    }
    if (!(yaw > -std::numbers::pi && yaw <= std::numbers::pi)) {
        throw Error(ErrorCode::InvalidArgument, "box yaw must lie in (-pi, pi]");
    }
    if (!center.allFinite()) throw Error(ErrorCode::InvalidArgument, "box center must be finite");
}

Eigen::Vector3d Box3D::to_local(const Eigen::Vector3d& p) const {
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    const Eigen::Vector3d d = p - center;
    return {c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z()};
}

bool Box3D::contains(const Eigen::Vector3d& p, double margin) const {
    const Eigen::Vector3d local = to_local(p);
    return std::abs(local.x()) <= 0.5 * length + margin && std::abs(local.y()) <= 0.5 * width + margin &&
           std::abs(local.z()) <= 0.5 * height + margin;
}

std::array<Eigen::Vector3d, 8> Box3D::corners() const {
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    std::array<Eigen::Vector3d, 8> out;
    int k = 0;
    for (double dz : {-0.5, 0.5}) {
        for (auto [dx, dy] : {std::pair{0.5, 0.5}, {-0.5, 0.5}, {-0.5, -0.5}, {0.5, -0.5}}) {
            const double lx = dx * length;
            const double ly = dy * width;
            out[k++] = center + Eigen::Vector3d(c * lx - s * ly, s * lx + c * ly, dz * height);
        }
    }
    return out;
}

BevRect bev_footprint(const Box3D& box, double inflate) {
    const double c = std::abs(std::cos(box.yaw));
    const double s = std::abs(std::sin(box.yaw));
    const double hx = 0.5 * (c * box.length + s * box.width) + inflate;
    const double hy = 0.5 * (s * box.length + c * box.width) + inflate;
    return {box.center.x() - hx, box.center.y() - hy, box.center.x() + hx, box.center.y() + hy};
}

bool bev_intersects(const BevRect& a, const BevRect& b) {
    return a.min_x < b.max_x && b.min_x < a.max_x && a.min_y < b.max_y && b.min_y < a.max_y;
}

VoxelKey voxel_of(const SphericalGrid& grid, const Eigen::Vector3d& p) {
    const Spherical s = to_spherical(p);
    return {static_cast<std::int64_t>(std::floor(s.azimuth / grid.azimuth_res)),
            static_cast<std::int64_t>(std::floor(s.elevation / grid.elevation_res))};
}

void DadaConfig::validate() const {
    auto fail = [](const char* what) { throw Error(ErrorCode::InvalidArgument, what); };
    if (!(offset_min >= 0.0) || !(offset_max >= offset_min)) fail("offset range must satisfy 0 <= min <= max");
    if (!(merge_threshold > 0.0)) fail("merge threshold must be positive");
    if (!(grid.azimuth_res > 0.0) || !(grid.elevation_res > 0.0) || grid.range_res < 0.0) {
        fail("spherical grid resolutions must be positive");
    }
    if (!(occlusion_min >= 0.0) || !(occlusion_max >= occlusion_min) || !(occlusion_max < 1.0)) {
        fail("occlusion fraction range must satisfy 0 <= min <= max < 1");
    }
    if (!(occlusion_probability >= 0.0 && occlusion_probability <= 1.0)) {
        fail("occlusion probability must lie in [0, 1]");
    }
}

std::vector<BoxSample> extract_box_samples(const PointCloud& cloud, const std::vector<Box3D>& boxes,
                                           double margin, const std::vector<Provenance>& provenance) {
    if (!provenance.empty() && provenance.size() != cloud.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "provenance length does not match row count");
    }
    std::vector<BoxSample> samples;
    samples.reserve(boxes.size());
    for (const auto& box : boxes) {
        box.validate();
        samples.push_back({box, PointCloud(cloud.cols()), {}});
    }
    for (std::size_t i = 0; i < cloud.rows(); ++i) {
        const auto row = cloud.row(i);
        const Eigen::Vector3d p(row[0], row[1], row[2]);
        for (auto& sample : samples) {
            if (sample.box.contains(p, margin)) {
                sample.points.append(row);
                sample.provenance.push_back(provenance.empty() ? Provenance::Raw : provenance[i]);
                break;
            }
        }
    }
    return samples;
}

BoxSample apply_distance_offset(const BoxSample& sample, double delta) {
    const double r = sample.box.center.norm();
    if (!(r > 0.0)) throw Error(ErrorCode::ZeroRadius, "box centered at the ego origin has no radial direction");
    const Eigen::Vector3d t = sample.box.center * (delta / r);
    BoxSample out = sample;
    out.box.center += t;
    for (std::size_t i = 0; i < out.points.rows(); ++i) {
        auto row = out.points.row(i);
        row[0] += t.x();
        row[1] += t.y();
        row[2] += t.z();
    }
    return out;
}

namespace {

struct WeightedSet {
    PointCloud points;
    std::vector<double> weights;
    std::vector<Provenance> provenance;
};

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
    while (parent[i] != i) {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    return i;
}

/// One clustering pass. Returns true when at least one merge happened.
bool resample_pass(const WeightedSet& in, const SphericalGrid& grid, double threshold, WeightedSet& out) {
    const std::size_t n = in.points.rows();
    const std::size_t d = in.points.cols();
    std::vector<VoxelKey> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = in.points.row(i);
        keys[i] = voxel_of(grid, {row[0], row[1], row[2]});
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });

    const double threshold_sq = threshold * threshold;
    out = WeightedSet{PointCloud(d), {}, {}};
    out.points.reserve(n);
    bool merged = false;
    std::vector<std::size_t> parent;
    std::vector<double> sum(d);

    for (std::size_t begin = 0; begin < n;) {
        std::size_t end = begin + 1;
        while (end < n && keys[order[end]] == keys[order[begin]]) ++end;
        const std::size_t m = end - begin;
        parent.resize(m);
        std::iota(parent.begin(), parent.end(), 0);
        for (std::size_t a = 0; a < m; ++a) {
            const auto pa = in.points.row(order[begin + a]);
            for (std::size_t b = a + 1; b < m; ++b) {
                const auto pb = in.points.row(order[begin + b]);
                const double dx = pa[0] - pb[0];
                const double dy = pa[1] - pb[1];
                const double dz = pa[2] - pb[2];
                if (dx * dx + dy * dy + dz * dz < threshold_sq) {
                    const std::size_t ra = find_root(parent, a);
                    const std::size_t rb = find_root(parent, b);
                    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
                }
            }
        }
        // Roots are the lowest member index of each cluster, so visiting roots in
        // index order yields clusters ordered by their first member.
        for (std::size_t a = 0; a < m; ++a) {
            if (find_root(parent, a) != a) continue;
            std::fill(sum.begin(), sum.end(), 0.0);
            double weight = 0.0;
            std::size_t members = 0;
            bool all_raw = true;
            for (std::size_t b = a; b < m; ++b) {
                if (find_root(parent, b) != a) continue;
                const std::size_t src = order[begin + b];
                const auto row = in.points.row(src);
                const double w = in.weights[src];
                for (std::size_t k = 0; k < d; ++k) sum[k] += w * row[k];
                weight += w;
                ++members;
                all_raw = all_raw && in.provenance[src] == Provenance::Raw;
            }
            if (members == 1) {
                const std::size_t src = order[begin + a];
                out.points.append(in.points.row(src));
                out.weights.push_back(in.weights[src]);
                out.provenance.push_back(in.provenance[src]);
                continue;
            }
            merged = true;
            for (auto& v : sum) v /= weight;
            out.points.append(sum);
            out.weights.push_back(weight);
            out.provenance.push_back(all_raw ? Provenance::Raw : Provenance::Virtual);
        }
        begin = end;
    }
    return merged;
}

}  // namespace

BoxSample spherical_resample(const BoxSample& sample, const SphericalGrid& grid, double merge_threshold) {
    if (!(grid.azimuth_res > 0.0) || !(grid.elevation_res > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "spherical grid resolutions must be positive");
    }
    WeightedSet current{sample.points, std::vector<double>(sample.points.rows(), 1.0), sample.provenance};
    current.provenance.resize(sample.points.rows(), Provenance::Raw);
    WeightedSet next{PointCloud(sample.points.cols()), {}, {}};
    while (resample_pass(current, grid, merge_threshold, next)) std::swap(current, next);
    return {sample.box, std::move(next.points), std::move(next.provenance)};
}

AzimuthSpan azimuth_span(const PointCloud& points) {
    const std::size_t n = points.rows();
    if (n == 0) return {};
    std::vector<double> az(n);
    for (std::size_t i = 0; i < n; ++i) az[i] = std::atan2(points(i, 1), points(i, 0));
    std::sort(az.begin(), az.end());
    constexpr double two_pi = 2.0 * std::numbers::pi;
    // Largest empty arc, including the one across the seam.
    double best_gap = az.front() + two_pi - az.back();
    std::size_t start = 0;
    for (std::size_t i = 1; i < n; ++i) {
        const double gap = az[i] - az[i - 1];
        if (gap > best_gap) {
            best_gap = gap;
            start = i;
        }
    }
    return {az[start], std::max(0.0, two_pi - best_gap)};
}

BoxSample simulate_occlusion(const BoxSample& sample, double fraction, Rng& rng) {
    if (!(fraction >= 0.0 && fraction < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "occlusion fraction must lie in [0, 1)");
    }
    const AzimuthSpan span = azimuth_span(sample.points);
    const double window = fraction * span.width;
    const double offset = rng.uniform(0.0, span.width - window);

    constexpr double two_pi = 2.0 * std::numbers::pi;
    BoxSample out{sample.box, PointCloud(sample.points.cols()), {}};
    for (std::size_t i = 0; i < sample.points.rows(); ++i) {
        const double az = std::atan2(sample.points(i, 1), sample.points(i, 0));
        double rel = std::fmod(az - span.start, two_pi);
        if (rel < 0.0) rel += two_pi;
        if (rel >= offset && rel < offset + window) continue;
        out.points.append(sample.points.row(i));
        out.provenance.push_back(i < sample.provenance.size() ? sample.provenance[i] : Provenance::Raw);
    }
    return out;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = rng.below(i);
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

Scene gt_aug_insert(const Scene& scene, const std::vector<BoxSample>& donors, std::size_t max_insert,
                    Rng& rng) {
    Scene out = scene;
    out.provenance.resize(out.points.rows(), Provenance::Raw);
    std::vector<BevRect> occupied;
    occupied.reserve(scene.boxes.size() + max_insert);
    for (const auto& box : scene.boxes) occupied.push_back(bev_footprint(box, kBevInflate));

    std::size_t accepted = 0;
    for (std::size_t idx : shuffled_indices(donors.size(), rng)) {
        if (accepted >= max_insert) break;
        const BoxSample& donor = donors[idx];
        if (donor.points.empty() || donor.points.cols() != out.points.cols()) continue;
        const BevRect fp = bev_footprint(donor.box, kBevInflate);
        if (std::any_of(occupied.begin(), occupied.end(), [&](const BevRect& r) { return bev_intersects(fp, r); })) {
            continue;
        }
        Scene next{PointCloud(out.points.cols()), {}, std::move(out.boxes)};
        next.points.reserve(out.points.rows() + donor.points.rows());
        for (std::size_t i = 0; i < out.points.rows(); ++i) {
            const auto row = out.points.row(i);
            if (donor.box.contains({row[0], row[1], row[2]}, kBoxEpsilon)) continue;
            next.points.append(row);
            next.provenance.push_back(out.provenance[i]);
        }
        next.points.append(donor.points);
        for (std::size_t i = 0; i < donor.points.rows(); ++i) {
            next.provenance.push_back(i < donor.provenance.size() ? donor.provenance[i] : Provenance::Raw);
        }
        next.boxes.push_back(donor.box);
        occupied.push_back(fp);
        out = std::move(next);
        ++accepted;
    }
    return out;
}

std::vector<BoxSample> dada_pipeline(const std::vector<BoxSample>& samples, const DadaConfig& cfg) {
    cfg.validate();
    std::vector<BoxSample> out;
    out.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        Rng rng = Rng::stream(cfg.seed, i);
        const double delta = rng.uniform(cfg.offset_min, cfg.offset_max);
        BoxSample s = apply_distance_offset(samples[i], delta);
        s = spherical_resample(s, cfg.grid, cfg.merge_threshold);
        if (rng.uniform() < cfg.occlusion_probability) {
            const double fraction = rng.uniform(cfg.occlusion_min, cfg.occlusion_max);
            s = simulate_occlusion(s, fraction, rng);
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace vpaint
