#include "vpaint/depth_map.hpp"

#include "vpaint/error.hpp"

namespace vpaint {

DepthMap::DepthMap(int width, int height)
    : width_(width), height_(height),
      values_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0.0) {
    if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidArgument, "depth map size must be positive");
}

DepthMap::DepthMap(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
    if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidArgument, "depth map size must be positive");
    if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw Error(ErrorCode::DimensionMismatch, "depth buffer does not match width x height");
    }
}

std::size_t DepthMap::valid_count() const {
    std::size_t n = 0;
    for (double v : values_) n += v > 0.0 ? 1 : 0;
    return n;
}

double DepthMap::valid_fraction() const {
    return values_.empty() ? 0.0 : static_cast<double>(valid_count()) / static_cast<double>(values_.size());
}

DepthMap sparsify(const PointCloud& cloud, const CalibrationSet& calib) {
    const ImageSize size = calib.image_size();
    DepthMap map(size.width, size.height);
    for (std::size_t i = 0; i < cloud.rows(); ++i) {
        const auto row = cloud.row(i);
        const auto pixel = project(calib, {row[0], row[1], row[2]});
        if (!pixel || pixel->depth > kMaxEncodableDepth) continue;
        const auto col = pixel_index(pixel->u, size.width);
        const auto r = pixel_index(pixel->v, size.height);
        if (!col || !r) continue;
        double& cell = map.at(*r, *col);
        if (cell == 0.0 || pixel->depth < cell) cell = pixel->depth;
    }
    return map;
}

PointCloud virtual_points_from_depth(const DepthMap& dense, const CalibrationSet& calib,
                                     VirtualPointOptions options) {
    if (dense.size() != calib.image_size()) {
        throw Error(ErrorCode::DimensionMismatch, "depth map size does not match calibration image size");
    }
    if (options.stride < 1) throw Error(ErrorCode::InvalidArgument, "stride must be positive");
    PointCloud out(4);
    for (int r = 0; r < dense.height(); r += options.stride) {
        for (int c = 0; c < dense.width(); c += options.stride) {
            const double depth = dense.at(r, c);
            if (!(depth > 0.0) || depth > options.max_range) continue;
            const Eigen::Vector3d p = back_project(calib, {c + 0.5, r + 0.5, depth});
            const double row[4] = {p.x(), p.y(), p.z(), kVirtualIntensity};
            out.append(row);
        }
    }
    return out;
}

FusedCloud fuse(const PointCloud& raw, const PointCloud& virtual_pts) {
    if (raw.cols() != virtual_pts.cols()) {
        throw Error(ErrorCode::LayoutMismatch, "raw has " + std::to_string(raw.cols()) +
                                                   " columns, virtual has " +
                                                   std::to_string(virtual_pts.cols()));
    }
    FusedCloud out{raw, {}};
    out.points.append(virtual_pts);
    out.provenance.assign(raw.rows(), Provenance::Raw);
    out.provenance.resize(raw.rows() + virtual_pts.rows(), Provenance::Virtual);
    return out;
}

PointCloud select_provenance(const FusedCloud& fused, Provenance which) {
    PointCloud out(fused.points.cols());
    for (std::size_t i = 0; i < fused.points.rows(); ++i) {
        if (fused.provenance[i] == which) out.append(fused.points.row(i));
    }
    return out;
}

}  // namespace vpaint
