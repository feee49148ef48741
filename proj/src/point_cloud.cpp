#include "vpaint/point_cloud.hpp"

#include <cmath>

#include "vpaint/error.hpp"

namespace vpaint {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingKey: return "MissingKey";
        case ErrorCode::MalformedNumber: return "MalformedNumber";
        case ErrorCode::SingularIntrinsics: return "SingularIntrinsics";
        case ErrorCode::ZeroRadius: return "ZeroRadius";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::LayoutMismatch: return "LayoutMismatch";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::MissingInput: return "MissingInput";
        case ErrorCode::Format: return "Format";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

namespace {

void check_row(std::span<const double> row) {
    if (!std::isfinite(row[0]) || !std::isfinite(row[1]) || !std::isfinite(row[2])) {
        throw Error(ErrorCode::InvalidArgument, "non-finite point coordinate");
    }
}

}  // namespace

PointCloud::PointCloud(std::size_t cols) : cols_(cols) {
    if (cols_ < 3) throw Error(ErrorCode::InvalidArgument, "point cloud needs at least 3 columns");
}

PointCloud::PointCloud(std::vector<double> data, std::size_t cols)
    : data_(std::move(data)), cols_(cols) {
    if (cols_ < 3) throw Error(ErrorCode::InvalidArgument, "point cloud needs at least 3 columns");
    if (data_.size() % cols_ != 0) {
        throw Error(ErrorCode::DimensionMismatch, "buffer length is not a multiple of the row width");
    }
    for (std::size_t i = 0; i < rows(); ++i) check_row(row(i));
}

void PointCloud::append(std::span<const double> values) {
    if (values.size() != cols_) {
        throw Error(ErrorCode::LayoutMismatch, "row width " + std::to_string(values.size()) +
                                                   " != cloud width " + std::to_string(cols_));
    }
    check_row(values);
    data_.insert(data_.end(), values.begin(), values.end());
}

void PointCloud::append(const PointCloud& other) {
    if (other.cols_ != cols_) throw Error(ErrorCode::LayoutMismatch, "column layouts differ");
    data_.insert(data_.end(), other.data_.begin(), other.data_.end());
}

}  // namespace vpaint
