#include "vpaint/painting.hpp"

#include <cmath>

#include "vpaint/error.hpp"

namespace vpaint {

ScoreMap::ScoreMap(int width, int height, int classes)
    : ScoreMap(width, height, classes,
               std::vector<float>(static_cast<std::size_t>(std::max(width, 0)) *
                                  static_cast<std::size_t>(std::max(height, 0)) *
                                  static_cast<std::size_t>(std::max(classes, 0)))) {}

ScoreMap::ScoreMap(int width, int height, int classes, std::vector<float> scores)
    : width_(width), height_(height), classes_(classes), scores_(std::move(scores)) {
    if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidArgument, "score map size must be positive");
    if (classes < 2) throw Error(ErrorCode::InvalidArgument, "score map needs at least 2 classes");
    if (scores_.size() != static_cast<std::size_t>(width) * height * classes) {
        throw Error(ErrorCode::DimensionMismatch, "score buffer does not match H x W x C");
    }
}

bool ScoreMap::is_normalized() const {
    for (std::size_t p = 0; p < scores_.size(); p += classes_) {
        double sum = 0.0;
        for (int c = 0; c < classes_; ++c) {
            const float s = scores_[p + c];
            if (!std::isfinite(s) || s < 0.0f || s > 1.0f) return false;
            sum += s;
        }
        if (std::abs(sum - 1.0) > 1e-5) return false;
    }
    return true;
}

PaintedCloud paint(const PointCloud& augmented, const ScoreMap& scores, const CalibrationSet& calib,
                   const std::vector<Provenance>& provenance) {
    if (scores.size() != calib.image_size()) {
        throw Error(ErrorCode::DimensionMismatch, "score map size does not match calibration image size");
    }
    if (!provenance.empty() && provenance.size() != augmented.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "provenance length does not match row count");
    }
    const std::size_t n = augmented.rows();
    const std::size_t d = augmented.cols();
    const std::size_t c = static_cast<std::size_t>(scores.classes());
    const std::size_t width = d + c;

    std::vector<double> out(n * width);
    for (std::size_t i = 0; i < n; ++i) {
        const auto src = augmented.row(i);
        double* dst = out.data() + i * width;
        std::copy(src.begin(), src.end(), dst);
        double* block = dst + d;

        const auto pixel = project(calib, {src[0], src[1], src[2]});
        std::optional<int> col, row;
        if (pixel) {
            col = pixel_index(pixel->u, scores.width());
            row = pixel_index(pixel->v, scores.height());
        }
        if (col && row) {
            const float* s = scores.at(*row, *col);
            for (std::size_t k = 0; k < c; ++k) block[k] = s[k];
        } else {
            block[kBackgroundClass] = 1.0;
        }
    }

    PaintedCloud painted;
    painted.points = PointCloud(std::move(out), width);
    painted.base_dims = d;
    painted.class_dims = c;
    painted.provenance = provenance.empty() ? std::vector<Provenance>(n, Provenance::Raw) : provenance;
    return painted;
}

std::size_t argmax_class(const PaintedCloud& painted, std::size_t row) {
    const auto r = painted.points.row(row);
    std::size_t best = 0;
    for (std::size_t k = 1; k < painted.class_dims; ++k) {
        if (r[painted.base_dims + k] > r[painted.base_dims + best]) best = k;
    }
    return best;
}

PaintStats paint_stats(const PaintedCloud& painted) {
    PaintStats stats;
    stats.total = painted.points.rows();
    stats.class_counts.assign(painted.class_dims, 0);
    stats.raw_class_counts.assign(painted.class_dims, 0);
    stats.virtual_class_counts.assign(painted.class_dims, 0);
    if (painted.class_dims == 0) return stats;
    for (std::size_t i = 0; i < stats.total; ++i) {
        const std::size_t k = argmax_class(painted, i);
        const bool is_virtual = i < painted.provenance.size() && painted.provenance[i] == Provenance::Virtual;
        ++stats.class_counts[k];
        if (is_virtual) {
            ++stats.virtual_count;
            ++stats.virtual_class_counts[k];
            if (k != kBackgroundClass) ++stats.foreground_virtual;
        } else {
            ++stats.raw_count;
            ++stats.raw_class_counts[k];
            if (k != kBackgroundClass) ++stats.foreground_raw;
        }
    }
    if (stats.total > 0) {
        stats.background_fraction =
            static_cast<double>(stats.class_counts[kBackgroundClass]) / static_cast<double>(stats.total);
    }
    return stats;
}

}  // namespace vpaint
