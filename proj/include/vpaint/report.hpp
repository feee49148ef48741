#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "vpaint/dada.hpp"
#include "vpaint/painting.hpp"
#include "vpaint/point_cloud.hpp"

namespace vpaint {

/// Per-class statistics for boxes whose center range falls in one bin.
struct ClassBinStats {
    int class_id = 0;
    std::size_t box_count = 0;
    std::size_t point_count = 0;         // points inside those boxes
    std::size_t painted_points = 0;      // of which painted
    std::size_t painted_foreground = 0;  // painted with argmax != background

    double mean_points_per_box() const;
    double foreground_fraction() const;  // 0 when nothing was painted
    friend bool operator==(const ClassBinStats&, const ClassBinStats&) = default;
};

/// Range bin [lower, upper); the last bin has an infinite upper edge.
struct DistanceBin {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t point_count = 0;  // all points with range in the bin
    std::size_t painted_points = 0;
    std::size_t painted_foreground = 0;
    std::vector<ClassBinStats> classes;  // one entry per report class id, ascending

    std::size_t box_count() const;
    std::size_t box_point_count() const;
    /// Over all classes in the bin.
    double mean_points_per_box() const;
    double foreground_fraction() const;
    friend bool operator==(const DistanceBin&, const DistanceBin&) = default;
};

struct DistanceBinReport {
    std::vector<int> class_ids;
    std::vector<DistanceBin> bins;

    /// Bins [0, 30), [30, 50), [50, inf) with zeroed entries for `class_ids`.
    static DistanceBinReport empty(std::vector<int> class_ids = {});

    std::size_t total_points() const;
    std::size_t total_boxes() const;
    /// Adds the counts of `other`, extending the class list as needed.
    void merge(const DistanceBinReport& other);
    friend bool operator==(const DistanceBinReport&, const DistanceBinReport&) = default;
};

/// Index of the bin containing `range` (left-closed, right-open).
std::size_t bin_index(const DistanceBinReport& report, double range);

/**
 * Bins boxes by the range of their center and points by their own range.
 * Box interiors follow extract_box_samples (first box wins, `margin` growth).
 * When `painted` is given it must have one row per cloud row; its argmax
 * class drives the foreground fractions.
 */
DistanceBinReport distance_report(const PointCloud& cloud, const std::vector<Box3D>& boxes,
                                  const PaintedCloud* painted = nullptr, double margin = kBoxEpsilon);

enum class ReportFormat { Text, Json, Csv };

/// Throws InvalidArgument for an unknown name.
ReportFormat parse_report_format(std::string_view name);
std::string emit_report(const DistanceBinReport& report, ReportFormat format);
/// Inverse of emit_report(..., Json). Throws Format on malformed input.
DistanceBinReport parse_report_json(std::string_view text);

}  // namespace vpaint
