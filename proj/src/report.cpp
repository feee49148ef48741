#include "vpaint/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vpaint/error.hpp"

namespace vpaint {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string edge(double v) {
    if (std::isinf(v)) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

ClassBinStats& class_entry(DistanceBin& bin, int class_id) {
    auto it = std::lower_bound(bin.classes.begin(), bin.classes.end(), class_id,
                               [](const ClassBinStats& s, int id) { return s.class_id < id; });
    if (it == bin.classes.end() || it->class_id != class_id) {
        it = bin.classes.insert(it, ClassBinStats{class_id});
    }
    return *it;
}

}  // namespace

double ClassBinStats::mean_points_per_box() const { return ratio(point_count, box_count); }
double ClassBinStats::foreground_fraction() const { return ratio(painted_foreground, painted_points); }

std::size_t DistanceBin::box_count() const {
    std::size_t n = 0;
    for (const auto& c : classes) n += c.box_count;
    return n;
}

std::size_t DistanceBin::box_point_count() const {
    std::size_t n = 0;
    for (const auto& c : classes) n += c.point_count;
    return n;
}

double DistanceBin::mean_points_per_box() const { return ratio(box_point_count(), box_count()); }
double DistanceBin::foreground_fraction() const { return ratio(painted_foreground, painted_points); }

DistanceBinReport DistanceBinReport::empty(std::vector<int> class_ids) {
    std::sort(class_ids.begin(), class_ids.end());
    class_ids.erase(std::unique(class_ids.begin(), class_ids.end()), class_ids.end());
    DistanceBinReport report;
    report.class_ids = class_ids;
    for (auto [lo, hi] : {std::pair{0.0, 30.0}, {30.0, 50.0}, {50.0, kInf}}) {
        DistanceBin bin;
        bin.lower = lo;
        bin.upper = hi;
        for (int id : class_ids) bin.classes.push_back(ClassBinStats{id});
        report.bins.push_back(std::move(bin));
    }
    return report;
}

std::size_t DistanceBinReport::total_points() const {
    std::size_t n = 0;
    for (const auto& b : bins) n += b.point_count;
    return n;
}

std::size_t DistanceBinReport::total_boxes() const {
    std::size_t n = 0;
    for (const auto& b : bins) n += b.box_count();
    return n;
}

void DistanceBinReport::merge(const DistanceBinReport& other) {
    if (other.bins.size() != bins.size()) throw Error(ErrorCode::LayoutMismatch, "reports use different bins");
    std::set<int> ids(class_ids.begin(), class_ids.end());
    ids.insert(other.class_ids.begin(), other.class_ids.end());
    class_ids.assign(ids.begin(), ids.end());
    for (std::size_t b = 0; b < bins.size(); ++b) {
        DistanceBin& dst = bins[b];
        const DistanceBin& src = other.bins[b];
        dst.point_count += src.point_count;
        dst.painted_points += src.painted_points;
        dst.painted_foreground += src.painted_foreground;
        for (int id : class_ids) class_entry(dst, id);
        for (const auto& c : src.classes) {
            ClassBinStats& e = class_entry(dst, c.class_id);
            e.box_count += c.box_count;
            e.point_count += c.point_count;
            e.painted_points += c.painted_points;
            e.painted_foreground += c.painted_foreground;
        }
    }
}

std::size_t bin_index(const DistanceBinReport& report, double range) {
    for (std::size_t b = 0; b < report.bins.size(); ++b) {
        if (range >= report.bins[b].lower && range < report.bins[b].upper) return b;
    }
    return report.bins.size() - 1;
}

DistanceBinReport distance_report(const PointCloud& cloud, const std::vector<Box3D>& boxes,
                                  const PaintedCloud* painted, double margin) {
    if (painted && painted->points.rows() != cloud.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "painted cloud must have one row per cloud row");
    }
    std::vector<int> ids;
    for (const auto& box : boxes) {
        box.validate();
        ids.push_back(box.class_id);
    }
    DistanceBinReport report = DistanceBinReport::empty(ids);

    std::vector<std::size_t> box_bin(boxes.size());
    for (std::size_t k = 0; k < boxes.size(); ++k) {
        box_bin[k] = bin_index(report, boxes[k].center.norm());
        ++class_entry(report.bins[box_bin[k]], boxes[k].class_id).box_count;
    }

    for (std::size_t i = 0; i < cloud.rows(); ++i) {
        const auto row = cloud.row(i);
        const Eigen::Vector3d p(row[0], row[1], row[2]);
        DistanceBin& bin = report.bins[bin_index(report, p.norm())];
        ++bin.point_count;
        const bool foreground = painted && argmax_class(*painted, i) != kBackgroundClass;
        if (painted) {
            ++bin.painted_points;
            bin.painted_foreground += foreground ? 1 : 0;
        }
        for (std::size_t k = 0; k < boxes.size(); ++k) {
            if (!boxes[k].contains(p, margin)) continue;
            ClassBinStats& e = class_entry(report.bins[box_bin[k]], boxes[k].class_id);
            ++e.point_count;
            if (painted) {
                ++e.painted_points;
                e.painted_foreground += foreground ? 1 : 0;
            }
            break;
        }
    }
    return report;
}

ReportFormat parse_report_format(std::string_view name) {
    if (name == "text") return ReportFormat::Text;
    if (name == "json") return ReportFormat::Json;
    if (name == "csv") return ReportFormat::Csv;
    throw Error(ErrorCode::InvalidArgument, "unknown report format '" + std::string(name) + "'");
}

std::string emit_report(const DistanceBinReport& report, ReportFormat format) {
    std::ostringstream out;
    switch (format) {
        case ReportFormat::Text: {
            out << "range_bin  class  boxes  points  pts/box  fg_frac\n";
            for (const auto& bin : report.bins) {
                const std::string label = "[" + edge(bin.lower) + "," + edge(bin.upper) + ")";
                for (const auto& c : bin.classes) {
                    char line[160];
                    std::snprintf(line, sizeof line, "%-10s %6d %6zu %7zu %8.2f %8.4f\n", label.c_str(), c.class_id,
                                  c.box_count, c.point_count, c.mean_points_per_box(), c.foreground_fraction());
                    out << line;
                }
                char line[160];
                std::snprintf(line, sizeof line, "%-10s %6s %6zu %7zu %8.2f %8.4f  (all points in bin: %zu)\n",
                              label.c_str(), "all", bin.box_count(), bin.box_point_count(), bin.mean_points_per_box(),
                              bin.foreground_fraction(), bin.point_count);
                out << line;
            }
            out << "total points " << report.total_points() << ", total boxes " << report.total_boxes() << '\n';
            break;
        }
        case ReportFormat::Json: {
            nlohmann::ordered_json j;
            j["class_ids"] = report.class_ids;
            j["bins"] = nlohmann::ordered_json::array();
            for (const auto& bin : report.bins) {
                nlohmann::ordered_json jb;
                jb["lower"] = bin.lower;
                jb["upper"] = std::isinf(bin.upper) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(bin.upper);
                jb["point_count"] = bin.point_count;
                jb["painted_points"] = bin.painted_points;
                jb["painted_foreground"] = bin.painted_foreground;
                jb["classes"] = nlohmann::ordered_json::array();
                for (const auto& c : bin.classes) {
                    jb["classes"].push_back({{"class_id", c.class_id},
                                             {"box_count", c.box_count},
                                             {"point_count", c.point_count},
                                             {"mean_points_per_box", c.mean_points_per_box()},
                                             {"painted_points", c.painted_points},
                                             {"painted_foreground", c.painted_foreground},
                                             {"foreground_fraction", c.foreground_fraction()}});
                }
                j["bins"].push_back(std::move(jb));
            }
            out << j.dump(2) << '\n';
            break;
        }
        case ReportFormat::Csv: {
            out << "bin_lower,bin_upper,class_id,box_count,point_count,mean_points_per_box,painted_points,"
                   "painted_foreground,foreground_fraction\n";
            for (const auto& bin : report.bins) {
                for (const auto& c : bin.classes) {
                    out << edge(bin.lower) << ',' << edge(bin.upper) << ',' << c.class_id << ',' << c.box_count << ','
                        << c.point_count << ',' << fixed(c.mean_points_per_box()) << ',' << c.painted_points << ','
                        << c.painted_foreground << ',' << fixed(c.foreground_fraction(), 6) << '\n';
                }
            }
            break;
        }
    }
    return out.str();
}

DistanceBinReport parse_report_json(std::string_view text) {
    try {
        const auto j = nlohmann::json::parse(text);
        DistanceBinReport report;
        report.class_ids = j.at("class_ids").get<std::vector<int>>();
        for (const auto& jb : j.at("bins")) {
            DistanceBin bin;
            bin.lower = jb.at("lower").get<double>();
            bin.upper = jb.at("upper").is_null() ? kInf : jb.at("upper").get<double>();
            bin.point_count = jb.at("point_count").get<std::size_t>();
            bin.painted_points = jb.at("painted_points").get<std::size_t>();
            bin.painted_foreground = jb.at("painted_foreground").get<std::size_t>();
            for (const auto& jc : jb.at("classes")) {
                ClassBinStats c;
                c.class_id = jc.at("class_id").get<int>();
                c.box_count = jc.at("box_count").get<std::size_t>();
                c.point_count = jc.at("point_count").get<std::size_t>();
                c.painted_points = jc.at("painted_points").get<std::size_t>();
                c.painted_foreground = jc.at("painted_foreground").get<std::size_t>();
                bin.classes.push_back(c);
            }
            report.bins.push_back(std::move(bin));
        }
        return report;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Format, std::string("report json: ") + e.what());
    }
}

}  // namespace vpaint
