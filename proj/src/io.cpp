#include "vpaint/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "vpaint/error.hpp"

namespace vpaint::io {

namespace fs = std::filesystem;

namespace {

void put_u32(Bytes& out, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

void put_f32(Bytes& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

class Reader {
public:
    Reader(std::span<const std::uint8_t> bytes, const char* what) : bytes_(bytes), what_(what) {}

    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw Error(ErrorCode::Format, std::string(what_) + ": truncated data");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(bytes_[pos_ + k]) << (8 * k);
        pos_ += 4;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }
    void magic(const char* m) {
        need(4);
        if (std::memcmp(bytes_.data() + pos_, m, 4) != 0) {
            throw Error(ErrorCode::Format, std::string(what_) + ": bad magic, expected " + m);
        }
        pos_ += 4;
    }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
    const char* what_;
};

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

}  // namespace

Bytes read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MissingInput, "cannot open " + path.string());
    in.seekg(0, std::ios::end);
    const auto size = static_cast<std::size_t>(in.tellg());
    in.seekg(0);
    Bytes out(size);
    if (size > 0 && !in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(size))) {
        throw Error(ErrorCode::Io, "short read on " + path.string());
    }
    return out;
}

std::string read_text(const fs::path& path) {
    const Bytes bytes = read_file(path);
    return {bytes.begin(), bytes.end()};
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ostringstream suffix;
    suffix << ".tmp." << std::this_thread::get_id();
    const fs::path tmp = path.string() + suffix.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot create " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

void write_text_atomic(const fs::path& path, std::string_view text) {
    write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

PointCloud decode_kitti_bin(std::span<const std::uint8_t> bytes) {
    if (bytes.size() % 16 != 0) throw Error(ErrorCode::Format, "velodyne bin size is not a multiple of 16 bytes");
    Reader in(bytes, "velodyne bin");
    std::vector<double> data(bytes.size() / 4);
    for (auto& v : data) v = in.f32();
    return PointCloud(std::move(data), 4);
}

Bytes encode_kitti_bin(const PointCloud& cloud) {
    Bytes out;
    out.reserve(cloud.rows() * 16);
    for (std::size_t i = 0; i < cloud.rows(); ++i) {
        const auto row = cloud.row(i);
        for (std::size_t k = 0; k < 4; ++k) put_f32(out, static_cast<float>(k < row.size() ? row[k] : 0.0));
    }
    return out;
}

CalibrationSet read_calibration(const fs::path& path, ImageSize image_size) {
    return parse_calibration(read_text(path), image_size);
}

std::uint16_t depth_to_code(double depth) {
    if (!(depth > 0.0)) return 0;
    const double code = std::round(depth * 256.0);
    return static_cast<std::uint16_t>(std::clamp(code, 1.0, 65535.0));
}

namespace {

struct PngWriteState {
    Bytes* out;
};

void png_write_bytes(png_structp png, png_bytep data, png_size_t length) {
    auto* state = static_cast<PngWriteState*>(png_get_io_ptr(png));
    state->out->insert(state->out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

struct PngReadState {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;
};

void png_read_bytes(png_structp png, png_bytep data, png_size_t length) {
    auto* state = static_cast<PngReadState*>(png_get_io_ptr(png));
    if (state->bytes.size() - state->pos < length) png_error(png, "truncated PNG");
    std::memcpy(data, state->bytes.data() + state->pos, length);
    state->pos += length;
}

[[noreturn]] void png_error_throw(png_structp, png_const_charp msg) { throw Error(ErrorCode::Format, msg); }
void png_warning_ignore(png_structp, png_const_charp) {}

}  // namespace

Bytes encode_depth_png(const DepthMap& map) {
    Bytes out;
    PngWriteState state{&out};
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_throw, png_warning_ignore);
    if (!png) throw Error(ErrorCode::Io, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    try {
        png_set_write_fn(png, &state, png_write_bytes, png_flush_noop);
        png_set_IHDR(png, info, map.width(), map.height(), 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                     PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        std::vector<std::uint8_t> row(static_cast<std::size_t>(map.width()) * 2);
        for (int r = 0; r < map.height(); ++r) {
            for (int c = 0; c < map.width(); ++c) {
                const std::uint16_t code = depth_to_code(map.at(r, c));
                row[2 * c] = static_cast<std::uint8_t>(code >> 8);  // PNG stores 16-bit samples big-endian
                row[2 * c + 1] = static_cast<std::uint8_t>(code & 0xFF);
            }
            png_write_row(png, row.data());
        }
        png_write_end(png, nullptr);
    } catch (...) {
        png_destroy_write_struct(&png, &info);
        throw;
    }
    png_destroy_write_struct(&png, &info);
    return out;
}

DepthMap decode_depth_png(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw Error(ErrorCode::Format, "not a PNG file");
    PngReadState state{bytes};
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_throw, png_warning_ignore);
    if (!png) throw Error(ErrorCode::Io, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    try {
        png_set_read_fn(png, &state, png_read_bytes);
        png_read_info(png, info);
        const int width = static_cast<int>(png_get_image_width(png, info));
        const int height = static_cast<int>(png_get_image_height(png, info));
        if (png_get_bit_depth(png, info) != 16 || png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY) {
            throw Error(ErrorCode::Format, "depth PNG must be 16-bit single channel");
        }
        std::vector<double> values(static_cast<std::size_t>(width) * height);
        std::vector<std::uint8_t> row(static_cast<std::size_t>(width) * 2);
        for (int r = 0; r < height; ++r) {
            png_read_row(png, row.data(), nullptr);
            for (int c = 0; c < width; ++c) {
                const unsigned code = (static_cast<unsigned>(row[2 * c]) << 8) | row[2 * c + 1];
                values[static_cast<std::size_t>(r) * width + c] = code / 256.0;
            }
        }
        png_destroy_read_struct(&png, &info, nullptr);
        return DepthMap(width, height, std::move(values));
    } catch (...) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw;
    }
}

Bytes encode_score_map(const ScoreMap& scores) {
    Bytes out;
    out.reserve(16 + scores.scores().size() * 4);
    out.insert(out.end(), {'V', 'P', 'T', 'N'});
    put_u32(out, static_cast<std::uint32_t>(scores.height()));
    put_u32(out, static_cast<std::uint32_t>(scores.width()));
    put_u32(out, static_cast<std::uint32_t>(scores.classes()));
    for (float s : scores.scores()) put_f32(out, s);
    return out;
}

ScoreMap decode_score_map(std::span<const std::uint8_t> bytes) {
    Reader in(bytes, "VPTN");
    in.magic("VPTN");
    const std::uint32_t h = in.u32();
    const std::uint32_t w = in.u32();
    const std::uint32_t c = in.u32();
    const std::uint64_t count = static_cast<std::uint64_t>(h) * w * c;
    if (in.remaining() != count * 4) throw Error(ErrorCode::Format, "VPTN: payload size does not match header");
    std::vector<float> scores(count);
    for (auto& s : scores) s = in.f32();
    return ScoreMap(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c), std::move(scores));
}

Bytes encode_painted(const PaintedCloud& painted) {
    const std::size_t n = painted.points.rows();
    const std::size_t dims = painted.points.cols();
    Bytes out;
    out.reserve(16 + n * dims * 4 + n);
    out.insert(out.end(), {'V', 'P', 'P', 'C'});
    put_u32(out, static_cast<std::uint32_t>(n));
    put_u32(out, static_cast<std::uint32_t>(dims));
    put_u32(out, static_cast<std::uint32_t>(painted.base_dims));
    for (double v : painted.points.data()) put_f32(out, static_cast<float>(v));
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(i < painted.provenance.size() ? static_cast<std::uint8_t>(painted.provenance[i]) : 0);
    }
    return out;
}

PaintedCloud decode_painted(std::span<const std::uint8_t> bytes) {
    Reader in(bytes, "VPPC");
    in.magic("VPPC");
    const std::uint32_t n = in.u32();
    const std::uint32_t dims = in.u32();
    const std::uint32_t base = in.u32();
    if (dims < 3 || base < 3 || base > dims) throw Error(ErrorCode::Format, "VPPC: inconsistent dimensions");
    const std::uint64_t floats = static_cast<std::uint64_t>(n) * dims;
    if (in.remaining() != floats * 4 + n) throw Error(ErrorCode::Format, "VPPC: payload size does not match header");
    std::vector<double> data(floats);
    for (auto& v : data) v = in.f32();
    PaintedCloud out;
    out.points = PointCloud(std::move(data), dims);
    out.base_dims = base;
    out.class_dims = dims - base;
    out.provenance.resize(n);
    for (auto& p : out.provenance) {
        const std::uint8_t b = in.u8();
        if (b > 1) throw Error(ErrorCode::Format, "VPPC: provenance byte must be 0 or 1");
        p = static_cast<Provenance>(b);
    }
    return out;
}

namespace {

constexpr std::pair<std::string_view, int> kKittiClasses[] = {
    {"Car", 1}, {"Pedestrian", 2}, {"Cyclist", 3}, {"Van", 4},
    {"Truck", 5}, {"Person_sitting", 6}, {"Tram", 7}, {"Misc", 8},
};

}  // namespace

int kitti_class_id(std::string_view type) {
    for (auto [name, id] : kKittiClasses) {
        if (name == type) return id;
    }
    return -1;
}

std::string kitti_class_name(int class_id) {
    for (auto [name, id] : kKittiClasses) {
        if (id == class_id) return std::string(name);
    }
    return "Misc";
}

std::vector<Box3D> parse_kitti_labels(std::string_view text, const CalibrationSet& calib) {
    std::vector<Box3D> boxes;
    std::istringstream lines{std::string(text)};
    std::string line;
    int line_no = 0;
    const Eigen::Matrix3d cam_to_lidar_rot = calib.cam_to_lidar().topLeftCorner<3, 3>();
    while (std::getline(lines, line)) {
        ++line_no;
        std::istringstream fields(line);
        std::string type;
        if (!(fields >> type)) continue;
        double v[14];
        for (double& x : v) {
            if (!(fields >> x)) {
                throw Error(ErrorCode::Format, "label line " + std::to_string(line_no) + ": expected 15 fields");
            }
        }
        const int id = kitti_class_id(type);
        if (id < 0) continue;
        // v: truncation, occlusion, alpha, x1, y1, x2, y2, h, w, l, x, y, z, rotation_y
        const double h = v[7], w = v[8], l = v[9], ry = v[13];
        const Eigen::Vector4d center_cam(v[10], v[11] - 0.5 * h, v[12], 1.0);
        const Eigen::Vector3d heading = cam_to_lidar_rot * Eigen::Vector3d(std::cos(ry), 0.0, -std::sin(ry));
        Box3D box;
        box.center = (calib.cam_to_lidar() * center_cam).head<3>();
        box.length = l;
        box.width = w;
        box.height = h;
        box.yaw = wrap_angle(std::atan2(heading.y(), heading.x()));
        box.class_id = id;
        box.validate();
        boxes.push_back(box);
    }
    return boxes;
}

std::string format_kitti_labels(const std::vector<Box3D>& boxes, const CalibrationSet& calib) {
    std::string out;
    const Eigen::Matrix3d rot = calib.lidar_to_cam().topLeftCorner<3, 3>();
    const ImageSize size = calib.image_size();
    for (const auto& box : boxes) {
        const Eigen::Vector3d c = (calib.lidar_to_cam() * box.center.homogeneous()).head<3>();
        const Eigen::Vector3d heading = rot * Eigen::Vector3d(std::cos(box.yaw), std::sin(box.yaw), 0.0);
        const double ry = wrap_angle(std::atan2(-heading.z(), heading.x()));
        const double alpha = wrap_angle(ry - std::atan2(c.x(), c.z()));

        double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
        bool in_front = true;
        double min_u = 1e300, min_v = 1e300, max_u = -1e300, max_v = -1e300;
        for (const auto& corner : box.corners()) {
            const auto px = project(calib, corner);
            if (!px) {
                in_front = false;
                break;
            }
            min_u = std::min(min_u, px->u);
            max_u = std::max(max_u, px->u);
            min_v = std::min(min_v, px->v);
            max_v = std::max(max_v, px->v);
        }
        if (in_front) {
            x1 = std::clamp(min_u, 0.0, size.width - 1.0);
            x2 = std::clamp(max_u, 0.0, size.width - 1.0);
            y1 = std::clamp(min_v, 0.0, size.height - 1.0);
            y2 = std::clamp(max_v, 0.0, size.height - 1.0);
        }
        out += kitti_class_name(box.class_id);
        out += " 0.00 0 " + fmt("%.6f", alpha);
        for (double b : {x1, y1, x2, y2}) out += " " + fmt("%.2f", b);
        for (double d : {box.height, box.width, box.length}) out += " " + fmt("%.6f", d);
        for (double d : {c.x(), c.y() + 0.5 * box.height, c.z()}) out += " " + fmt("%.6f", d);
        out += " " + fmt("%.6f", ry) + "\n";
    }
    return out;
}

std::string encode_donor_record(const DonorRecord& r) {
    nlohmann::ordered_json j;
    j["file"] = r.file;
    j["frame"] = r.frame_id;
    j["class"] = kitti_class_name(r.box.class_id);
    j["class_id"] = r.box.class_id;
    j["center"] = {r.box.center.x(), r.box.center.y(), r.box.center.z()};
    j["size"] = {r.box.length, r.box.width, r.box.height};
    j["yaw"] = r.box.yaw;
    j["points"] = r.point_count;
    return j.dump();
}

DonorRecord decode_donor_record(std::string_view line) {
    try {
        const auto j = nlohmann::json::parse(line);
        DonorRecord r;
        r.file = j.at("file").get<std::string>();
        r.frame_id = j.at("frame").get<std::string>();
        const auto center = j.at("center").get<std::vector<double>>();
        const auto size = j.at("size").get<std::vector<double>>();
        if (center.size() != 3 || size.size() != 3) throw Error(ErrorCode::Format, "donor record: bad vector length");
        r.box.center = {center[0], center[1], center[2]};
        r.box.length = size[0];
        r.box.width = size[1];
        r.box.height = size[2];
        r.box.yaw = j.at("yaw").get<double>();
        r.box.class_id = j.at("class_id").get<int>();
        r.point_count = j.at("points").get<std::size_t>();
        r.box.validate();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Format, std::string("donor record: ") + e.what());
    }
}

std::vector<DonorRecord> read_donor_index(const fs::path& path) {
    std::vector<DonorRecord> records;
    std::istringstream lines(read_text(path));
    std::string line;
    while (std::getline(lines, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        records.push_back(decode_donor_record(line));
    }
    return records;
}

}  // namespace vpaint::io
