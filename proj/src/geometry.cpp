#include "vpaint/geometry.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "vpaint/error.hpp"

namespace vpaint {

namespace {

constexpr double kMinIntrinsicsDet = 1e-9;

std::vector<double> parse_reals(std::string_view key, std::string_view body) {
    std::vector<double> values;
    std::size_t i = 0;
    while (i < body.size()) {
        while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
        if (i == body.size()) break;
        std::size_t j = i;
        while (j < body.size() && !std::isspace(static_cast<unsigned char>(body[j]))) ++j;
        double v = 0.0;
        const char* first = body.data() + i;
        const char* last = body.data() + j;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
            throw Error(ErrorCode::MalformedNumber,
                        std::string(key) + ": cannot parse '" + std::string(first, last) + "'");
        }
        values.push_back(v);
        i = j;
    }
    return values;
}

}  // namespace

CalibrationSet::CalibrationSet(const CamMatrix& cam_matrix, const Eigen::Matrix4d& lidar_to_cam,
                               ImageSize image_size)
    : cam_matrix_(cam_matrix), lidar_to_cam_(lidar_to_cam), image_size_(image_size) {
    if (lidar_to_cam_(3, 0) != 0.0 || lidar_to_cam_(3, 1) != 0.0 || lidar_to_cam_(3, 2) != 0.0 ||
        lidar_to_cam_(3, 3) != 1.0) {
        throw Error(ErrorCode::InvalidArgument, "lidar_to_cam bottom row must be (0, 0, 0, 1)");
    }
    if (image_size_.width <= 0 || image_size_.height <= 0) {
        throw Error(ErrorCode::InvalidArgument, "image size must be positive");
    }
    if (!cam_matrix_.allFinite() || !lidar_to_cam_.allFinite()) {
        throw Error(ErrorCode::InvalidArgument, "calibration matrices must be finite");
    }
    const Eigen::Matrix3d k = cam_matrix_.leftCols<3>();
    if (std::abs(k.determinant()) <= kMinIntrinsicsDet) {
        throw Error(ErrorCode::SingularIntrinsics, "camera matrix left 3x3 block is singular");
    }
    k_inv_ = k.inverse();
    cam_to_lidar_ = lidar_to_cam_.inverse();
}

CalibrationSet CalibrationSet::with_image_size(ImageSize size) const {
    return CalibrationSet(cam_matrix_, lidar_to_cam_, size);
}

CalibrationSet parse_calibration(std::string_view text, ImageSize image_size) {
    std::map<std::string, std::vector<double>, std::less<>> entries;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        const std::size_t colon = line.find(':');
        if (colon == std::string_view::npos) continue;
        std::string_view key = line.substr(0, colon);
        while (!key.empty() && std::isspace(static_cast<unsigned char>(key.front()))) key.remove_prefix(1);
        while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.remove_suffix(1);
        if (key != "P2" && key != "R0_rect" && key != "Tr_velo_to_cam") continue;
        entries[std::string(key)] = parse_reals(key, line.substr(colon + 1));
    }

    auto fetch = [&](const char* key, std::size_t count) -> const std::vector<double>& {
        auto it = entries.find(key);
        if (it == entries.end()) throw Error(ErrorCode::MissingKey, key);
        if (it->second.size() != count) {
            throw Error(ErrorCode::MalformedNumber, std::string(key) + ": expected " +
                                                        std::to_string(count) + " values, got " +
                                                        std::to_string(it->second.size()));
        }
        return it->second;
    };
    const auto& p2 = fetch("P2", 12);
    const auto& r0 = fetch("R0_rect", 9);
    const auto& tr = fetch("Tr_velo_to_cam", 12);

    CalibrationSet::CamMatrix cam;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) cam(r, c) = p2[r * 4 + c];
    Eigen::Matrix4d rect = Eigen::Matrix4d::Identity();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) rect(r, c) = r0[r * 3 + c];
    Eigen::Matrix4d velo = Eigen::Matrix4d::Identity();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) velo(r, c) = tr[r * 4 + c];

    Eigen::Matrix4d lidar_to_cam = (rect * velo).eval();
    // Products of exact homogeneous rows stay exact, but pin the bottom row anyway.
    lidar_to_cam.row(3) << 0.0, 0.0, 0.0, 1.0;
    return CalibrationSet(cam, lidar_to_cam, image_size);
}

std::string format_calibration(const CalibrationSet& calib) {
    std::ostringstream out;
    out.precision(17);
    out << "P2:";
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) out << ' ' << calib.cam_matrix()(r, c);
    out << "\nR0_rect: 1 0 0 0 1 0 0 0 1\nTr_velo_to_cam:";
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) out << ' ' << calib.lidar_to_cam()(r, c);
    out << '\n';
    return out.str();
}

std::optional<PixelCoord> project(const CalibrationSet& calib, const Eigen::Vector3d& xyz) {
    const auto& t = calib.lidar_to_cam();
    const auto& m = calib.cam_matrix();
    // Explicit left-to-right accumulation keeps the result independent of
    // vectorization choices.
    double cam[4];
    for (int r = 0; r < 4; ++r) {
        cam[r] = t(r, 0) * xyz.x() + t(r, 1) * xyz.y() + t(r, 2) * xyz.z() + t(r, 3);
    }
    double p[3];
    for (int r = 0; r < 3; ++r) {
        p[r] = m(r, 0) * cam[0] + m(r, 1) * cam[1] + m(r, 2) * cam[2] + m(r, 3) * cam[3];
    }
    if (!(p[2] > kBehindDepth)) return std::nullopt;
    return PixelCoord{p[0] / p[2], p[1] / p[2], p[2]};
}

Eigen::Vector3d back_project(const CalibrationSet& calib, const PixelCoord& pixel) {
    if (!(pixel.depth > 0.0)) throw Error(ErrorCode::InvalidArgument, "back_project needs depth > 0");
    const auto& m = calib.cam_matrix();
    const Eigen::Vector3d scaled(pixel.depth * pixel.u - m(0, 3), pixel.depth * pixel.v - m(1, 3),
                                 pixel.depth - m(2, 3));
    const Eigen::Vector3d cam = calib.intrinsics_inverse() * scaled;
    const Eigen::Vector4d lidar = calib.cam_to_lidar() * cam.homogeneous();
    return lidar.head<3>();
}

std::optional<int> pixel_index(double coord, int extent) {
    if (!(coord >= -0.5) || !(coord <= extent - 0.5)) return std::nullopt;
    const int idx = static_cast<int>(std::floor(coord + 0.5));
    return idx >= extent ? extent - 1 : idx;
}

Spherical to_spherical(const Eigen::Vector3d& xyz) {
    const double r = xyz.norm();
    if (!(r > 0.0)) throw Error(ErrorCode::ZeroRadius, "spherical coordinates undefined at the origin");
    // Clamp guards asin against |z/r| exceeding 1 by one ulp.
    const double s = std::clamp(xyz.z() / r, -1.0, 1.0);
    double azimuth = std::atan2(xyz.y(), xyz.x());
    if (azimuth <= -std::numbers::pi) azimuth = std::numbers::pi;
    return {r, azimuth, std::asin(s)};
}

Eigen::Vector3d from_spherical(const Spherical& s) {
    const double horizontal = s.range * std::cos(s.elevation);
    return {horizontal * std::cos(s.azimuth), horizontal * std::sin(s.azimuth),
            s.range * std::sin(s.elevation)};
}

double wrap_angle(double angle) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double a = std::fmod(angle, two_pi);
    if (a <= -std::numbers::pi) a += two_pi;
    if (a > std::numbers::pi) a -= two_pi;
    return a;
}

}  // namespace vpaint
