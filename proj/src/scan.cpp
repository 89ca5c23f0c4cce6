#include "lidarforge/scan.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "lidarforge/error.hpp"

namespace lidarforge {

namespace {

std::uint32_t load_u32_le(const std::uint8_t *p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8U) |
           (static_cast<std::uint32_t>(p[2]) << 16U) | (static_cast<std::uint32_t>(p[3]) << 24U);
}

void store_u32_le(std::uint8_t *p, std::uint32_t v) {
    p[0] = static_cast<std::uint8_t>(v & 0xFFU);
    p[1] = static_cast<std::uint8_t>((v >> 8U) & 0xFFU);
    p[2] = static_cast<std::uint8_t>((v >> 16U) & 0xFFU);
    p[3] = static_cast<std::uint8_t>((v >> 24U) & 0xFFU);
}

}  // namespace

void LabeledScan::validate() const {
    if (points.size() != labels.size()) {
        throw ValidationError("scan " + frame_id + ": " + std::to_string(points.size()) + " points but " +
                              std::to_string(labels.size()) + " labels");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto &p = points[i];
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) || !std::isfinite(p.intensity)) {
            throw ValidationError("scan " + frame_id + ": non-finite value at point " + std::to_string(i));
        }
    }
}

std::vector<PointXYZI> parse_points(std::span<const std::uint8_t> bytes, const std::string &source) {
    if (bytes.size() % 16 != 0) {
        throw ValidationError(source + ": length " + std::to_string(bytes.size()) +
                              " is not a multiple of 16 bytes; trailing data at offset " +
                              std::to_string(bytes.size() - bytes.size() % 16));
    }
    std::vector<PointXYZI> points(bytes.size() / 16);
    for (std::size_t i = 0; i < points.size(); ++i) {
        float values[4];
        for (int k = 0; k < 4; ++k) {
            const std::size_t offset = i * 16 + static_cast<std::size_t>(k) * 4;
            values[k] = std::bit_cast<float>(load_u32_le(bytes.data() + offset));
            if (!std::isfinite(values[k])) {
                throw ValidationError(source + ": non-finite float at byte offset " + std::to_string(offset));
            }
        }
        points[i] = {values[0], values[1], values[2], values[3]};
    }
    return points;
}

std::vector<std::uint32_t> parse_labels(std::span<const std::uint8_t> bytes, const std::string &source) {
    if (bytes.size() % 4 != 0) {
        throw ValidationError(source + ": length " + std::to_string(bytes.size()) +
                              " is not a multiple of 4 bytes; trailing data at offset " +
                              std::to_string(bytes.size() - bytes.size() % 4));
    }
    std::vector<std::uint32_t> labels(bytes.size() / 4);
    for (std::size_t i = 0; i < labels.size(); ++i) { labels[i] = load_u32_le(bytes.data() + i * 4); }
    return labels;
}

std::vector<std::uint8_t> encode_points(std::span<const PointXYZI> points) {
    std::vector<std::uint8_t> out(points.size() * 16);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const float values[4] = {points[i].x, points[i].y, points[i].z, points[i].intensity};
        for (int k = 0; k < 4; ++k) {
            store_u32_le(out.data() + i * 16 + static_cast<std::size_t>(k) * 4, std::bit_cast<std::uint32_t>(values[k]));
        }
    }
    return out;
}

std::vector<std::uint8_t> encode_labels(std::span<const std::uint32_t> labels) {
    std::vector<std::uint8_t> out(labels.size() * 4);
    for (std::size_t i = 0; i < labels.size(); ++i) { store_u32_le(out.data() + i * 4, labels[i]); }
    return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) { throw RuntimeError("cannot open " + path.string()); }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path &path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) { std::filesystem::create_directories(path.parent_path()); }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) { throw RuntimeError("cannot write " + path.string()); }
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) { throw RuntimeError("short write to " + path.string()); }
}

std::vector<PointXYZI> read_points(const std::filesystem::path &path) {
    return parse_points(read_file_bytes(path), path.string());
}

std::vector<std::uint32_t> read_labels(const std::filesystem::path &path) {
    return parse_labels(read_file_bytes(path), path.string());
}

LabeledScan read_scan(const std::filesystem::path &point_file, const std::filesystem::path &label_file) {
    LabeledScan scan;
    scan.frame_id = point_file.stem().string();
    scan.points = read_points(point_file);
    scan.labels = read_labels(label_file);
    if (scan.points.size() != scan.labels.size()) {
        throw ValidationError(label_file.string() + ": " + std::to_string(scan.labels.size()) +
                              " labels for " + std::to_string(scan.points.size()) + " points in " +
                              point_file.string());
    }
    return scan;
}

void write_scan(const LabeledScan &scan, const std::filesystem::path &point_file,
                const std::filesystem::path &label_file) {
    scan.validate();
    write_file_bytes(point_file, encode_points(scan.points));
    write_file_bytes(label_file, encode_labels(scan.labels));
}

}  // namespace lidarforge
