#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace lidarforge {

struct PointXYZI {
    float x = 0.0F;
    float y = 0.0F;
    float z = 0.0F;
    float intensity = 0.0F;
};

// SemanticKITTI label word: semantic class in the low 16 bits, instance id in
// the high 16 bits.
constexpr std::uint16_t semantic_of(std::uint32_t label) { return static_cast<std::uint16_t>(label & 0xFFFFU); }
constexpr std::uint16_t instance_of(std::uint32_t label) { return static_cast<std::uint16_t>(label >> 16U); }
constexpr std::uint32_t make_label(std::uint16_t semantic, std::uint16_t instance) {
    return (static_cast<std::uint32_t>(instance) << 16U) | semantic;
}

/// One LiDAR frame with a label word per point.
struct LabeledScan {
    std::string frame_id;
    std::vector<PointXYZI> points;
    std::vector<std::uint32_t> labels;

    /// Throws ValidationError on length mismatch or non-finite coordinates.
    void validate() const;
    [[nodiscard]] std::size_t size() const { return points.size(); }
};

/// Parses little-endian float32 quadruples. Throws ValidationError with the
/// byte offset of the problem.
std::vector<PointXYZI> parse_points(std::span<const std::uint8_t> bytes, const std::string &source = "<memory>");
std::vector<std::uint32_t> parse_labels(std::span<const std::uint8_t> bytes, const std::string &source = "<memory>");
std::vector<std::uint8_t> encode_points(std::span<const PointXYZI> points);
std::vector<std::uint8_t> encode_labels(std::span<const std::uint32_t> labels);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path &path);
void write_file_bytes(const std::filesystem::path &path, std::span<const std::uint8_t> bytes);

std::vector<PointXYZI> read_points(const std::filesystem::path &path);
std::vector<std::uint32_t> read_labels(const std::filesystem::path &path);

/// Reads a `.bin`/`.label` pair; the frame id is the point file's stem.
LabeledScan read_scan(const std::filesystem::path &point_file, const std::filesystem::path &label_file);
void write_scan(const LabeledScan &scan, const std::filesystem::path &point_file,
                const std::filesystem::path &label_file);

}  // namespace lidarforge
