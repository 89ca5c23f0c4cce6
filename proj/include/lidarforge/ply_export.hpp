#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lidarforge/scan.hpp"

namespace lidarforge {

/// RGB display color for a SemanticKITTI semantic id (gray for unknown ids).
std::array<std::uint8_t, 3> category_color(std::uint16_t semantic);

/// Binary little-endian PLY: float x, y, z and uchar red, green, blue per
/// vertex, colored by each point's semantic label.
std::vector<std::uint8_t> encode_ply(std::span<const PointXYZI> points, std::span<const std::uint32_t> labels);
void write_ply(const std::filesystem::path &path, std::span<const PointXYZI> points,
               std::span<const std::uint32_t> labels);

}  // namespace lidarforge
