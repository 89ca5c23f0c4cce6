#include "lidarforge/ply_export.hpp"

#include <bit>
#include <map>
#include <string>

#include "lidarforge/error.hpp"

namespace lidarforge {

std::array<std::uint8_t, 3> category_color(std::uint16_t semantic) {
    // SemanticKITTI palette, RGB.
    static const std::map<std::uint16_t, std::array<std::uint8_t, 3>> palette = {
        {0, {0, 0, 0}},         {1, {255, 0, 0}},       {10, {100, 150, 245}}, {11, {100, 230, 245}},
        {13, {100, 80, 250}},   {15, {30, 60, 150}},    {16, {0, 0, 255}},     {18, {80, 30, 180}},
        {20, {0, 0, 255}},      {30, {255, 30, 30}},    {31, {255, 40, 200}},  {32, {150, 30, 90}},
        {40, {255, 0, 255}},    {44, {255, 150, 255}},  {48, {75, 0, 75}},     {49, {175, 0, 75}},
        {50, {255, 200, 0}},    {51, {255, 120, 50}},   {52, {255, 150, 0}},   {60, {150, 255, 170}},
        {70, {0, 175, 0}},      {71, {135, 60, 0}},     {72, {150, 240, 80}},  {80, {255, 240, 150}},
        {81, {255, 0, 0}},      {99, {50, 255, 255}},   {252, {100, 150, 245}}, {253, {255, 40, 200}},
        {254, {255, 30, 30}},   {255, {150, 30, 90}},   {256, {0, 0, 255}},    {257, {100, 80, 250}},
        {258, {80, 30, 180}},   {259, {0, 0, 255}},
    };
    const auto it = palette.find(semantic);
    if (it != palette.end()) { return it->second; }
    return {128, 128, 128};
}

std::vector<std::uint8_t> encode_ply(std::span<const PointXYZI> points, std::span<const std::uint32_t> labels) {
    if (points.size() != labels.size()) { throw ValidationError("PLY export: points and labels differ in length"); }
    const std::string header = "ply\nformat binary_little_endian 1.0\nelement vertex " + std::to_string(points.size()) +
                               "\nproperty float x\nproperty float y\nproperty float z\n"
                               "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(header.size() + points.size() * 15);
    auto put_float = [&](float f) {
        const auto bits = std::bit_cast<std::uint32_t>(f);
        for (unsigned k = 0; k < 4; ++k) { out.push_back(static_cast<std::uint8_t>((bits >> (8U * k)) & 0xFFU)); }
    };
    for (std::size_t i = 0; i < points.size(); ++i) {
        put_float(points[i].x);
        put_float(points[i].y);
        put_float(points[i].z);
        const auto rgb = category_color(semantic_of(labels[i]));
        out.insert(out.end(), rgb.begin(), rgb.end());
    }
    return out;
}

void write_ply(const std::filesystem::path &path, std::span<const PointXYZI> points,
               std::span<const std::uint32_t> labels) {
    write_file_bytes(path, encode_ply(points, labels));
}

}  // namespace lidarforge
