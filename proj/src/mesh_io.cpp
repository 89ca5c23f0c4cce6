#include "lidarforge/mesh_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include "lidarforge/error.hpp"

namespace lidarforge {

namespace {

Vec3 to_z_up(const Vec3 &v, UpAxis up) { return up == UpAxis::y ? Vec3{v.x, -v.z, v.y} : v; }

LoadedMesh assemble(const std::vector<Vec3> &vertices, const std::vector<std::array<std::size_t, 3>> &triangles,
                    const MeshLoadOptions &options, const std::string &source) {
    std::vector<TriangleFace> faces;
    faces.reserve(triangles.size());
    std::size_t dropped = 0;
    for (const auto &tri : triangles) {
        auto face = TriangleFace::make(to_z_up(vertices[tri[0]], options.up_axis),
                                       to_z_up(vertices[tri[1]], options.up_axis),
                                       to_z_up(vertices[tri[2]], options.up_axis));
        if (face) {
            faces.push_back(*face);
        } else {
            ++dropped;
        }
    }
    if (faces.empty()) { throw ValidationError(source + ": mesh has no non-degenerate faces"); }
    return {TriangleMesh(std::move(faces)), dropped};
}

void fan(const std::vector<std::size_t> &polygon, std::vector<std::array<std::size_t, 3>> &triangles) {
    for (std::size_t k = 1; k + 1 < polygon.size(); ++k) {
        triangles.push_back({polygon[0], polygon[k], polygon[k + 1]});
    }
}

double parse_double(const std::string &token, const std::string &where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (used != token.size()) { throw std::invalid_argument(token); }
        return v;
    } catch (const std::exception &) {
        throw ValidationError(where + ": malformed number '" + token + "'");
    }
}

long long parse_integer(std::string_view token, const std::string &where) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw ValidationError(where + ": malformed index '" + std::string(token) + "'");
    }
    return v;
}

// ---------------------------------------------------------------------------
// PLY

enum class PlyType { int8, uint8, int16, uint16, int32, uint32, float32, float64 };

std::optional<PlyType> ply_type(const std::string &name) {
    if (name == "char" || name == "int8") { return PlyType::int8; }
    if (name == "uchar" || name == "uint8") { return PlyType::uint8; }
    if (name == "short" || name == "int16") { return PlyType::int16; }
    if (name == "ushort" || name == "uint16") { return PlyType::uint16; }
    if (name == "int" || name == "int32") { return PlyType::int32; }
    if (name == "uint" || name == "uint32") { return PlyType::uint32; }
    if (name == "float" || name == "float32") { return PlyType::float32; }
    if (name == "double" || name == "float64") { return PlyType::float64; }
    return std::nullopt;
}

std::size_t ply_size(PlyType t) {
    switch (t) {
        case PlyType::int8:
        case PlyType::uint8: return 1;
        case PlyType::int16:
        case PlyType::uint16: return 2;
        case PlyType::int32:
        case PlyType::uint32:
        case PlyType::float32: return 4;
        case PlyType::float64: return 8;
    }
    return 0;
}

struct PlyProperty {
    std::string name;
    PlyType type = PlyType::float32;
    bool is_list = false;
    PlyType count_type = PlyType::uint8;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> properties;
};

enum class PlyFormat { ascii, binary_le, binary_be };

class PlyReader {
public:
    PlyReader(std::istream &in, PlyFormat format, std::string source)
        : in_(in), format_(format), source_(std::move(source)) {}

    double read(PlyType type) {
        if (format_ == PlyFormat::ascii) {
            std::string token;
            if (!(in_ >> token)) { throw ValidationError(source_ + ": unexpected end of ascii body"); }
            return parse_double(token, source_);
        }
        std::array<unsigned char, 8> raw{};
        const std::size_t n = ply_size(type);
        in_.read(reinterpret_cast<char *>(raw.data()), static_cast<std::streamsize>(n));
        if (!in_) { throw ValidationError(source_ + ": unexpected end of binary body"); }
        const bool swap = (format_ == PlyFormat::binary_le) != (std::endian::native == std::endian::little);
        if (swap) { std::reverse(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(n)); }
        switch (type) {
            case PlyType::int8: return static_cast<double>(std::bit_cast<std::int8_t>(raw[0]));
            case PlyType::uint8: return static_cast<double>(raw[0]);
            case PlyType::int16: return load<std::int16_t>(raw);
            case PlyType::uint16: return load<std::uint16_t>(raw);
            case PlyType::int32: return load<std::int32_t>(raw);
            case PlyType::uint32: return load<std::uint32_t>(raw);
            case PlyType::float32: return load<float>(raw);
            case PlyType::float64: return load<double>(raw);
        }
        return 0.0;
    }

private:
    template <typename T>
    static double load(const std::array<unsigned char, 8> &raw) {
        T v;
        std::memcpy(&v, raw.data(), sizeof(T));
        return static_cast<double>(v);
    }

    std::istream &in_;
    PlyFormat format_;
    std::string source_;
};

}  // namespace

LoadedMesh load_obj(std::istream &in, const MeshLoadOptions &options, const std::string &source) {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::size_t, 3>> triangles;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::size_t> polygon;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) { line.resize(hash); }
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) { continue; }
        const std::string where = source + ":" + std::to_string(line_no);
        if (tag == "v") {
            std::string a, b, c;
            if (!(ls >> a >> b >> c)) { throw ValidationError(where + ": vertex needs three coordinates"); }
            vertices.push_back({parse_double(a, where), parse_double(b, where), parse_double(c, where)});
        } else if (tag == "f") {
            polygon.clear();
            std::string token;
            while (ls >> token) {
                const std::string_view head = std::string_view(token).substr(0, token.find('/'));
                const long long idx = parse_integer(head, where);
                const auto count = static_cast<long long>(vertices.size());
                const long long resolved = idx > 0 ? idx - 1 : count + idx;
                if (idx == 0 || resolved < 0 || resolved >= count) {
                    throw ValidationError(where + ": vertex index " + std::to_string(idx) + " out of range");
                }
                polygon.push_back(static_cast<std::size_t>(resolved));
            }
            if (polygon.size() < 3) { throw ValidationError(where + ": face needs at least three vertices"); }
            fan(polygon, triangles);
        }
    }
    if (triangles.empty()) { throw ValidationError(source + ": no faces found"); }
    return assemble(vertices, triangles, options, source);
}

LoadedMesh load_ply(std::istream &in, const MeshLoadOptions &options, const std::string &source) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("ply", 0) != 0) { throw ValidationError(source + ": missing 'ply' magic"); }

    std::optional<PlyFormat> format;
    std::vector<PlyElement> elements;
    while (true) {
        if (!std::getline(in, line)) { throw ValidationError(source + ": header not terminated"); }
        if (!line.empty() && line.back() == '\r') { line.pop_back(); }
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "end_header") { break; }
        if (key == "format") {
            std::string f;
            ls >> f;
            if (f == "ascii") {
                format = PlyFormat::ascii;
            } else if (f == "binary_little_endian") {
                format = PlyFormat::binary_le;
            } else if (f == "binary_big_endian") {
                format = PlyFormat::binary_be;
            } else {
                throw ValidationError(source + ": unsupported format '" + f + "'");
            }
        } else if (key == "element") {
            PlyElement e;
            ls >> e.name >> e.count;
            if (!ls) { throw ValidationError(source + ": malformed element line '" + line + "'"); }
            elements.push_back(e);
        } else if (key == "property") {
            if (elements.empty()) { throw ValidationError(source + ": property before any element"); }
            PlyProperty p;
            std::string type;
            ls >> type;
            if (type == "list") {
                std::string count_type, item_type;
                ls >> count_type >> item_type >> p.name;
                const auto ct = ply_type(count_type);
                const auto it = ply_type(item_type);
                if (!ct || !it) { throw ValidationError(source + ": unknown list type in '" + line + "'"); }
                p.is_list = true;
                p.count_type = *ct;
                p.type = *it;
            } else {
                const auto t = ply_type(type);
                if (!t) { throw ValidationError(source + ": unknown property type '" + type + "'"); }
                p.type = *t;
                ls >> p.name;
            }
            elements.back().properties.push_back(p);
        }
    }
    if (!format) { throw ValidationError(source + ": missing format line"); }

    PlyReader reader(in, *format, source);
    std::vector<Vec3> vertices;
    std::vector<std::array<std::size_t, 3>> triangles;
    std::vector<std::size_t> polygon;
    for (const auto &e : elements) {
        if (e.name == "vertex") {
            int ix = -1, iy = -1, iz = -1;
            for (std::size_t k = 0; k < e.properties.size(); ++k) {
                const auto &name = e.properties[k].name;
                if (name == "x") { ix = static_cast<int>(k); }
                if (name == "y") { iy = static_cast<int>(k); }
                if (name == "z") { iz = static_cast<int>(k); }
            }
            if (ix < 0 || iy < 0 || iz < 0) { throw ValidationError(source + ": vertex element lacks x/y/z"); }
            vertices.reserve(e.count);
            std::vector<double> values(e.properties.size());
            for (std::size_t i = 0; i < e.count; ++i) {
                for (std::size_t k = 0; k < e.properties.size(); ++k) {
                    const auto &p = e.properties[k];
                    if (p.is_list) {
                        const auto n = static_cast<std::size_t>(reader.read(p.count_type));
                        for (std::size_t j = 0; j < n; ++j) { reader.read(p.type); }
                    } else {
                        values[k] = reader.read(p.type);
                    }
                }
                vertices.push_back({values[static_cast<std::size_t>(ix)], values[static_cast<std::size_t>(iy)],
                                    values[static_cast<std::size_t>(iz)]});
            }
        } else {
            const bool is_face = e.name == "face";
            for (std::size_t i = 0; i < e.count; ++i) {
                for (const auto &p : e.properties) {
                    if (!p.is_list) {
                        reader.read(p.type);
                        continue;
                    }
                    const auto n = static_cast<std::size_t>(reader.read(p.count_type));
                    const bool indices = is_face && (p.name == "vertex_indices" || p.name == "vertex_index");
                    polygon.clear();
                    for (std::size_t j = 0; j < n; ++j) {
                        const double v = reader.read(p.type);
                        if (!indices) { continue; }
                        if (v < 0 || v >= static_cast<double>(vertices.size())) {
                            throw ValidationError(source + ": face " + std::to_string(i) + " references vertex " +
                                                  std::to_string(static_cast<long long>(v)) + " out of range");
                        }
                        polygon.push_back(static_cast<std::size_t>(v));
                    }
                    if (indices) {
                        if (polygon.size() < 3) {
                            throw ValidationError(source + ": face " + std::to_string(i) + " has fewer than 3 vertices");
                        }
                        fan(polygon, triangles);
                    }
                }
            }
        }
    }
    if (triangles.empty()) { throw ValidationError(source + ": no faces found"); }
    return assemble(vertices, triangles, options, source);
}

LoadedMesh load_mesh(const std::filesystem::path &path, const MeshLoadOptions &options) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    std::ifstream in(path, std::ios::binary);
    if (!in) { throw ValidationError("cannot open mesh " + path.string()); }
    if (ext == ".obj") { return load_obj(in, options, path.string()); }
    if (ext == ".ply") { return load_ply(in, options, path.string()); }
    throw ValidationError(path.string() + ": unsupported mesh extension '" + ext + "' (expected .obj or .ply)");
}

}  // namespace lidarforge
