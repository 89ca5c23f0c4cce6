#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>

#include "lidarforge/geometry.hpp"

namespace lidarforge {

enum class UpAxis { z, y };

struct MeshLoadOptions {
    /// Meshes authored y-up are rotated so that +y becomes +z.
    UpAxis up_axis = UpAxis::z;
};

struct LoadedMesh {
    TriangleMesh mesh;
    std::size_t dropped_degenerate = 0;
};

/// Wavefront OBJ: `v` and `f` records only; polygons are fan-triangulated,
/// texture/normal indices and materials ignored, negative indices resolved.
LoadedMesh load_obj(std::istream &in, const MeshLoadOptions &options = {}, const std::string &source = "<obj>");

/// PLY (ascii, binary little- or big-endian) with a vertex element carrying
/// x/y/z and a face element with a `vertex_indices` (or `vertex_index`) list.
LoadedMesh load_ply(std::istream &in, const MeshLoadOptions &options = {}, const std::string &source = "<ply>");

/// Dispatches on the file extension (.obj / .ply, case-insensitive).
LoadedMesh load_mesh(const std::filesystem::path &path, const MeshLoadOptions &options = {});

}  // namespace lidarforge
