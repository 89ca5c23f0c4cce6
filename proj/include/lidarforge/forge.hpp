#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lidarforge/bvh.hpp"
#include "lidarforge/emission.hpp"
#include "lidarforge/geometry.hpp"
#include "lidarforge/spatial_histogram.hpp"

namespace lidarforge {

/// Axis-aligned ground-plane rectangle (meters).
struct Footprint {
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;

    static Footprint of(const Aabb &box) { return {box.min.x, box.max.x, box.min.y, box.max.y}; }
    [[nodiscard]] Footprint inflated(double margin) const {
        return {x_min - margin, x_max + margin, y_min - margin, y_max + margin};
    }
    /// Closed-rectangle overlap (touching counts).
    [[nodiscard]] bool overlaps(const Footprint &o) const {
        return x_min <= o.x_max && o.x_min <= x_max && y_min <= o.y_max && o.y_min <= y_max;
    }
    bool operator==(const Footprint &) const = default;
};

struct SimPoint {
    Vec3 position;
    float intensity = 0.0F;
};

struct InstanceRecord {
    std::uint16_t category = 0;
    std::vector<SimPoint> points;
    RigidPose pose;
    Aabb bounds;  // posed mesh AABB
    Footprint footprint;
    std::string source_mesh;
    double range = 0.0;  // sensor center to posed centroid
};

/// One emission ray's first hit.
struct RayHit {
    std::size_t ray_index = 0;  // index into the cast grid's rays
    MeshHit hit;
};

/// Casts every ray of `grid` from `center`; hits come back in grid order.
std::vector<RayHit> cast_grid(const MeshIntersector &mesh, const Vec3 &center, const EmissionGrid &grid);

struct SimulateOptions {
    /// Restrict casting to the mesh's angular window. Disabling it casts the
    /// whole grid; the output is identical either way.
    bool use_window = true;
    float intensity = 0.2F;
    std::string source_mesh;
    std::uint16_t category = 0;
};

/// Poses the mesh and collects the nearest hit of each emission ray.
/// Returns nullopt when no ray hits. Throws ValidationError when the posed
/// mesh's bounding box contains the sensor center.
std::optional<InstanceRecord> simulate_instance(const TriangleMesh &mesh, const RigidPose &pose, const LidarSpec &spec,
                                                const EmissionGrid &grid, const SimulateOptions &options = {});

struct NamedMesh {
    std::string id;
    TriangleMesh mesh;
};

struct CategoryForgeConfig {
    std::uint16_t id = 0;
    std::string name;
    double scale_min = 1.0;
    double scale_max = 1.0;
    std::size_t records = 0;
    float intensity = 0.2F;
};

struct ForgePolicy {
    std::vector<CategoryForgeConfig> categories;
    /// Half-width of uniform noise added to each point's intensity.
    float intensity_noise = 0.0F;
    std::size_t retry_cap = 10;
    std::size_t jobs = 1;
    /// Substitute a uniform road-band prior for categories whose histogram row is all zero.
    bool road_band_fallback = false;
    double road_band_half_width = 10.0;

    void validate() const;
};

struct CategoryRecords {
    std::string name;
    std::vector<InstanceRecord> records;
    std::uint64_t attempts = 0;
    std::uint64_t retries = 0;
};

struct InstanceDatabase {
    std::uint64_t seed = 0;
    std::string config_fingerprint;
    std::map<std::uint16_t, CategoryRecords> categories;

    [[nodiscard]] std::size_t record_count() const;
};

/// Canonical hash over everything that determines a database's content.
std::string forge_fingerprint(const LidarSpec &spec, const ForgePolicy &policy, const SpatialHistogram &hist,
                              std::uint64_t seed);

/// Random stream for one record, derived from (seed, category, index) only.
std::mt19937_64 record_stream(std::uint64_t seed, std::uint16_t category, std::uint64_t index);

/// Builds every requested record. Output depends only on the inputs and the
/// seed, never on policy.jobs. Throws RuntimeError naming the category when a
/// record exhausts its retries.
InstanceDatabase build_database(const std::map<std::uint16_t, std::vector<NamedMesh>> &meshes,
                                const SpatialHistogram &hist, const LidarSpec &spec, const ForgePolicy &policy,
                                std::uint64_t seed);

/// Writes `manifest.json` and `<category>/<index>.bin` (float32 x, y, z, intensity).
void save_database(const InstanceDatabase &db, const std::filesystem::path &dir);
InstanceDatabase load_database(const std::filesystem::path &dir);
std::string database_manifest_json(const InstanceDatabase &db);

}  // namespace lidarforge
