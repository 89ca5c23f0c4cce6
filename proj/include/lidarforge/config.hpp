#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lidarforge/augment.hpp"
#include "lidarforge/emission.hpp"
#include "lidarforge/forge.hpp"
#include "lidarforge/mesh_io.hpp"
#include "lidarforge/spatial_histogram.hpp"

namespace lidarforge {

inline constexpr const char *kVersion = "0.1.0";

struct ForgeCategoryConfig {
    CategoryForgeConfig category;
    std::vector<std::filesystem::path> meshes;
};

/// Evaluation class: one output class fed by one or more raw semantic ids.
struct EvalClass {
    std::string name;
    std::vector<std::uint16_t> labels;
};

/// The 19 SemanticKITTI evaluation classes with their raw-id mapping.
std::vector<EvalClass> semantic_kitti_classes();

struct IoConfig {
    std::filesystem::path scans_dir;
    std::filesystem::path labels_dir;
    std::filesystem::path histogram;
    std::filesystem::path database;
    std::filesystem::path output;
    std::filesystem::path pred_dir;
    std::filesystem::path gt_dir;
};

/// Everything a pipeline run needs. Angles in the JSON file are degrees.
struct PipelineConfig {
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    LidarSpec sensor;
    std::optional<std::uint64_t> sensor_seed;
    GridConfig grid;
    double cluster_distance = 0.5;
    std::vector<CategoryInfo> stats_categories;  // empty: use forge categories
    std::vector<ForgeCategoryConfig> forge_categories;
    ForgePolicy forge;
    UpAxis mesh_up_axis = UpAxis::z;
    AugmentPolicy augment;
    std::vector<EvalClass> eval_classes = semantic_kitti_classes();
    IoConfig io;

    /// Canonical JSON (sorted keys, radians converted back to degrees).
    [[nodiscard]] nlohmann::json to_json() const;
    [[nodiscard]] std::string fingerprint() const;
    [[nodiscard]] std::vector<CategoryInfo> histogram_categories() const;
    [[nodiscard]] ForgePolicy forge_policy() const;
    [[nodiscard]] AugmentPolicy augment_policy() const;
    [[nodiscard]] LidarSpec sensor_spec() const;
};

/// Parses and validates. Errors are ValidationError with a field path such as
/// "sensor.elevation_res_deg: must be > 0". Relative mesh and io paths resolve
/// against `base_dir`.
PipelineConfig parse_config(const nlohmann::json &j, const std::filesystem::path &base_dir = {});
PipelineConfig load_config(const std::filesystem::path &path);

}  // namespace lidarforge
