#include "lidarforge/forge.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include <json.hpp>

#include "lidarforge/error.hpp"
#include "lidarforge/fingerprint.hpp"

namespace lidarforge {

using nlohmann::json;

std::size_t InstanceDatabase::record_count() const {
    std::size_t n = 0;
    for (const auto &[id, c] : categories) { n += c.records.size(); }
    return n;
}

std::vector<RayHit> cast_grid(const MeshIntersector &mesh, const Vec3 &center, const EmissionGrid &grid) {
    std::vector<RayHit> hits;
    for (std::size_t i = 0; i < grid.rays.size(); ++i) {
        if (const auto hit = mesh.intersect(center, grid.rays[i].direction)) { hits.push_back({i, *hit}); }
    }
    return hits;
}

std::optional<InstanceRecord> simulate_instance(const TriangleMesh &mesh, const RigidPose &pose, const LidarSpec &spec,
                                                const EmissionGrid &grid, const SimulateOptions &options) {
    TriangleMesh posed = transform_mesh(mesh, pose);
    if (posed.aabb().contains(spec.center)) {
        throw ValidationError("posed mesh bounding box contains the sensor center; re-sample the placement");
    }
    InstanceRecord record;
    record.category = options.category;
    record.pose = pose;
    record.bounds = posed.aabb();
    record.footprint = Footprint::of(posed.aabb());
    record.source_mesh = options.source_mesh;
    record.range = norm(posed.centroid() - spec.center);

    const MeshIntersector intersector(std::move(posed));
    const auto hits = options.use_window
                          ? cast_grid(intersector, spec.center,
                                      window_subgrid(grid, mesh_angular_window(intersector.mesh(), spec.center)))
                          : cast_grid(intersector, spec.center, grid);
    if (hits.empty()) { return std::nullopt; }
    record.points.reserve(hits.size());
    for (const auto &h : hits) { record.points.push_back({h.hit.point, options.intensity}); }
    return record;
}

void ForgePolicy::validate() const {
    for (const auto &c : categories) {
        const std::string where = "forge.categories." + (c.name.empty() ? std::to_string(c.id) : c.name);
        if (!(c.scale_min > 0.0) || !(c.scale_max >= c.scale_min)) {
            throw ValidationError(where + ".scale: expected 0 < min <= max");
        }
        if (!(c.intensity >= 0.0F && c.intensity <= 1.0F)) {
            throw ValidationError(where + ".intensity: expected a value in [0, 1]");
        }
    }
    if (!(intensity_noise >= 0.0F)) { throw ValidationError("forge.intensity_noise: must be >= 0"); }
    if (!(road_band_half_width > 0.0)) { throw ValidationError("forge.road_band_half_width_m: must be > 0"); }
}

std::string forge_fingerprint(const LidarSpec &spec, const ForgePolicy &policy, const SpatialHistogram &hist,
                              std::uint64_t seed) {
    json j;
    j["sensor"] = {{"center", {spec.center.x, spec.center.y, spec.center.z}},
                   {"azimuth_fov", spec.azimuth_fov},
                   {"azimuth_res", spec.azimuth_res},
                   {"elevation_min", spec.elevation_min},
                   {"elevation_max", spec.elevation_max},
                   {"elevation_res", spec.elevation_res},
                   {"jitter_sigma", spec.jitter_sigma}};
    json cats = json::array();
    for (const auto &c : policy.categories) {
        cats.push_back({{"id", c.id},
                        {"name", c.name},
                        {"scale", {c.scale_min, c.scale_max}},
                        {"records", c.records},
                        {"intensity", c.intensity}});
    }
    j["forge"] = {{"categories", cats},
                  {"intensity_noise", policy.intensity_noise},
                  {"retry_cap", policy.retry_cap},
                  {"road_band_fallback", policy.road_band_fallback},
                  {"road_band_half_width", policy.road_band_half_width}};
    j["histogram_sha256"] = sha256_hex(histogram_to_json(hist));
    j["seed"] = seed;
    return sha256_hex(j.dump());
}

std::mt19937_64 record_stream(std::uint64_t seed, std::uint16_t category, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xFFFFFFFFU), static_cast<std::uint32_t>(seed >> 32U),
                      static_cast<std::uint32_t>(category), static_cast<std::uint32_t>(index & 0xFFFFFFFFU),
                      static_cast<std::uint32_t>(index >> 32U)};
    return std::mt19937_64(seq);
}

namespace {

struct Task {
    const CategoryForgeConfig *category;
    std::uint64_t index;
};

struct TaskResult {
    std::optional<InstanceRecord> record;
    std::uint64_t attempts = 0;
    std::exception_ptr error;
};

TaskResult run_task(const Task &task, const std::vector<NamedMesh> &meshes, const SpatialHistogram &hist,
                    const LidarSpec &spec, const ForgePolicy &policy, std::uint64_t seed,
                    const EmissionGrid *shared_grid) {
    const CategoryForgeConfig &cat = *task.category;
    std::mt19937_64 rng = record_stream(seed, cat.id, task.index);
    TaskResult result;
    for (std::size_t attempt = 0; attempt <= policy.retry_cap; ++attempt) {
        ++result.attempts;
        const PlacementSample place = sample_placement(hist, cat.id, rng);
        std::uniform_int_distribution<std::size_t> pick_mesh(0, meshes.size() - 1);
        const NamedMesh &named = meshes[pick_mesh(rng)];
        std::uniform_real_distribution<double> yaw_dist(0.0, 2.0 * std::numbers::pi);
        const double yaw = yaw_dist(rng);
        const bool flip = std::bernoulli_distribution(0.5)(rng);
        std::uniform_real_distribution<double> scale_dist(cat.scale_min, cat.scale_max);
        const double scale = cat.scale_min == cat.scale_max ? cat.scale_min : scale_dist(rng);
        const std::uint64_t grid_seed = rng();

        // Centroid to the sampled (x, y), lowest point on the ground plane.
        const RigidPose unplaced = RigidPose::make(yaw, flip, scale, {});
        const Aabb box = transform_mesh(named.mesh, unplaced).aabb();
        const Vec3 centroid = named.mesh.centroid();
        const RigidPose pose =
            RigidPose::make(yaw, flip, scale, {place.x - centroid.x, place.y - centroid.y, -box.min.z});

        std::optional<EmissionGrid> own_grid;
        if (shared_grid == nullptr) {
            LidarSpec jittered = spec;
            jittered.seed = grid_seed;
            own_grid = build_emission_grid(jittered);
        }
        const EmissionGrid &grid = shared_grid != nullptr ? *shared_grid : *own_grid;

        SimulateOptions options;
        options.intensity = cat.intensity;
        options.source_mesh = named.id;
        options.category = cat.id;
        std::optional<InstanceRecord> record;
        try {
            record = simulate_instance(named.mesh, pose, spec, grid, options);
        } catch (const ValidationError &) {
            record.reset();  // sensor inside the object: draw again
        }
        if (!record) { continue; }
        if (policy.intensity_noise > 0.0F) {
            std::uniform_real_distribution<float> noise(-policy.intensity_noise, policy.intensity_noise);
            for (auto &p : record->points) { p.intensity = std::clamp(p.intensity + noise(rng), 0.0F, 1.0F); }
        }
        result.record = std::move(record);
        return result;
    }
    throw RuntimeError("category " + std::to_string(cat.id) + " (" + cat.name + "): record " +
                       std::to_string(task.index) + " found no visible placement in " +
                       std::to_string(policy.retry_cap + 1) + " attempts; the placement prior may be unreachable");
}

}  // namespace

InstanceDatabase build_database(const std::map<std::uint16_t, std::vector<NamedMesh>> &meshes,
                                const SpatialHistogram &hist, const LidarSpec &spec, const ForgePolicy &policy,
                                std::uint64_t seed) {
    spec.validate();
    policy.validate();

    SpatialHistogram prior = hist;
    std::vector<Task> tasks;
    InstanceDatabase db;
    db.seed = seed;
    db.config_fingerprint = forge_fingerprint(spec, policy, hist, seed);
    for (const auto &cat : policy.categories) {
        db.categories[cat.id].name = cat.name;
        if (cat.records == 0) { continue; }
        const auto m = meshes.find(cat.id);
        if (m == meshes.end() || m->second.empty()) {
            throw ValidationError("forge.categories." + cat.name + ": no meshes for category " + std::to_string(cat.id));
        }
        if (prior.total(cat.id) == 0) {
            if (!policy.road_band_fallback) {
                throw ValidationError("forge.categories." + cat.name + ": spatial histogram row for category " +
                                      std::to_string(cat.id) +
                                      " is empty; set forge.road_band_fallback to use a uniform road-band prior");
            }
            prior.categories[cat.id] = make_road_band_row(prior.grid, cat.name, policy.road_band_half_width);
        }
        for (std::uint64_t i = 0; i < cat.records; ++i) { tasks.push_back({&cat, i}); }
    }

    std::optional<EmissionGrid> shared_grid;
    if (spec.jitter_sigma == 0.0) { shared_grid = build_emission_grid(spec); }
    const EmissionGrid *shared = shared_grid ? &*shared_grid : nullptr;

    std::vector<TaskResult> results(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                results[i] = run_task(tasks[i], meshes.at(tasks[i].category->id), prior, spec, policy, seed, shared);
            } catch (...) {
                results[i].error = std::current_exception();
            }
        }
    };
    const std::size_t jobs = std::max<std::size_t>(1, std::min(policy.jobs, tasks.size()));
    std::vector<std::thread> pool;
    for (std::size_t j = 1; j < jobs; ++j) { pool.emplace_back(worker); }
    worker();
    for (auto &t : pool) { t.join(); }

    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (results[i].error) { std::rethrow_exception(results[i].error); }
        auto &bucket = db.categories[tasks[i].category->id];
        bucket.attempts += results[i].attempts;
        bucket.retries += results[i].attempts - 1;
        bucket.records.push_back(std::move(*results[i].record));
    }
    return db;
}

}  // namespace lidarforge
