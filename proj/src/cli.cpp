#include "lidarforge/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lidarforge/config.hpp"
#include "lidarforge/emission.hpp"
#include "lidarforge/error.hpp"
#include "lidarforge/fingerprint.hpp"
#include "lidarforge/forge.hpp"
#include "lidarforge/mesh_io.hpp"
#include "lidarforge/pipeline.hpp"
#include "lidarforge/ply_export.hpp"
#include "lidarforge/scan.hpp"

namespace lidarforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    bool force = false;
};

PipelineConfig resolve_config(const GlobalOptions &g) {
    PipelineConfig cfg = g.config.empty() ? parse_config(json::object()) : load_config(g.config);
    if (g.seed) { cfg.seed = *g.seed; }
    if (g.jobs) {
        if (*g.jobs == 0) { throw ValidationError("--jobs: must be >= 1"); }
        cfg.jobs = *g.jobs;
    }
    return cfg;
}

fs::path pick(const std::string &flag_value, const fs::path &config_value, const char *name) {
    if (!flag_value.empty()) { return flag_value; }
    if (!config_value.empty()) { return config_value; }
    throw ValidationError(std::string(name) + ": no path given on the command line or in the config");
}

void require_exists(const fs::path &p, const char *what) {
    if (!fs::exists(p)) { throw ValidationError(std::string(what) + " does not exist: " + p.string()); }
}

void write_text(const fs::path &path, const std::string &text) {
    write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
}

/// Deterministic record of what produced an output: no clock, no job count.
void write_manifest(const fs::path &path, const std::string &command, const PipelineConfig &cfg,
                    const json &extra = json::object()) {
    json j;
    j["tool"] = "lidarforge";
    j["version"] = kVersion;
    j["command"] = command;
    j["seed"] = cfg.seed;
    j["config_fingerprint"] = cfg.fingerprint();
    j["config"] = cfg.to_json();
    j["build"] = {{"compiler", __VERSION__},
                  {"cxx_standard", __cplusplus},
                  {"json_library", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                       std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                       std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                  {"hash_library", hash_library_version()}};
    for (const auto &[k, v] : extra.items()) { j[k] = v; }
    write_text(path, j.dump(2) + "\n");
}

fs::path sidecar(const fs::path &file) { return fs::path(file.string() + ".manifest.json"); }

void guard_output(const fs::path &p, bool force) {
    if (!force && fs::exists(p)) {
        throw ValidationError("output exists: " + p.string() + " (use --force to overwrite)");
    }
}

std::vector<PointXYZI> to_points(const InstanceRecord &r) {
    std::vector<PointXYZI> pts;
    pts.reserve(r.points.size());
    for (const auto &p : r.points) {
        pts.push_back({static_cast<float>(p.position.x), static_cast<float>(p.position.y),
                       static_cast<float>(p.position.z), p.intensity});
    }
    return pts;
}

std::map<std::uint16_t, std::vector<NamedMesh>> load_forge_meshes(const PipelineConfig &cfg, std::ostream &err) {
    std::map<std::uint16_t, std::vector<NamedMesh>> meshes;
    for (const auto &fc : cfg.forge_categories) {
        auto &list = meshes[fc.category.id];
        for (const auto &path : fc.meshes) {
            require_exists(path, "mesh");
            auto loaded = load_mesh(path, {cfg.mesh_up_axis});
            if (loaded.dropped_degenerate > 0) {
                err << "warning: " << path.string() << ": dropped " << loaded.dropped_degenerate
                    << " degenerate faces\n";
            }
            list.push_back({path.filename().string(), std::move(loaded.mesh)});
        }
    }
    return meshes;
}

}  // namespace

int run_cli(int argc, char **argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"lidarforge: mesh-based LiDAR instance synthesis and scan augmentation"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--config", g.config, "Pipeline config JSON")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Override the config seed");
    app.add_option("--jobs", g.jobs, "Worker threads");
    app.add_flag("--force", g.force, "Overwrite or redo existing outputs");

    std::string scans, labels, output, csv_dir;
    auto *stats = app.add_subcommand("stats", "Accumulate the per-category spatial histogram");
    stats->add_option("--scans", scans, "Directory of .bin scans");
    stats->add_option("--labels", labels, "Directory of .label files");
    stats->add_option("--out", output, "Histogram JSON path");
    stats->add_option("--csv-dir", csv_dir, "Also write one CSV per category here");

    std::string histogram, database;
    auto *build = app.add_subcommand("build-db", "Build the offline instance database");
    build->add_option("--histogram", histogram, "Histogram JSON from `stats`");
    build->add_option("--out", database, "Database directory");

    std::string mesh;
    std::vector<double> position{10.0, 0.0, 0.0};
    double yaw_deg = 0.0;
    double scale = 1.0;
    bool flip = false;
    bool full_grid = false;
    std::uint16_t category = 0;
    auto *simulate = app.add_subcommand("simulate", "Simulate one posed mesh and write a PLY");
    simulate->add_option("--mesh", mesh, "OBJ or PLY mesh")->required()->check(CLI::ExistingFile);
    simulate->add_option("--position", position, "Posed centroid x y z")->expected(3)->capture_default_str();
    simulate->add_option("--yaw-deg", yaw_deg, "Yaw about +z in degrees");
    simulate->add_option("--scale", scale, "Uniform scale");
    simulate->add_flag("--flip", flip, "Mirror x about the centroid");
    simulate->add_flag("--full-grid", full_grid, "Cast every ray instead of the angular window");
    simulate->add_option("--category", category, "Semantic id used for coloring");
    simulate->add_option("--out", output, "PLY output path")->required();

    auto *augment = app.add_subcommand("augment", "Insert database records into every scan of a directory");
    augment->add_option("--scans", scans, "Directory of .bin scans");
    augment->add_option("--labels", labels, "Directory of .label files");
    augment->add_option("--db", database, "Database directory");
    augment->add_option("--out", output, "Output directory");

    std::string pred, gt, json_out;
    auto *eval = app.add_subcommand("eval", "Per-class IoU of predicted labels against ground truth");
    eval->add_option("--pred", pred, "Directory of predicted .label files");
    eval->add_option("--gt", gt, "Directory of ground-truth .label files");
    eval->add_option("--out", json_out, "Write the JSON report here");

    std::string scan_file, label_file;
    std::size_t index = 0;
    auto *export_ply = app.add_subcommand("export-ply", "Render a database record or a labeled scan as PLY");
    export_ply->add_option("--db", database, "Database directory");
    export_ply->add_option("--category", category, "Record category");
    export_ply->add_option("--index", index, "Record index within the category");
    export_ply->add_option("--scan", scan_file, "A .bin scan instead of a record");
    export_ply->add_option("--label", label_file, "Labels for --scan");
    export_ply->add_option("--out", output, "PLY output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        const PipelineConfig cfg = resolve_config(g);

        if (*stats) {
            const fs::path scans_dir = pick(scans, cfg.io.scans_dir, "--scans");
            const fs::path labels_dir = pick(labels, cfg.io.labels_dir, "--labels");
            const fs::path out_path = pick(output, cfg.io.histogram, "--out");
            require_exists(scans_dir, "scan directory");
            require_exists(labels_dir, "label directory");
            const auto categories = cfg.histogram_categories();
            if (categories.empty()) { throw ValidationError("categories: no categories configured"); }
            guard_output(out_path, g.force);
            HistogramDiagnostics diag;
            const auto h =
                histogram_from_directories(scans_dir, labels_dir, categories, cfg.grid, cfg.cluster_distance, &diag);
            for (const auto &w : diag.warnings) { err << "warning: " << w << "\n"; }
            save_histogram(h, out_path);
            if (!csv_dir.empty()) {
                for (const auto &[id, row] : h.categories) {
                    write_text(fs::path(csv_dir) / (std::to_string(id) + ".csv"), histogram_category_csv(h, id));
                }
            }
            json extra;
            for (const auto &[id, n] : diag.instances_seen) {
                extra["instances_seen"][std::to_string(id)] = n;
                extra["dropped_out_of_extent"][std::to_string(id)] = diag.dropped_out_of_extent[id];
            }
            write_manifest(sidecar(out_path), "stats", cfg, extra);
            for (const auto &[id, row] : h.categories) {
                out << id << " " << row.name << ": " << h.total(id) << " instances\n";
            }
            return 0;
        }

        if (*build) {
            const fs::path hist_path = pick(histogram, cfg.io.histogram, "--histogram");
            const fs::path db_dir = pick(database, cfg.io.database, "--out");
            require_exists(hist_path, "histogram");
            if (!g.force && fs::exists(db_dir / "manifest.json")) {
                throw ValidationError("database exists: " + db_dir.string() + " (use --force to rebuild)");
            }
            const auto h = load_histogram(hist_path);
            const auto meshes = load_forge_meshes(cfg, err);
            const auto db = build_database(meshes, h, cfg.sensor_spec(), cfg.forge_policy(), cfg.seed);
            save_database(db, db_dir);
            write_manifest(db_dir / "run_manifest.json", "build-db", cfg,
                           {{"database_fingerprint", db.config_fingerprint}});
            for (const auto &[id, cr] : db.categories) {
                out << id << " " << cr.name << ": " << cr.records.size() << " records, " << cr.retries
                    << " retries\n";
            }
            return 0;
        }

        if (*simulate) {
            guard_output(output, g.force);
            auto loaded = load_mesh(mesh, {cfg.mesh_up_axis});
            const Vec3 target{position[0], position[1], position[2]};
            const auto pose = RigidPose::make(deg_to_rad(yaw_deg), flip, scale, target - loaded.mesh.centroid());
            const LidarSpec spec = cfg.sensor_spec();
            const EmissionGrid grid = build_emission_grid(spec);
            SimulateOptions opts;
            opts.use_window = !full_grid;
            opts.category = category;
            opts.source_mesh = fs::path(mesh).filename().string();
            const auto record = simulate_instance(loaded.mesh, pose, spec, grid, opts);
            std::vector<PointXYZI> pts;
            if (record) { pts = to_points(*record); }
            const std::vector<std::uint32_t> lab(pts.size(), make_label(category, 0));
            write_ply(output, pts, lab);
            write_manifest(sidecar(output), "simulate", cfg, {{"point_count", pts.size()}});
            out << pts.size() << " points\n";
            return 0;
        }

        if (*augment) {
            const fs::path scans_dir = pick(scans, cfg.io.scans_dir, "--scans");
            const fs::path labels_dir = pick(labels, cfg.io.labels_dir, "--labels");
            const fs::path db_dir = pick(database, cfg.io.database, "--db");
            const fs::path out_dir = pick(output, cfg.io.output, "--out");
            require_exists(scans_dir, "scan directory");
            require_exists(labels_dir, "label directory");
            require_exists(db_dir, "database");
            const auto db = load_database(db_dir);
            const auto stats_out =
                augment_directory(scans_dir, labels_dir, db, cfg.augment_policy(), out_dir, cfg.jobs, g.force);
            write_manifest(out_dir / "run_manifest.json", "augment", cfg,
                           {{"database_fingerprint", db.config_fingerprint}, {"scans", stats_out.scans}});
            out << stats_out.written << " scans written, " << stats_out.skipped << " skipped, "
                << stats_out.inserted_points << " points inserted\n";
            return 0;
        }

        if (*eval) {
            const fs::path pred_dir = pick(pred, cfg.io.pred_dir, "--pred");
            const fs::path gt_dir = pick(gt, cfg.io.gt_dir, "--gt");
            const auto result = evaluate_directories(pred_dir, gt_dir, cfg.eval_classes, cfg.jobs);
            out << eval_table(result);
            if (!json_out.empty()) {
                write_text(json_out, eval_json(result));
                write_manifest(sidecar(json_out), "eval", cfg, {{"scans", result.scans}});
            }
            return 0;
        }

        if (*export_ply) {
            guard_output(output, g.force);
            std::vector<PointXYZI> pts;
            std::vector<std::uint32_t> lab;
            if (!scan_file.empty()) {
                if (label_file.empty()) { throw ValidationError("--label: required with --scan"); }
                auto scan = read_scan(scan_file, label_file);
                pts = std::move(scan.points);
                lab = std::move(scan.labels);
            } else {
                const fs::path db_dir = pick(database, cfg.io.database, "--db");
                require_exists(db_dir, "database");
                const auto db = load_database(db_dir);
                const auto it = db.categories.find(category);
                if (it == db.categories.end()) {
                    throw ValidationError("--category: " + std::to_string(category) + " not in the database");
                }
                if (index >= it->second.records.size()) {
                    throw ValidationError("--index: " + std::to_string(index) + " out of range (" +
                                          std::to_string(it->second.records.size()) + " records)");
                }
                pts = to_points(it->second.records[index]);
                lab.assign(pts.size(), make_label(category, 0));
            }
            write_ply(output, pts, lab);
            write_manifest(sidecar(output), "export-ply", cfg, {{"point_count", pts.size()}});
            out << pts.size() << " points\n";
            return 0;
        }
    } catch (const ValidationError &e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace lidarforge
