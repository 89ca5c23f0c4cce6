#include "lidarforge/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "lidarforge/error.hpp"
#include "lidarforge/fingerprint.hpp"

namespace lidarforge {

using nlohmann::json;

std::vector<EvalClass> semantic_kitti_classes() {
    return {{"car", {10, 252}},
            {"bicycle", {11}},
            {"motorcycle", {15}},
            {"truck", {18, 258}},
            {"other-vehicle", {13, 16, 20, 256, 257, 259}},
            {"person", {30, 254}},
            {"bicyclist", {31, 253}},
            {"motorcyclist", {32, 255}},
            {"road", {40, 60}},
            {"parking", {44}},
            {"sidewalk", {48}},
            {"other-ground", {49}},
            {"building", {50}},
            {"fence", {51}},
            {"vegetation", {70}},
            {"trunk", {71}},
            {"terrain", {72}},
            {"pole", {80}},
            {"traffic-sign", {81}}};
}

namespace {

void check_object(const json &j, const std::string &path) {
    if (!j.is_object()) { throw ValidationError(path + ": expected an object"); }
}

void check_keys(const json &j, const std::set<std::string> &allowed, const std::string &path) {
    for (const auto &[key, value] : j.items()) {
        if (allowed.count(key) == 0) {
            throw ValidationError((path.empty() ? key : path + "." + key) + ": unknown key");
        }
    }
}

std::string join(const std::string &path, const std::string &key) { return path.empty() ? key : path + "." + key; }

double get_number(const json &j, const std::string &key, const std::string &path, double fallback) {
    if (!j.contains(key)) { return fallback; }
    const auto &v = j.at(key);
    if (!v.is_number()) { throw ValidationError(join(path, key) + ": expected a number"); }
    return v.get<double>();
}

std::uint64_t get_unsigned(const json &j, const std::string &key, const std::string &path, std::uint64_t fallback) {
    if (!j.contains(key)) { return fallback; }
    const auto &v = j.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw ValidationError(join(path, key) + ": expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

bool get_bool(const json &j, const std::string &key, const std::string &path, bool fallback) {
    if (!j.contains(key)) { return fallback; }
    if (!j.at(key).is_boolean()) { throw ValidationError(join(path, key) + ": expected true or false"); }
    return j.at(key).get<bool>();
}

std::string get_string(const json &j, const std::string &key, const std::string &path, const std::string &fallback) {
    if (!j.contains(key)) { return fallback; }
    if (!j.at(key).is_string()) { throw ValidationError(join(path, key) + ": expected a string"); }
    return j.at(key).get<std::string>();
}

std::vector<double> get_numbers(const json &j, const std::string &key, const std::string &path, std::size_t n) {
    const auto &v = j.at(key);
    if (!v.is_array() || v.size() != n) {
        throw ValidationError(join(path, key) + ": expected an array of " + std::to_string(n) + " numbers");
    }
    std::vector<double> out;
    for (const auto &x : v) {
        if (!x.is_number()) { throw ValidationError(join(path, key) + ": expected numbers"); }
        out.push_back(x.get<double>());
    }
    return out;
}

std::uint16_t label_id(const json &v, const std::string &path) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0 || v.get<std::int64_t>() > 0xFFFF) {
        throw ValidationError(path + ": expected a label id in [0, 65535]");
    }
    return static_cast<std::uint16_t>(v.get<std::int64_t>());
}

std::filesystem::path resolve(const std::filesystem::path &base, const std::string &p) {
    const std::filesystem::path path(p);
    if (path.empty() || path.is_absolute() || base.empty()) { return path; }
    return base / path;
}

}  // namespace

PipelineConfig parse_config(const json &j, const std::filesystem::path &base_dir) {
    check_object(j, "<config>");
    check_keys(j, {"seed", "jobs", "sensor", "grid", "categories", "forge", "augment", "eval", "io"}, "");
    PipelineConfig cfg;
    cfg.seed = get_unsigned(j, "seed", "", 0);
    cfg.jobs = get_unsigned(j, "jobs", "", 1);
    if (cfg.jobs == 0) { throw ValidationError("jobs: must be >= 1"); }

    if (j.contains("sensor")) {
        const auto &s = j.at("sensor");
        const std::string p = "sensor";
        check_object(s, p);
        check_keys(s, {"center", "azimuth_fov_deg", "azimuth_res_deg", "elevation_min_deg", "elevation_max_deg",
                       "elevation_res_deg", "jitter_sigma_deg", "seed"},
                   p);
        LidarSpec &spec = cfg.sensor;
        if (s.contains("center")) {
            const auto c = get_numbers(s, "center", p, 3);
            spec.center = {c[0], c[1], c[2]};
        }
        spec.azimuth_fov = deg_to_rad(get_number(s, "azimuth_fov_deg", p, 360.0));
        spec.azimuth_res = deg_to_rad(get_number(s, "azimuth_res_deg", p, 0.08));
        spec.elevation_min = deg_to_rad(get_number(s, "elevation_min_deg", p, -27.0));
        spec.elevation_max = deg_to_rad(get_number(s, "elevation_max_deg", p, 0.0));
        spec.elevation_res = deg_to_rad(get_number(s, "elevation_res_deg", p, 0.4));
        spec.jitter_sigma = deg_to_rad(get_number(s, "jitter_sigma_deg", p, 0.01));
        if (s.contains("seed")) { cfg.sensor_seed = get_unsigned(s, "seed", p, 0); }
    }
    try {
        cfg.sensor.validate();
    } catch (const ValidationError &e) {
        // Map internal field names onto the config's degree-valued keys.
        std::string msg = e.what();
        for (const char *field : {"azimuth_res", "azimuth_fov", "elevation_res", "jitter_sigma"}) {
            const std::string f = std::string("sensor.") + field + ":";
            if (msg.rfind(f, 0) == 0) { msg = std::string("sensor.") + field + "_deg:" + msg.substr(f.size()); }
        }
        if (msg.rfind("sensor.elevation_min:", 0) == 0) { msg = "sensor.elevation_min_deg:" + msg.substr(21); }
        throw ValidationError(msg);
    }

    if (j.contains("grid")) {
        const auto &g = j.at("grid");
        check_object(g, "grid");
        check_keys(g, {"cell_size_m", "extent_m", "cluster_distance_m"}, "grid");
        cfg.grid.cell_size = get_number(g, "cell_size_m", "grid", 10.0);
        if (g.contains("extent_m")) {
            const auto e = get_numbers(g, "extent_m", "grid", 4);
            cfg.grid.x_min = e[0];
            cfg.grid.x_max = e[1];
            cfg.grid.y_min = e[2];
            cfg.grid.y_max = e[3];
        }
        cfg.cluster_distance = get_number(g, "cluster_distance_m", "grid", 0.5);
        if (!(cfg.cluster_distance > 0.0)) { throw ValidationError("grid.cluster_distance_m: must be > 0"); }
    }
    cfg.grid.validate();

    if (j.contains("categories")) {
        const auto &cats = j.at("categories");
        if (!cats.is_array()) { throw ValidationError("categories: expected an array"); }
        for (std::size_t i = 0; i < cats.size(); ++i) {
            const std::string p = "categories[" + std::to_string(i) + "]";
            check_object(cats[i], p);
            check_keys(cats[i], {"id", "name"}, p);
            if (!cats[i].contains("id")) { throw ValidationError(p + ".id: required"); }
            cfg.stats_categories.push_back({label_id(cats[i].at("id"), p + ".id"), get_string(cats[i], "name", p, "")});
        }
    }

    if (j.contains("forge")) {
        const auto &f = j.at("forge");
        const std::string p = "forge";
        check_object(f, p);
        check_keys(f, {"mesh_up_axis", "intensity_noise", "retry_cap", "road_band_fallback", "road_band_half_width_m",
                       "categories"},
                   p);
        const std::string up = get_string(f, "mesh_up_axis", p, "z");
        if (up != "z" && up != "y") { throw ValidationError("forge.mesh_up_axis: expected \"z\" or \"y\""); }
        cfg.mesh_up_axis = up == "y" ? UpAxis::y : UpAxis::z;
        cfg.forge.intensity_noise = static_cast<float>(get_number(f, "intensity_noise", p, 0.0));
        cfg.forge.retry_cap = get_unsigned(f, "retry_cap", p, 10);
        cfg.forge.road_band_fallback = get_bool(f, "road_band_fallback", p, false);
        cfg.forge.road_band_half_width = get_number(f, "road_band_half_width_m", p, 10.0);
        if (f.contains("categories")) {
            const auto &cats = f.at("categories");
            if (!cats.is_array()) { throw ValidationError("forge.categories: expected an array"); }
            for (std::size_t i = 0; i < cats.size(); ++i) {
                const std::string cp = "forge.categories[" + std::to_string(i) + "]";
                const auto &c = cats[i];
                check_object(c, cp);
                check_keys(c, {"id", "name", "meshes", "scale", "records", "intensity"}, cp);
                if (!c.contains("id")) { throw ValidationError(cp + ".id: required"); }
                ForgeCategoryConfig fc;
                fc.category.id = label_id(c.at("id"), cp + ".id");
                fc.category.name = get_string(c, "name", cp, std::to_string(fc.category.id));
                if (c.contains("scale")) {
                    const auto s = get_numbers(c, "scale", cp, 2);
                    fc.category.scale_min = s[0];
                    fc.category.scale_max = s[1];
                }
                fc.category.records = get_unsigned(c, "records", cp, 0);
                fc.category.intensity = static_cast<float>(get_number(c, "intensity", cp, 0.2));
                if (c.contains("meshes")) {
                    if (!c.at("meshes").is_array()) { throw ValidationError(cp + ".meshes: expected an array of paths"); }
                    for (const auto &m : c.at("meshes")) {
                        if (!m.is_string()) { throw ValidationError(cp + ".meshes: expected an array of paths"); }
                        fc.meshes.push_back(resolve(base_dir, m.get<std::string>()));
                    }
                }
                cfg.forge_categories.push_back(fc);
            }
        }
    }
    cfg.forge.categories.clear();
    for (const auto &fc : cfg.forge_categories) { cfg.forge.categories.push_back(fc.category); }
    cfg.forge.validate();

    if (j.contains("augment")) {
        const auto &a = j.at("augment");
        const std::string p = "augment";
        check_object(a, p);
        check_keys(a, {"categories", "samples_per_category", "collision_cell_m", "max_tries", "obstacle_labels",
                       "repose_azimuth"},
                   p);
        if (a.contains("categories")) {
            if (!a.at("categories").is_array()) { throw ValidationError("augment.categories: expected an array"); }
            for (const auto &v : a.at("categories")) { cfg.augment.categories.push_back(label_id(v, "augment.categories")); }
        } else {
            for (const auto &fc : cfg.forge_categories) { cfg.augment.categories.push_back(fc.category.id); }
        }
        cfg.augment.samples_per_category = get_unsigned(a, "samples_per_category", p, 1);
        cfg.augment.collision_cell = get_number(a, "collision_cell_m", p, 0.5);
        cfg.augment.max_tries = get_unsigned(a, "max_tries", p, 10);
        if (a.contains("obstacle_labels")) {
            if (!a.at("obstacle_labels").is_array()) {
                throw ValidationError("augment.obstacle_labels: expected an array");
            }
            cfg.augment.obstacle_labels.clear();
            for (const auto &v : a.at("obstacle_labels")) {
                cfg.augment.obstacle_labels.insert(label_id(v, "augment.obstacle_labels"));
            }
        }
        cfg.augment.repose_azimuth = get_bool(a, "repose_azimuth", p, false);
    } else {
        for (const auto &fc : cfg.forge_categories) { cfg.augment.categories.push_back(fc.category.id); }
    }
    cfg.augment.validate();

    if (j.contains("eval")) {
        const auto &e = j.at("eval");
        check_object(e, "eval");
        check_keys(e, {"classes"}, "eval");
        if (e.contains("classes")) {
            const auto &classes = e.at("classes");
            if (!classes.is_array() || classes.empty()) {
                throw ValidationError("eval.classes: expected a non-empty array");
            }
            cfg.eval_classes.clear();
            std::set<std::uint16_t> seen;
            for (std::size_t i = 0; i < classes.size(); ++i) {
                const std::string cp = "eval.classes[" + std::to_string(i) + "]";
                check_object(classes[i], cp);
                check_keys(classes[i], {"name", "labels"}, cp);
                EvalClass ec{get_string(classes[i], "name", cp, "class" + std::to_string(i)), {}};
                if (!classes[i].contains("labels") || !classes[i].at("labels").is_array()) {
                    throw ValidationError(cp + ".labels: expected an array of label ids");
                }
                for (const auto &v : classes[i].at("labels")) {
                    const auto id = label_id(v, cp + ".labels");
                    if (!seen.insert(id).second) {
                        throw ValidationError(cp + ".labels: label " + std::to_string(id) + " mapped twice");
                    }
                    ec.labels.push_back(id);
                }
                cfg.eval_classes.push_back(ec);
            }
        }
    }

    if (j.contains("io")) {
        const auto &io = j.at("io");
        check_object(io, "io");
        check_keys(io, {"scans_dir", "labels_dir", "histogram", "database", "output", "pred_dir", "gt_dir"}, "io");
        cfg.io.scans_dir = resolve(base_dir, get_string(io, "scans_dir", "io", ""));
        cfg.io.labels_dir = resolve(base_dir, get_string(io, "labels_dir", "io", ""));
        cfg.io.histogram = resolve(base_dir, get_string(io, "histogram", "io", ""));
        cfg.io.database = resolve(base_dir, get_string(io, "database", "io", ""));
        cfg.io.output = resolve(base_dir, get_string(io, "output", "io", ""));
        cfg.io.pred_dir = resolve(base_dir, get_string(io, "pred_dir", "io", ""));
        cfg.io.gt_dir = resolve(base_dir, get_string(io, "gt_dir", "io", ""));
    }

    std::set<std::uint16_t> forge_ids;
    for (const auto &fc : cfg.forge_categories) { forge_ids.insert(fc.category.id); }
    if (!cfg.forge_categories.empty()) {
        for (const auto id : cfg.augment.categories) {
            if (forge_ids.count(id) == 0) {
                throw ValidationError("augment.categories: category " + std::to_string(id) +
                                      " is not defined under forge.categories");
            }
        }
    }
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) { throw ValidationError("cannot open config " + path.string()); }
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::exception &e) {
        throw ValidationError(path.string() + ": malformed JSON: " + e.what());
    }
    return parse_config(j, path.parent_path());
}

json PipelineConfig::to_json() const {
    json j;
    j["seed"] = seed;
    j["sensor"] = {{"center", {sensor.center.x, sensor.center.y, sensor.center.z}},
                   {"azimuth_fov_deg", rad_to_deg(sensor.azimuth_fov)},
                   {"azimuth_res_deg", rad_to_deg(sensor.azimuth_res)},
                   {"elevation_min_deg", rad_to_deg(sensor.elevation_min)},
                   {"elevation_max_deg", rad_to_deg(sensor.elevation_max)},
                   {"elevation_res_deg", rad_to_deg(sensor.elevation_res)},
                   {"jitter_sigma_deg", rad_to_deg(sensor.jitter_sigma)}};
    if (sensor_seed) { j["sensor"]["seed"] = *sensor_seed; }
    j["grid"] = {{"cell_size_m", grid.cell_size},
                 {"extent_m", {grid.x_min, grid.x_max, grid.y_min, grid.y_max}},
                 {"cluster_distance_m", cluster_distance}};
    json cats = json::array();
    for (const auto &c : stats_categories) { cats.push_back({{"id", c.id}, {"name", c.name}}); }
    j["categories"] = cats;
    json forge_cats = json::array();
    for (const auto &fc : forge_categories) {
        json meshes = json::array();
        for (const auto &m : fc.meshes) { meshes.push_back(m.filename().string()); }
        forge_cats.push_back({{"id", fc.category.id},
                              {"name", fc.category.name},
                              {"meshes", meshes},
                              {"scale", {fc.category.scale_min, fc.category.scale_max}},
                              {"records", fc.category.records},
                              {"intensity", fc.category.intensity}});
    }
    j["forge"] = {{"mesh_up_axis", mesh_up_axis == UpAxis::y ? "y" : "z"},
                  {"intensity_noise", forge.intensity_noise},
                  {"retry_cap", forge.retry_cap},
                  {"road_band_fallback", forge.road_band_fallback},
                  {"road_band_half_width_m", forge.road_band_half_width},
                  {"categories", forge_cats}};
    j["augment"] = {{"categories", augment.categories},
                    {"samples_per_category", augment.samples_per_category},
                    {"collision_cell_m", augment.collision_cell},
                    {"max_tries", augment.max_tries},
                    {"obstacle_labels", augment.obstacle_labels},
                    {"repose_azimuth", augment.repose_azimuth}};
    json classes = json::array();
    for (const auto &c : eval_classes) { classes.push_back({{"name", c.name}, {"labels", c.labels}}); }
    j["eval"] = {{"classes", classes}};
    return j;
}

std::string PipelineConfig::fingerprint() const { return sha256_hex(to_json().dump()); }

std::vector<CategoryInfo> PipelineConfig::histogram_categories() const {
    if (!stats_categories.empty()) { return stats_categories; }
    std::vector<CategoryInfo> out;
    for (const auto &fc : forge_categories) { out.push_back({fc.category.id, fc.category.name}); }
    return out;
}

ForgePolicy PipelineConfig::forge_policy() const {
    ForgePolicy p = forge;
    p.jobs = jobs;
    return p;
}

AugmentPolicy PipelineConfig::augment_policy() const {
    AugmentPolicy p = augment;
    p.seed = seed;
    return p;
}

LidarSpec PipelineConfig::sensor_spec() const {
    LidarSpec s = sensor;
    s.seed = sensor_seed.value_or(seed);
    return s;
}

}  // namespace lidarforge
