#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lidarforge/error.hpp"
#include "lidarforge/forge.hpp"
#include "lidarforge/scan.hpp"

namespace lidarforge {

using nlohmann::json;

namespace {

constexpr const char *kFormat = "lidarforge-instance-db";
constexpr int kVersion = 1;

std::string record_file(std::uint16_t category, std::size_t index) {
    return std::to_string(category) + "/" + std::to_string(index) + ".bin";
}

json vec_json(const Vec3 &v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec_from(const json &j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

}  // namespace

std::string database_manifest_json(const InstanceDatabase &db) {
    json j;
    j["format"] = kFormat;
    j["version"] = kVersion;
    j["seed"] = db.seed;
    j["config_fingerprint"] = db.config_fingerprint;
    j["categories"] = json::object();
    for (const auto &[id, cat] : db.categories) {
        json records = json::array();
        for (std::size_t i = 0; i < cat.records.size(); ++i) {
            const auto &r = cat.records[i];
            records.push_back({{"index", i},
                               {"file", record_file(id, i)},
                               {"source_mesh", r.source_mesh},
                               {"pose",
                                {{"yaw", r.pose.yaw},
                                 {"flip_x", r.pose.flip_x},
                                 {"scale", r.pose.scale},
                                 {"translation", vec_json(r.pose.translation)}}},
                               {"bounds", {{"min", vec_json(r.bounds.min)}, {"max", vec_json(r.bounds.max)}}},
                               {"footprint",
                                {r.footprint.x_min, r.footprint.x_max, r.footprint.y_min, r.footprint.y_max}},
                               {"range", r.range},
                               {"point_count", r.points.size()}});
        }
        j["categories"][std::to_string(id)] = {{"name", cat.name},
                                               {"count", cat.records.size()},
                                               {"attempts", cat.attempts},
                                               {"retries", cat.retries},
                                               {"records", records}};
    }
    return j.dump(2) + "\n";
}

void save_database(const InstanceDatabase &db, const std::filesystem::path &dir) {
    std::filesystem::create_directories(dir);
    for (const auto &[id, cat] : db.categories) {
        std::filesystem::create_directories(dir / std::to_string(id));
        for (std::size_t i = 0; i < cat.records.size(); ++i) {
            std::vector<PointXYZI> points;
            points.reserve(cat.records[i].points.size());
            for (const auto &p : cat.records[i].points) {
                points.push_back({static_cast<float>(p.position.x), static_cast<float>(p.position.y),
                                  static_cast<float>(p.position.z), p.intensity});
            }
            write_file_bytes(dir / record_file(id, i), encode_points(points));
        }
    }
    // manifest last
    std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) { throw RuntimeError("cannot write " + (dir / "manifest.json").string()); }
    out << database_manifest_json(db);
}

InstanceDatabase load_database(const std::filesystem::path &dir) {
    const auto manifest_path = dir / "manifest.json";
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) { throw ValidationError("no instance database manifest at " + manifest_path.string()); }
    std::stringstream ss;
    ss << in.rdbuf();

    InstanceDatabase db;
    try {
        const json j = json::parse(ss.str());
        if (j.at("format").get<std::string>() != kFormat) {
            throw ValidationError(manifest_path.string() + ": not an instance database manifest");
        }
        db.seed = j.at("seed").get<std::uint64_t>();
        db.config_fingerprint = j.at("config_fingerprint").get<std::string>();
        for (const auto &[key, value] : j.at("categories").items()) {
            const auto id = static_cast<std::uint16_t>(std::stoul(key));
            CategoryRecords cat;
            cat.name = value.at("name").get<std::string>();
            cat.attempts = value.at("attempts").get<std::uint64_t>();
            cat.retries = value.at("retries").get<std::uint64_t>();
            for (const auto &rj : value.at("records")) {
                InstanceRecord r;
                r.category = id;
                r.source_mesh = rj.at("source_mesh").get<std::string>();
                const auto &pj = rj.at("pose");
                r.pose = RigidPose{pj.at("yaw").get<double>(), pj.at("flip_x").get<bool>(),
                                   pj.at("scale").get<double>(), vec_from(pj.at("translation"))};
                r.bounds = Aabb{vec_from(rj.at("bounds").at("min")), vec_from(rj.at("bounds").at("max"))};
                const auto fp = rj.at("footprint").get<std::vector<double>>();
                if (fp.size() != 4) { throw ValidationError(manifest_path.string() + ": footprint needs 4 values"); }
                r.footprint = {fp[0], fp[1], fp[2], fp[3]};
                r.range = rj.at("range").get<double>();
                const auto file = dir / rj.at("file").get<std::string>();
                const auto points = read_points(file);
                if (points.size() != rj.at("point_count").get<std::size_t>()) {
                    throw ValidationError(file.string() + ": point count disagrees with the manifest");
                }
                r.points.reserve(points.size());
                for (const auto &p : points) { r.points.push_back({{p.x, p.y, p.z}, p.intensity}); }
                cat.records.push_back(std::move(r));
            }
            if (cat.records.size() != value.at("count").get<std::size_t>()) {
                throw ValidationError(manifest_path.string() + ": category " + key +
                                      " record count disagrees with the manifest");
            }
            db.categories[id] = std::move(cat);
        }
    } catch (const json::exception &e) {
        throw ValidationError(manifest_path.string() + ": malformed manifest: " + e.what());
    }
    return db;
}

}  // namespace lidarforge
