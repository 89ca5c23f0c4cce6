#include "lidarforge/augment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <json.hpp>

#include "lidarforge/error.hpp"

namespace lidarforge {

using nlohmann::json;

OccupancyGrid::OccupancyGrid(double cell, std::int64_t col0, std::int64_t row0, std::size_t cols, std::size_t rows)
    : cell_(cell), col0_(col0), row0_(row0), cols_(cols), rows_(rows), bits_(cols * rows, 0) {
    if (!(cell > 0.0)) { throw ValidationError("collision cell must be > 0"); }
}

std::int64_t OccupancyGrid::cell_index(double coord) const {
    return static_cast<std::int64_t>(std::floor(coord / cell_));
}

bool OccupancyGrid::occupied(std::int64_t col, std::int64_t row) const {
    const std::int64_t c = col - col0_;
    const std::int64_t r = row - row0_;
    if (c < 0 || r < 0 || c >= static_cast<std::int64_t>(cols_) || r >= static_cast<std::int64_t>(rows_)) {
        return false;
    }
    return bits_[static_cast<std::size_t>(r) * cols_ + static_cast<std::size_t>(c)] != 0;
}

void OccupancyGrid::mark(std::int64_t col, std::int64_t row) {
    const std::int64_t c = col - col0_;
    const std::int64_t r = row - row0_;
    if (c < 0 || r < 0 || c >= static_cast<std::int64_t>(cols_) || r >= static_cast<std::int64_t>(rows_)) {
        throw ValidationError("occupancy cell outside the grid window");
    }
    bits_[static_cast<std::size_t>(r) * cols_ + static_cast<std::size_t>(c)] = 1;
}

std::size_t OccupancyGrid::occupied_count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

OccupancyGrid occupancy_grid(const LabeledScan &scan, const std::set<std::uint16_t> &obstacle_labels, double cell) {
    if (!(cell > 0.0)) { throw ValidationError("augment.collision_cell_m: must be > 0"); }
    std::int64_t c_lo = std::numeric_limits<std::int64_t>::max();
    std::int64_t c_hi = std::numeric_limits<std::int64_t>::min();
    std::int64_t r_lo = c_lo;
    std::int64_t r_hi = c_hi;
    std::vector<std::pair<std::int64_t, std::int64_t>> cells;
    for (std::size_t i = 0; i < scan.points.size(); ++i) {
        if (obstacle_labels.count(semantic_of(scan.labels[i])) == 0) { continue; }
        const auto c = static_cast<std::int64_t>(std::floor(static_cast<double>(scan.points[i].x) / cell));
        const auto r = static_cast<std::int64_t>(std::floor(static_cast<double>(scan.points[i].y) / cell));
        cells.emplace_back(c, r);
        c_lo = std::min(c_lo, c);
        c_hi = std::max(c_hi, c);
        r_lo = std::min(r_lo, r);
        r_hi = std::max(r_hi, r);
    }
    if (cells.empty()) { return OccupancyGrid(cell, 0, 0, 0, 0); }
    OccupancyGrid grid(cell, c_lo, r_lo, static_cast<std::size_t>(c_hi - c_lo + 1),
                       static_cast<std::size_t>(r_hi - r_lo + 1));
    for (const auto &[c, r] : cells) { grid.mark(c, r); }
    return grid;
}

bool collides(const Footprint &footprint, const OccupancyGrid &grid, std::span<const Footprint> placed) {
    const Footprint f = footprint.inflated(grid.cell());
    for (const auto &other : placed) {
        if (f.overlaps(other)) { return true; }
    }
    if (grid.occupied_count() == 0) { return false; }
    const std::int64_t c_lo = std::max(grid.cell_index(f.x_min), grid.col0());
    const std::int64_t c_hi = std::min(grid.cell_index(f.x_max), grid.col0() + static_cast<std::int64_t>(grid.cols()) - 1);
    const std::int64_t r_lo = std::max(grid.cell_index(f.y_min), grid.row0());
    const std::int64_t r_hi = std::min(grid.cell_index(f.y_max), grid.row0() + static_cast<std::int64_t>(grid.rows()) - 1);
    for (std::int64_t r = r_lo; r <= r_hi; ++r) {
        for (std::int64_t c = c_lo; c <= c_hi; ++c) {
            if (grid.occupied(c, r)) { return true; }
        }
    }
    return false;
}

bool collides(const InstanceRecord &record, const OccupancyGrid &grid, std::span<const Footprint> placed) {
    return collides(record.footprint, grid, placed);
}

std::set<std::uint16_t> default_obstacle_labels() {
    return {10, 11, 13, 15, 16, 18, 20, 30, 31, 32, 50, 51, 52, 70, 71, 80, 81, 99,
            252, 253, 254, 255, 256, 257, 258, 259};
}

void AugmentPolicy::validate() const {
    if (!(collision_cell > 0.0) || !std::isfinite(collision_cell)) {
        throw ValidationError("augment.collision_cell_m: must be > 0");
    }
    if (max_tries == 0 && samples_per_category > 0) { throw ValidationError("augment.max_tries: must be >= 1"); }
}

namespace {

std::mt19937_64 scan_stream(std::uint64_t seed, const std::string &frame_id) {
    std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed & 0xFFFFFFFFU),
                                     static_cast<std::uint32_t>(seed >> 32U)};
    for (const unsigned char ch : frame_id) { words.push_back(ch); }
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

Footprint rotated_footprint(const Footprint &f, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    Footprint out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const double x : {f.x_min, f.x_max}) {
        for (const double y : {f.y_min, f.y_max}) {
            const double rx = c * x - s * y;
            const double ry = s * x + c * y;
            out.x_min = std::min(out.x_min, rx);
            out.x_max = std::max(out.x_max, rx);
            out.y_min = std::min(out.y_min, ry);
            out.y_max = std::max(out.y_max, ry);
        }
    }
    return out;
}

}  // namespace

AugmentResult augment_scan(const LabeledScan &scan, const InstanceDatabase &db, const AugmentPolicy &policy) {
    policy.validate();
    scan.validate();
    for (const auto cat : policy.categories) {
        if (db.categories.count(cat) == 0) {
            throw ValidationError("augment.categories: category " + std::to_string(cat) + " not in the database");
        }
    }

    AugmentResult result{scan, {}};
    result.report.frame_id = scan.frame_id;
    if (policy.samples_per_category == 0) { return result; }
    const OccupancyGrid grid = occupancy_grid(scan, policy.obstacle_labels, policy.collision_cell);
    std::vector<Footprint> placed;
    std::mt19937_64 rng = scan_stream(policy.seed, scan.frame_id);

    std::uint32_t next_instance = 1;
    for (const auto label : scan.labels) { next_instance = std::max<std::uint32_t>(next_instance, instance_of(label) + 1U); }

    for (const auto cat : policy.categories) {
        auto &outcome = result.report.categories[cat];
        outcome.requested += policy.samples_per_category;
        const auto &records = db.categories.at(cat).records;
        std::vector<std::size_t> available(records.size());
        for (std::size_t i = 0; i < available.size(); ++i) { available[i] = i; }

        for (std::size_t sample = 0; sample < policy.samples_per_category; ++sample) {
            bool accepted = false;
            for (std::size_t attempt = 0; attempt < policy.max_tries && !available.empty(); ++attempt) {
                std::uniform_int_distribution<std::size_t> pick(0, available.size() - 1);
                const std::size_t slot = pick(rng);
                const std::size_t index = available[slot];
                available.erase(available.begin() + static_cast<std::ptrdiff_t>(slot));
                const InstanceRecord &record = records[index];

                double angle = 0.0;
                Footprint footprint = record.footprint;
                if (policy.repose_azimuth) {
                    angle = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
                    footprint = rotated_footprint(footprint, angle);
                }
                if (collides(footprint, grid, placed)) {
                    ++outcome.rejected_draws;
                    continue;
                }
                if (next_instance > 0xFFFFU) { throw RuntimeError("scan " + scan.frame_id + ": instance ids exhausted"); }
                const auto instance = static_cast<std::uint16_t>(next_instance++);
                Insertion ins{cat, index, instance, footprint, angle, result.scan.points.size(), record.points.size()};
                const double c = std::cos(angle);
                const double s = std::sin(angle);
                for (const auto &p : record.points) {
                    double x = p.position.x;
                    double y = p.position.y;
                    if (policy.repose_azimuth) {
                        x = c * p.position.x - s * p.position.y;
                        y = s * p.position.x + c * p.position.y;
                    }
                    result.scan.points.push_back({static_cast<float>(x), static_cast<float>(y),
                                                  static_cast<float>(p.position.z), p.intensity});
                    result.scan.labels.push_back(make_label(cat, instance));
                }
                placed.push_back(footprint);
                result.report.insertions.push_back(ins);
                ++outcome.inserted;
                accepted = true;
                break;
            }
            if (!accepted) { ++outcome.failed_samples; }
        }
    }
    return result;
}

std::string augment_report_json(const AugmentReport &report) {
    json j;
    j["frame_id"] = report.frame_id;
    json ins = json::array();
    for (const auto &i : report.insertions) {
        ins.push_back({{"category", i.category},
                       {"record_index", i.record_index},
                       {"instance_id", i.instance_id},
                       {"footprint", {i.footprint.x_min, i.footprint.x_max, i.footprint.y_min, i.footprint.y_max}},
                       {"azimuth_offset", i.azimuth_offset},
                       {"point_offset", i.point_offset},
                       {"point_count", i.point_count}});
    }
    j["insertions"] = ins;
    j["categories"] = json::object();
    for (const auto &[id, o] : report.categories) {
        j["categories"][std::to_string(id)] = {{"requested", o.requested},
                                               {"inserted", o.inserted},
                                               {"rejected_draws", o.rejected_draws},
                                               {"failed_samples", o.failed_samples}};
    }
    return j.dump(2) + "\n";
}

}  // namespace lidarforge
