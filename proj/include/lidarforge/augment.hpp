#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lidarforge/forge.hpp"
#include "lidarforge/scan.hpp"

namespace lidarforge {

/// Coarse obstacle map on the ground plane. Cell (i, j) covers
/// [i*cell, (i+1)*cell) x [j*cell, (j+1)*cell); cells outside the stored
/// window are free.
class OccupancyGrid {
public:
    OccupancyGrid(double cell, std::int64_t col0, std::int64_t row0, std::size_t cols, std::size_t rows);

    [[nodiscard]] double cell() const { return cell_; }
    [[nodiscard]] std::int64_t cell_index(double coord) const;
    [[nodiscard]] bool occupied(std::int64_t col, std::int64_t row) const;
    void mark(std::int64_t col, std::int64_t row);
    [[nodiscard]] std::size_t occupied_count() const;

    [[nodiscard]] std::int64_t col0() const { return col0_; }
    [[nodiscard]] std::int64_t row0() const { return row0_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] std::size_t rows() const { return rows_; }

private:
    double cell_;
    std::int64_t col0_;
    std::int64_t row0_;
    std::size_t cols_;
    std::size_t rows_;
    std::vector<std::uint8_t> bits_;
};

/// Marks every cell holding at least one point whose semantic label is in
/// `obstacle_labels`.
OccupancyGrid occupancy_grid(const LabeledScan &scan, const std::set<std::uint16_t> &obstacle_labels, double cell);

/// True iff the footprint, inflated by one grid cell, touches an occupied
/// cell or overlaps any already placed footprint.
bool collides(const Footprint &footprint, const OccupancyGrid &grid, std::span<const Footprint> placed);
bool collides(const InstanceRecord &record, const OccupancyGrid &grid, std::span<const Footprint> placed);

/// SemanticKITTI classes that block placement (everything but ground,
/// unlabeled and outliers).
std::set<std::uint16_t> default_obstacle_labels();

struct AugmentPolicy {
    std::vector<std::uint16_t> categories;
    std::size_t samples_per_category = 1;
    double collision_cell = 0.5;
    std::size_t max_tries = 10;
    std::set<std::uint16_t> obstacle_labels = default_obstacle_labels();
    std::uint64_t seed = 0;
    /// Rotate each drawn record about the sensor's vertical axis by a random
    /// angle before the collision test. Off by default: records keep the
    /// placement chosen when the database was built.
    bool repose_azimuth = false;

    void validate() const;
};

struct Insertion {
    std::uint16_t category = 0;
    std::size_t record_index = 0;
    std::uint16_t instance_id = 0;
    Footprint footprint;
    double azimuth_offset = 0.0;
    std::size_t point_offset = 0;
    std::size_t point_count = 0;
};

struct CategoryOutcome {
    std::size_t requested = 0;
    std::size_t inserted = 0;
    std::size_t rejected_draws = 0;
    std::size_t failed_samples = 0;
};

struct AugmentReport {
    std::string frame_id;
    std::vector<Insertion> insertions;
    std::map<std::uint16_t, CategoryOutcome> categories;
};

struct AugmentResult {
    LabeledScan scan;
    AugmentReport report;
};

/// Appends database records to a copy of `scan`. Existing points and labels
/// are kept untouched and in place; inserted points get the record's category
/// and a fresh instance id. Deterministic in (scan, db, policy.seed).
AugmentResult augment_scan(const LabeledScan &scan, const InstanceDatabase &db, const AugmentPolicy &policy);

std::string augment_report_json(const AugmentReport &report);

}  // namespace lidarforge
