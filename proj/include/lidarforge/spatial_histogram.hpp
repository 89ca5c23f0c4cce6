#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lidarforge/scan.hpp"
#include "lidarforge/vec3.hpp"

namespace lidarforge {

/// Ground-plane grid. Cells are square, anchored at (x_min, y_min); rows run
/// along y and columns along x.
struct GridConfig {
    double cell_size = 10.0;
    double x_min = -80.0;
    double x_max = 80.0;
    double y_min = -80.0;
    double y_max = 80.0;

    void validate() const;
    [[nodiscard]] std::size_t rows() const;
    [[nodiscard]] std::size_t cols() const;
    /// Cell containing (x, y), or nullopt outside the half-open extent.
    [[nodiscard]] std::optional<std::pair<std::size_t, std::size_t>> cell_of(double x, double y) const;

    bool operator==(const GridConfig &) const = default;
};

struct CategoryInfo {
    std::uint16_t id = 0;
    std::string name;
};

struct SpatialHistogram {
    struct Row {
        std::string name;
        std::vector<std::uint64_t> counts;  // row-major, rows() x cols()

        bool operator==(const Row &) const = default;
    };

    GridConfig grid;
    std::map<std::uint16_t, Row> categories;

    [[nodiscard]] std::uint64_t total(std::uint16_t category) const;
    [[nodiscard]] std::uint64_t count(std::uint16_t category, std::size_t row, std::size_t col) const;
    /// Cell-wise addition; grids and category sets must match.
    void merge(const SpatialHistogram &other);

    bool operator==(const SpatialHistogram &) const = default;
};

struct HistogramDiagnostics {
    std::map<std::uint16_t, std::uint64_t> instances_seen;
    std::map<std::uint16_t, std::uint64_t> dropped_out_of_extent;
    std::vector<std::string> warnings;
};

/// One object instance recovered from a labeled scan.
struct ScanInstance {
    Vec3 centroid;
    std::size_t point_count = 0;
};

/// Groups the points of one category into instances. Points carrying a
/// non-zero instance id are grouped by id; points with instance id 0 are
/// clustered by single linkage with the given distance threshold (meters).
std::vector<ScanInstance> extract_instances(const LabeledScan &scan, std::uint16_t category,
                                            double cluster_distance = 0.5);

/// Streaming accumulation of instance centroids into a histogram.
class HistogramAccumulator {
public:
    HistogramAccumulator(std::vector<CategoryInfo> categories, GridConfig grid, double cluster_distance = 0.5);

    void add(const LabeledScan &scan);
    /// Throws ValidationError if no scan was added.
    [[nodiscard]] SpatialHistogram finish(HistogramDiagnostics *diagnostics = nullptr) const;

private:
    SpatialHistogram histogram_;
    HistogramDiagnostics diagnostics_;
    double cluster_distance_;
    std::size_t scans_ = 0;
};

SpatialHistogram accumulate_histogram(std::span<const LabeledScan> scans, const std::vector<CategoryInfo> &categories,
                                      const GridConfig &grid, HistogramDiagnostics *diagnostics = nullptr);

struct PlacementSample {
    std::uint16_t category = 0;
    double x = 0.0;
    double y = 0.0;
    std::size_t row = 0;
    std::size_t col = 0;
};

/// Draws a cell with probability proportional to its count, then a uniform
/// position inside it. Throws RuntimeError when the category has no mass.
PlacementSample sample_placement(const SpatialHistogram &h, std::uint16_t category, std::mt19937_64 &rng);

/// Uniform prior over cells intersecting |y| <= half_width. Opt-in fallback
/// for categories with no observed instances.
SpatialHistogram::Row make_road_band_row(const GridConfig &grid, const std::string &name, double half_width);

std::string histogram_to_json(const SpatialHistogram &h);
SpatialHistogram histogram_from_json(const std::string &text);
void save_histogram(const SpatialHistogram &h, const std::filesystem::path &path);
SpatialHistogram load_histogram(const std::filesystem::path &path);
/// One line per cell: row,col,x_center,y_center,count.
std::string histogram_category_csv(const SpatialHistogram &h, std::uint16_t category);

}  // namespace lidarforge
