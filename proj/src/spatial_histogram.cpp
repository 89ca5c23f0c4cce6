#include "lidarforge/spatial_histogram.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "lidarforge/error.hpp"

namespace lidarforge {

using nlohmann::json;

void GridConfig::validate() const {
    if (!(cell_size > 0.0) || !std::isfinite(cell_size)) { throw ValidationError("grid.cell_size_m: must be > 0"); }
    if (!(x_min < x_max) || !(y_min < y_max) || !std::isfinite(x_min) || !std::isfinite(x_max) ||
        !std::isfinite(y_min) || !std::isfinite(y_max)) {
        throw ValidationError("grid.extent_m: expected finite [x_min, x_max, y_min, y_max] with min < max");
    }
}

std::size_t GridConfig::rows() const {
    return static_cast<std::size_t>(std::ceil((y_max - y_min) / cell_size - 1e-9));
}

std::size_t GridConfig::cols() const {
    return static_cast<std::size_t>(std::ceil((x_max - x_min) / cell_size - 1e-9));
}

std::optional<std::pair<std::size_t, std::size_t>> GridConfig::cell_of(double x, double y) const {
    if (!(x >= x_min && x < x_max && y >= y_min && y < y_max)) { return std::nullopt; }
    const auto col = std::min(static_cast<std::size_t>(std::floor((x - x_min) / cell_size)), cols() - 1);
    const auto row = std::min(static_cast<std::size_t>(std::floor((y - y_min) / cell_size)), rows() - 1);
    return std::make_pair(row, col);
}

std::uint64_t SpatialHistogram::total(std::uint16_t category) const {
    const auto it = categories.find(category);
    if (it == categories.end()) { return 0; }
    return std::accumulate(it->second.counts.begin(), it->second.counts.end(), std::uint64_t{0});
}

std::uint64_t SpatialHistogram::count(std::uint16_t category, std::size_t row, std::size_t col) const {
    return categories.at(category).counts.at(row * grid.cols() + col);
}

void SpatialHistogram::merge(const SpatialHistogram &other) {
    if (!(grid == other.grid)) { throw ValidationError("cannot merge histograms over different grids"); }
    for (const auto &[id, row] : other.categories) {
        auto &mine = categories[id];
        if (mine.counts.empty()) {
            mine = row;
            continue;
        }
        for (std::size_t i = 0; i < mine.counts.size(); ++i) { mine.counts[i] += row.counts[i]; }
    }
}

namespace {

struct CellKey {
    std::int64_t x, y, z;
    bool operator==(const CellKey &) const = default;
};

struct CellKeyHash {
    std::size_t operator()(const CellKey &k) const {
        std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ULL;
        h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4FULL + (h << 6U) + (h >> 2U);
        h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ULL + (h << 6U) + (h >> 2U);
        return static_cast<std::size_t>(h);
    }
};

std::size_t find_root(std::vector<std::size_t> &parent, std::size_t i) {
    while (parent[i] != i) {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    return i;
}

void unite(std::vector<std::size_t> &parent, std::size_t a, std::size_t b) {
    a = find_root(parent, a);
    b = find_root(parent, b);
    if (a == b) { return; }
    // smaller index becomes the root
    if (b < a) { std::swap(a, b); }
    parent[b] = a;
}

Vec3 to_vec(const PointXYZI &p) { return {p.x, p.y, p.z}; }

}  // namespace

std::vector<ScanInstance> extract_instances(const LabeledScan &scan, std::uint16_t category, double cluster_distance) {
    std::map<std::uint16_t, ScanInstance> by_id;
    std::vector<std::size_t> loose;
    for (std::size_t i = 0; i < scan.points.size(); ++i) {
        if (semantic_of(scan.labels[i]) != category) { continue; }
        const auto inst = instance_of(scan.labels[i]);
        if (inst == 0) {
            loose.push_back(i);
            continue;
        }
        auto &acc = by_id[inst];
        acc.centroid += to_vec(scan.points[i]);
        ++acc.point_count;
    }

    std::vector<ScanInstance> out;
    for (auto &[id, acc] : by_id) {
        acc.centroid = acc.centroid / static_cast<double>(acc.point_count);
        out.push_back(acc);
    }
    if (loose.empty()) { return out; }

    // Single-linkage clustering via a hash grid with cell = threshold.
    const double d2 = cluster_distance * cluster_distance;
    std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> cells;
    auto key_of = [&](const Vec3 &p) {
        return CellKey{static_cast<std::int64_t>(std::floor(p.x / cluster_distance)),
                       static_cast<std::int64_t>(std::floor(p.y / cluster_distance)),
                       static_cast<std::int64_t>(std::floor(p.z / cluster_distance))};
    };
    for (std::size_t k = 0; k < loose.size(); ++k) { cells[key_of(to_vec(scan.points[loose[k]]))].push_back(k); }

    std::vector<std::size_t> parent(loose.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    for (std::size_t k = 0; k < loose.size(); ++k) {
        const Vec3 p = to_vec(scan.points[loose[k]]);
        const CellKey key = key_of(p);
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                for (std::int64_t dz = -1; dz <= 1; ++dz) {
                    const auto it = cells.find({key.x + dx, key.y + dy, key.z + dz});
                    if (it == cells.end()) { continue; }
                    for (const auto other : it->second) {
                        if (other <= k) { continue; }
                        const Vec3 d = to_vec(scan.points[loose[other]]) - p;
                        if (dot(d, d) <= d2) { unite(parent, k, other); }
                    }
                }
            }
        }
    }

    std::map<std::size_t, ScanInstance> clusters;  // keyed by root = smallest member index
    for (std::size_t k = 0; k < loose.size(); ++k) {
        auto &acc = clusters[find_root(parent, k)];
        acc.centroid += to_vec(scan.points[loose[k]]);
        ++acc.point_count;
    }
    for (auto &[root, acc] : clusters) {
        acc.centroid = acc.centroid / static_cast<double>(acc.point_count);
        out.push_back(acc);
    }
    return out;
}

HistogramAccumulator::HistogramAccumulator(std::vector<CategoryInfo> categories, GridConfig grid,
                                           double cluster_distance)
    : cluster_distance_(cluster_distance) {
    grid.validate();
    if (!(cluster_distance > 0.0)) { throw ValidationError("cluster distance must be > 0"); }
    histogram_.grid = grid;
    for (const auto &c : categories) {
        histogram_.categories[c.id] = {c.name, std::vector<std::uint64_t>(grid.rows() * grid.cols(), 0)};
        diagnostics_.instances_seen[c.id] = 0;
        diagnostics_.dropped_out_of_extent[c.id] = 0;
    }
}

void HistogramAccumulator::add(const LabeledScan &scan) {
    scan.validate();
    ++scans_;
    for (auto &[id, row] : histogram_.categories) {
        for (const auto &inst : extract_instances(scan, id, cluster_distance_)) {
            ++diagnostics_.instances_seen[id];
            const auto cell = histogram_.grid.cell_of(inst.centroid.x, inst.centroid.y);
            if (!cell) {
                ++diagnostics_.dropped_out_of_extent[id];
                continue;
            }
            ++row.counts[cell->first * histogram_.grid.cols() + cell->second];
        }
    }
}

SpatialHistogram HistogramAccumulator::finish(HistogramDiagnostics *diagnostics) const {
    if (scans_ == 0) { throw ValidationError("histogram accumulation needs at least one scan"); }
    if (diagnostics != nullptr) {
        *diagnostics = diagnostics_;
        for (const auto &[id, row] : histogram_.categories) {
            if (diagnostics_.instances_seen.at(id) == 0) {
                diagnostics->warnings.push_back("category " + std::to_string(id) + " (" + row.name +
                                                ") absent from all scans");
            }
        }
    }
    return histogram_;
}

SpatialHistogram accumulate_histogram(std::span<const LabeledScan> scans, const std::vector<CategoryInfo> &categories,
                                      const GridConfig &grid, HistogramDiagnostics *diagnostics) {
    HistogramAccumulator acc(categories, grid);
    for (const auto &scan : scans) { acc.add(scan); }
    return acc.finish(diagnostics);
}

PlacementSample sample_placement(const SpatialHistogram &h, std::uint16_t category, std::mt19937_64 &rng) {
    const auto it = h.categories.find(category);
    if (it == h.categories.end()) {
        throw ValidationError("category " + std::to_string(category) + " not present in the spatial histogram");
    }
    const auto &counts = it->second.counts;
    const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    if (total == 0) {
        throw RuntimeError("category " + std::to_string(category) + " (" + it->second.name +
                           ") has an all-zero spatial histogram; enable the road-band fallback prior explicitly");
    }
    std::uniform_int_distribution<std::uint64_t> pick(0, total - 1);
    std::uint64_t target = pick(rng);
    std::size_t cell = 0;
    while (target >= counts[cell]) {
        target -= counts[cell];
        ++cell;
    }
    const GridConfig &g = h.grid;
    const std::size_t row = cell / g.cols();
    const std::size_t col = cell % g.cols();
    const double x0 = g.x_min + static_cast<double>(col) * g.cell_size;
    const double y0 = g.y_min + static_cast<double>(row) * g.cell_size;
    const double x1 = std::min(x0 + g.cell_size, g.x_max);
    const double y1 = std::min(y0 + g.cell_size, g.y_max);
    std::uniform_real_distribution<double> ux(x0, x1);
    std::uniform_real_distribution<double> uy(y0, y1);
    PlacementSample s{category, ux(rng), uy(rng), row, col};
    s.x = std::clamp(s.x, x0, std::nextafter(x1, x0));
    s.y = std::clamp(s.y, y0, std::nextafter(y1, y0));
    return s;
}

SpatialHistogram::Row make_road_band_row(const GridConfig &grid, const std::string &name, double half_width) {
    grid.validate();
    SpatialHistogram::Row row{name, std::vector<std::uint64_t>(grid.rows() * grid.cols(), 0)};
    for (std::size_t r = 0; r < grid.rows(); ++r) {
        const double y0 = grid.y_min + static_cast<double>(r) * grid.cell_size;
        const double y1 = y0 + grid.cell_size;
        if (y1 <= -half_width || y0 >= half_width) { continue; }
        for (std::size_t c = 0; c < grid.cols(); ++c) { row.counts[r * grid.cols() + c] = 1; }
    }
    return row;
}

std::string histogram_to_json(const SpatialHistogram &h) {
    json j;
    j["cell_size_m"] = h.grid.cell_size;
    j["extent_m"] = {h.grid.x_min, h.grid.x_max, h.grid.y_min, h.grid.y_max};
    j["categories"] = json::object();
    for (const auto &[id, row] : h.categories) {
        j["categories"][std::to_string(id)] = {
            {"name", row.name}, {"rows", h.grid.rows()}, {"cols", h.grid.cols()}, {"counts", row.counts}};
    }
    return j.dump(2) + "\n";
}

SpatialHistogram histogram_from_json(const std::string &text) {
    SpatialHistogram h;
    try {
        const json j = json::parse(text);
        h.grid.cell_size = j.at("cell_size_m").get<double>();
        const auto extent = j.at("extent_m").get<std::vector<double>>();
        if (extent.size() != 4) { throw ValidationError("histogram extent_m: expected 4 values"); }
        h.grid.x_min = extent[0];
        h.grid.x_max = extent[1];
        h.grid.y_min = extent[2];
        h.grid.y_max = extent[3];
        h.grid.validate();
        for (const auto &[key, value] : j.at("categories").items()) {
            const auto id = static_cast<std::uint16_t>(std::stoul(key));
            SpatialHistogram::Row row{value.at("name").get<std::string>(),
                                      value.at("counts").get<std::vector<std::uint64_t>>()};
            if (value.at("rows").get<std::size_t>() != h.grid.rows() ||
                value.at("cols").get<std::size_t>() != h.grid.cols() ||
                row.counts.size() != h.grid.rows() * h.grid.cols()) {
                throw ValidationError("histogram category " + key + ": dimensions disagree with the grid");
            }
            h.categories[id] = std::move(row);
        }
    } catch (const json::exception &e) {
        throw ValidationError(std::string("malformed histogram JSON: ") + e.what());
    }
    return h;
}

void save_histogram(const SpatialHistogram &h, const std::filesystem::path &path) {
    if (path.has_parent_path()) { std::filesystem::create_directories(path.parent_path()); }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) { throw RuntimeError("cannot write " + path.string()); }
    out << histogram_to_json(h);
}

SpatialHistogram load_histogram(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) { throw ValidationError("cannot open histogram " + path.string()); }
    std::stringstream ss;
    ss << in.rdbuf();
    return histogram_from_json(ss.str());
}

std::string histogram_category_csv(const SpatialHistogram &h, std::uint16_t category) {
    const auto &row = h.categories.at(category);
    std::ostringstream out;
    out << "row,col,x_center,y_center,count\n";
    for (std::size_t r = 0; r < h.grid.rows(); ++r) {
        for (std::size_t c = 0; c < h.grid.cols(); ++c) {
            const double xc = h.grid.x_min + (static_cast<double>(c) + 0.5) * h.grid.cell_size;
            const double yc = h.grid.y_min + (static_cast<double>(r) + 0.5) * h.grid.cell_size;
            out << r << ',' << c << ',' << xc << ',' << yc << ',' << row.counts[r * h.grid.cols() + c] << '\n';
        }
    }
    return out.str();
}

}  // namespace lidarforge
