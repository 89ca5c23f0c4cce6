#include "lidarforge/emission.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lidarforge/error.hpp"

namespace lidarforge {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool finite(const Vec3 &v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z); }

EmissionGrid select(const EmissionGrid &grid, const std::vector<std::uint32_t> &rows,
                    const std::vector<std::uint32_t> &cols) {
    EmissionGrid out = grid;
    out.rays.clear();
    out.rows = rows.size();
    out.cols = cols.size();
    if (rows.empty() || cols.empty()) {
        out.rows = out.cols = 0;
        return out;
    }
    // Map lattice (row, col) to the ray index in `grid`.
    std::vector<std::int64_t> row_slot(grid.lattice_rows, -1);
    std::vector<std::int64_t> col_slot(grid.lattice_cols, -1);
    std::vector<std::uint32_t> grid_rows;
    std::vector<std::uint32_t> grid_cols;
    for (std::size_t i = 0; i < grid.rows; ++i) {
        const auto r = grid.rays[i * grid.cols].row;
        row_slot[r] = static_cast<std::int64_t>(i);
    }
    for (std::size_t j = 0; j < grid.cols; ++j) { col_slot[grid.rays[j].col] = static_cast<std::int64_t>(j); }
    out.rays.reserve(rows.size() * cols.size());
    for (const auto r : rows) {
        for (const auto c : cols) {
            out.rays.push_back(grid.rays[static_cast<std::size_t>(row_slot[r]) * grid.cols +
                                         static_cast<std::size_t>(col_slot[c])]);
        }
    }
    return out;
}

std::vector<std::uint32_t> grid_rows(const EmissionGrid &grid) {
    std::vector<std::uint32_t> rows;
    rows.reserve(grid.rows);
    for (std::size_t i = 0; i < grid.rows; ++i) { rows.push_back(grid.rays[i * grid.cols].row); }
    return rows;
}

std::vector<std::uint32_t> grid_cols(const EmissionGrid &grid) {
    std::vector<std::uint32_t> cols;
    cols.reserve(grid.cols);
    for (std::size_t j = 0; j < grid.cols; ++j) { cols.push_back(grid.rays[j].col); }
    return cols;
}

}  // namespace

void LidarSpec::validate() const {
    if (!finite(center)) { throw ValidationError("sensor.center: must be finite"); }
    if (!(azimuth_res > 0.0) || !std::isfinite(azimuth_res)) {
        throw ValidationError("sensor.azimuth_res: must be > 0");
    }
    if (!(azimuth_fov > 0.0) || azimuth_fov > kTwoPi + 1e-12) {
        throw ValidationError("sensor.azimuth_fov: must lie in (0, 360] degrees");
    }
    if (!(elevation_res > 0.0) || !std::isfinite(elevation_res)) {
        throw ValidationError("sensor.elevation_res: must be > 0");
    }
    if (!(elevation_min < elevation_max)) {
        throw ValidationError("sensor.elevation_min: must be < elevation_max");
    }
    if (elevation_min < -std::numbers::pi / 2 - 1e-12 || elevation_max > std::numbers::pi / 2 + 1e-12) {
        throw ValidationError("sensor.elevation_min/max: must lie within [-90, 90] degrees");
    }
    if (!(jitter_sigma >= 0.0) || !std::isfinite(jitter_sigma)) {
        throw ValidationError("sensor.jitter_sigma: must be >= 0");
    }
    if (azimuth_count() == 0) { throw ValidationError("sensor.azimuth_res: larger than the azimuth field"); }
}

std::size_t LidarSpec::azimuth_count() const {
    return static_cast<std::size_t>(std::llround(azimuth_fov / azimuth_res));
}

std::size_t LidarSpec::elevation_count() const {
    return static_cast<std::size_t>(std::floor((elevation_max - elevation_min) / elevation_res + 1e-9)) + 1;
}

Vec3 direction_from_angles(double azimuth, double elevation) {
    const double ce = std::cos(elevation);
    return {ce * std::sin(azimuth), ce * std::cos(azimuth), std::sin(elevation)};
}

EmissionGrid build_emission_grid(const LidarSpec &spec) {
    spec.validate();
    EmissionGrid grid;
    grid.rows = grid.lattice_rows = spec.elevation_count();
    grid.cols = grid.lattice_cols = spec.azimuth_count();
    grid.azimuth_origin = -std::numbers::pi;
    grid.azimuth_res = spec.azimuth_res;
    grid.elevation_origin = spec.elevation_min;
    grid.elevation_res = spec.elevation_res;
    grid.rays.reserve(grid.rows * grid.cols);

    std::mt19937_64 gen(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.jitter_sigma > 0.0 ? spec.jitter_sigma : 1.0);
    const bool jitter = spec.jitter_sigma > 0.0;

    for (std::size_t r = 0; r < grid.rows; ++r) {
        const double phi0 = grid.lattice_elevation(r);
        for (std::size_t c = 0; c < grid.cols; ++c) {
            const double theta0 = grid.lattice_azimuth(c);
            double theta = theta0;
            double phi = phi0;
            if (jitter) {
                const double d_theta = noise(gen);
                const double d_phi = noise(gen);
                theta += d_theta;
                phi += d_phi;
                grid.max_azimuth_jitter = std::max(grid.max_azimuth_jitter, std::abs(d_theta));
                grid.max_elevation_jitter = std::max(grid.max_elevation_jitter, std::abs(d_phi));
            }
            grid.rays.push_back({direction_from_angles(theta, phi), theta, phi, static_cast<std::uint32_t>(r),
                                 static_cast<std::uint32_t>(c)});
        }
    }
    return grid;
}

EmissionGrid window_subgrid(const EmissionGrid &grid, const AngularWindow &window) {
    const double az_pad = std::max(grid.azimuth_res, grid.max_azimuth_jitter + 1e-9);
    const double el_pad = std::max(grid.elevation_res, grid.max_elevation_jitter + 1e-9);

    std::vector<std::uint32_t> rows;
    for (const auto r : grid_rows(grid)) {
        const double phi = grid.lattice_elevation(r);
        if (phi >= window.elevation_lo - el_pad && phi <= window.elevation_hi + el_pad) { rows.push_back(r); }
    }

    std::vector<std::uint32_t> cols;
    const double width = window.azimuth_width();
    const double lo = window.azimuth_lo - az_pad;
    const double hi = window.azimuth_lo + width + az_pad;
    const bool full = hi - lo >= kTwoPi;
    for (const auto c : grid_cols(grid)) {
        const double theta = grid.lattice_azimuth(c);
        bool inside = full;
        for (int k = -1; k <= 2 && !inside; ++k) {
            const double shifted = theta + kTwoPi * k;
            inside = shifted >= lo && shifted <= hi;
        }
        if (inside) { cols.push_back(c); }
    }
    return select(grid, rows, cols);
}

EmissionGrid window_subgrid_unpadded(const EmissionGrid &grid, const AngularWindow &window) {
    std::vector<std::uint32_t> rows;
    for (const auto r : grid_rows(grid)) {
        const double phi = grid.lattice_elevation(r);
        if (phi >= window.elevation_lo && phi <= window.elevation_hi) { rows.push_back(r); }
    }
    std::vector<std::uint32_t> cols;
    for (const auto c : grid_cols(grid)) {
        const double theta = grid.lattice_azimuth(c);
        const bool inside = window.wraps() ? (theta >= window.azimuth_lo || theta < window.azimuth_hi)
                                           : (theta >= window.azimuth_lo && theta < window.azimuth_hi);
        if (inside) { cols.push_back(c); }
    }
    return select(grid, rows, cols);
}

}  // namespace lidarforge
