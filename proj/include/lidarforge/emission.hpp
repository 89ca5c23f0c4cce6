#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include "lidarforge/geometry.hpp"
#include "lidarforge/vec3.hpp"

namespace lidarforge {

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Spinning LiDAR emission pattern. Defaults describe a 64-beam class sensor
/// mounted 2 m above flat ground: full azimuth sweep at 0.08 deg, elevation
/// from -27 deg to 0 deg at 0.4 deg.
struct LidarSpec {
    Vec3 center{0.0, 0.0, 2.0};
    double azimuth_fov = 2.0 * std::numbers::pi;
    double azimuth_res = deg_to_rad(0.08);
    double elevation_min = deg_to_rad(-27.0);
    double elevation_max = deg_to_rad(0.0);
    double elevation_res = deg_to_rad(0.4);
    double jitter_sigma = deg_to_rad(0.01);
    std::uint64_t seed = 0;

    /// Throws ValidationError naming the offending field.
    void validate() const;
    [[nodiscard]] std::size_t azimuth_count() const;
    [[nodiscard]] std::size_t elevation_count() const;
};

/// Row-major (elevation rows, azimuth columns) set of unit emission
/// directions. Direction for angles (theta, phi) is
/// [cos(phi) sin(theta), cos(phi) cos(theta), sin(phi)], so theta is measured
/// from +y towards +x and theta = -pi is the first column.
///
/// A grid produced by window_subgrid keeps the parent's lattice description
/// (lattice_rows/lattice_cols, resolutions, origins) and records, per ray, the
/// parent row and column it came from.
struct EmissionGrid {
    struct Ray {
        Vec3 direction;
        double azimuth = 0.0;    // perturbed theta
        double elevation = 0.0;  // perturbed phi
        std::uint32_t row = 0;   // lattice row in the full grid
        std::uint32_t col = 0;   // lattice column in the full grid
    };

    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Ray> rays;

    std::size_t lattice_rows = 0;
    std::size_t lattice_cols = 0;
    double azimuth_origin = -std::numbers::pi;
    double azimuth_res = 0.0;
    double elevation_origin = 0.0;
    double elevation_res = 0.0;
    /// Largest absolute jitter applied to any azimuth / elevation in the full grid.
    double max_azimuth_jitter = 0.0;
    double max_elevation_jitter = 0.0;

    [[nodiscard]] double lattice_azimuth(std::size_t col) const {
        return azimuth_origin + static_cast<double>(col) * azimuth_res;
    }
    [[nodiscard]] double lattice_elevation(std::size_t row) const {
        return elevation_origin + static_cast<double>(row) * elevation_res;
    }
    [[nodiscard]] std::size_t size() const { return rays.size(); }
};

Vec3 direction_from_angles(double azimuth, double elevation);

/// Builds the full jittered grid. Deterministic for a fixed spec.seed.
EmissionGrid build_emission_grid(const LidarSpec &spec);

/// Rays whose lattice angles fall in the closed window padded on each side by
/// one resolution step (or by the grid's largest jitter if that is larger, so
/// that a perturbed ray inside the window is never dropped). Keeps the
/// parent's row-major order. Azimuth windows with lo > hi wrap through +-pi.
EmissionGrid window_subgrid(const EmissionGrid &grid, const AngularWindow &window);

/// Same selection without padding. Partitions of the azimuth circle into
/// half-open windows select every column exactly once.
EmissionGrid window_subgrid_unpadded(const EmissionGrid &grid, const AngularWindow &window);

}  // namespace lidarforge
