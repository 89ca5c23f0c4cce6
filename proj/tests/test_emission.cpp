#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "lidarforge/emission.hpp"
#include "lidarforge/error.hpp"

using namespace lidarforge;

namespace {

constexpr double kPi = std::numbers::pi;

LidarSpec no_jitter() {
    LidarSpec s;
    s.jitter_sigma = 0.0;
    return s;
}

double sample_sd(const std::vector<double> &xs) {
    double mean = 0.0;
    for (const double x : xs) { mean += x; }
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (const double x : xs) { ss += (x - mean) * (x - mean); }
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

TEST(EmissionGrid, DefaultDimensions) {
    const auto grid = build_emission_grid(LidarSpec{});
    EXPECT_EQ(grid.cols, 4500U);
    EXPECT_EQ(grid.rows, 68U);
    EXPECT_EQ(grid.size(), 4500U * 68U);
    for (const auto &r : grid.rays) { ASSERT_NEAR(norm(r.direction), 1.0, 1e-12); }
}

TEST(EmissionGrid, LatticeWithoutJitter) {
    const auto grid = build_emission_grid(no_jitter());
    for (std::size_t i = 0; i < grid.size(); i += 97) {
        const auto &r = grid.rays[i];
        const double theta = -kPi + static_cast<double>(r.col) * deg_to_rad(0.08);
        const double phi = deg_to_rad(-27.0) + static_cast<double>(r.row) * deg_to_rad(0.4);
        EXPECT_EQ(r.azimuth, theta);
        EXPECT_EQ(r.elevation, phi);
        EXPECT_EQ(r.direction,
                  (Vec3{std::cos(phi) * std::sin(theta), std::cos(phi) * std::cos(theta), std::sin(phi)}));
        EXPECT_EQ(i, r.row * grid.cols + r.col);
    }
    EXPECT_EQ(grid.max_azimuth_jitter, 0.0);
    const auto again = build_emission_grid(no_jitter());
    for (std::size_t i = 0; i < grid.size(); ++i) { ASSERT_EQ(grid.rays[i].direction, again.rays[i].direction); }
}

TEST(EmissionGrid, AzimuthZeroPointsAlongPlusY) {
    const auto d = direction_from_angles(0.0, 0.0);
    EXPECT_EQ(d, (Vec3{0, 1, 0}));
    const auto e = direction_from_angles(kPi / 2, 0.0);
    EXPECT_NEAR(e.x, 1.0, 1e-15);
    EXPECT_NEAR(e.y, 0.0, 1e-15);
}

TEST(EmissionGrid, MonotoneLayout) {
    const auto grid = build_emission_grid(LidarSpec{});
    for (std::size_t c = 1; c < grid.cols; ++c) { ASSERT_LT(grid.lattice_azimuth(c - 1), grid.lattice_azimuth(c)); }
    for (std::size_t r = 1; r < grid.rows; ++r) {
        ASSERT_LT(grid.lattice_elevation(r - 1), grid.lattice_elevation(r));
    }
    EXPECT_LE(grid.lattice_elevation(grid.rows - 1), deg_to_rad(0.0) + 1e-12);
}

TEST(EmissionGrid, SeedDeterminism) {
    LidarSpec spec;
    spec.seed = 77;
    const auto a = build_emission_grid(spec);
    const auto b = build_emission_grid(spec);
    spec.seed = 78;
    const auto c = build_emission_grid(spec);
    std::size_t differ = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_EQ(a.rays[i].azimuth, b.rays[i].azimuth);
        ASSERT_EQ(a.rays[i].elevation, b.rays[i].elevation);
        differ += a.rays[i].azimuth != c.rays[i].azimuth ? 1 : 0;
    }
    EXPECT_GT(differ, a.size() / 2);
}

TEST(EmissionGrid, JitterSigmaRecovered) {
    LidarSpec spec;
    spec.azimuth_res = deg_to_rad(0.02);
    spec.seed = 1234;
    const auto grid = build_emission_grid(spec);
    ASSERT_GE(grid.size(), 1000000U);
    std::vector<double> d_theta;
    std::vector<double> d_phi;
    d_theta.reserve(grid.size());
    d_phi.reserve(grid.size());
    for (const auto &r : grid.rays) {
        d_theta.push_back(r.azimuth - grid.lattice_azimuth(r.col));
        d_phi.push_back(r.elevation - grid.lattice_elevation(r.row));
    }
    EXPECT_NEAR(sample_sd(d_theta) / spec.jitter_sigma, 1.0, 0.02);
    EXPECT_NEAR(sample_sd(d_phi) / spec.jitter_sigma, 1.0, 0.02);
}

TEST(EmissionGrid, RowCountUsesFloorPlusOne) {
    LidarSpec spec = no_jitter();
    spec.elevation_min = deg_to_rad(-10.0);
    spec.elevation_max = deg_to_rad(0.0);
    spec.elevation_res = deg_to_rad(3.0);
    EXPECT_EQ(spec.elevation_count(), 4U);
    spec.elevation_res = deg_to_rad(2.5);
    EXPECT_EQ(spec.elevation_count(), 5U);
    spec.azimuth_fov = deg_to_rad(90.0);
    spec.azimuth_res = deg_to_rad(1.0);
    const auto grid = build_emission_grid(spec);
    EXPECT_EQ(grid.cols, 90U);
    EXPECT_EQ(grid.rows, 5U);
}

TEST(EmissionGrid, InvalidSpecsRejected) {
    auto expect_bad = [](auto mutate) {
        LidarSpec s;
        mutate(s);
        EXPECT_THROW(build_emission_grid(s), ValidationError);
    };
    expect_bad([](LidarSpec &s) { s.azimuth_res = 0.0; });
    expect_bad([](LidarSpec &s) { s.elevation_res = -1.0; });
    expect_bad([](LidarSpec &s) { s.elevation_min = s.elevation_max; });
    expect_bad([](LidarSpec &s) { s.jitter_sigma = -1e-3; });
    expect_bad([](LidarSpec &s) { s.azimuth_fov = 0.0; });
    expect_bad([](LidarSpec &s) { s.center.x = std::nan(""); });
}

TEST(WindowSubgrid, FullFieldIsIdentity) {
    const auto grid = build_emission_grid(LidarSpec{});
    const auto sub = window_subgrid(grid, AngularWindow{});
    ASSERT_EQ(sub.size(), grid.size());
    EXPECT_EQ(sub.rows, grid.rows);
    EXPECT_EQ(sub.cols, grid.cols);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        ASSERT_EQ(sub.rays[i].direction, grid.rays[i].direction);
        ASSERT_EQ(sub.rays[i].row, grid.rays[i].row);
        ASSERT_EQ(sub.rays[i].col, grid.rays[i].col);
    }
}

TEST(WindowSubgrid, SmallWindowAtMostFiveByFive) {
    const auto grid = build_emission_grid(no_jitter());
    const double ar = grid.azimuth_res;
    const double er = grid.elevation_res;
    AngularWindow w;
    w.azimuth_lo = grid.lattice_azimuth(1000) + 0.5 * ar;
    w.azimuth_hi = w.azimuth_lo + 3 * ar;
    w.elevation_lo = grid.lattice_elevation(20) + 0.5 * er;
    w.elevation_hi = w.elevation_lo + 3 * er;
    const auto sub = window_subgrid(grid, w);
    EXPECT_LE(sub.rows, 5U);
    EXPECT_LE(sub.cols, 5U);
    EXPECT_EQ(sub.size(), sub.rows * sub.cols);
    EXPECT_GE(sub.size(), 9U);
}

TEST(WindowSubgrid, WrappingWindowContainsSeamColumn) {
    const auto grid = build_emission_grid(no_jitter());
    AngularWindow w;
    w.azimuth_lo = deg_to_rad(175.0);
    w.azimuth_hi = deg_to_rad(-175.0);
    ASSERT_TRUE(w.wraps());
    const auto sub = window_subgrid(grid, w);
    std::set<std::uint32_t> cols;
    for (const auto &r : sub.rays) { cols.insert(r.col); }
    EXPECT_TRUE(cols.count(0));
    EXPECT_TRUE(cols.count(static_cast<std::uint32_t>(grid.cols - 1)));
    EXPECT_FALSE(cols.count(static_cast<std::uint32_t>(grid.cols / 2)));
    // 10 degrees plus one step of padding each side.
    EXPECT_NEAR(static_cast<double>(cols.size()), 10.0 / 0.08 + 3, 1.0);
}

TEST(WindowSubgrid, PreservesRowMajorOrder) {
    const auto grid = build_emission_grid(LidarSpec{});
    AngularWindow w;
    w.azimuth_lo = deg_to_rad(170.0);
    w.azimuth_hi = deg_to_rad(-160.0);
    w.elevation_lo = deg_to_rad(-10.0);
    w.elevation_hi = deg_to_rad(-5.0);
    const auto sub = window_subgrid(grid, w);
    ASSERT_GT(sub.size(), 0U);
    for (std::size_t i = 1; i < sub.size(); ++i) {
        const auto a = sub.rays[i - 1].row * grid.cols + sub.rays[i - 1].col;
        const auto b = sub.rays[i].row * grid.cols + sub.rays[i].col;
        ASSERT_LT(a, b);
    }
    for (const auto &r : sub.rays) { ASSERT_EQ(r.direction, grid.rays[r.row * grid.cols + r.col].direction); }
}

TEST(WindowSubgrid, MissingWindowIsEmpty) {
    const auto grid = build_emission_grid(no_jitter());
    AngularWindow w;
    w.elevation_lo = deg_to_rad(40.0);
    w.elevation_hi = deg_to_rad(60.0);
    EXPECT_EQ(window_subgrid(grid, w).size(), 0U);
}

TEST(WindowSubgrid, UnpaddedPartitionCoversOnce) {
    const auto grid = build_emission_grid(LidarSpec{});
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> cuts(1 + trial % 7);
        for (auto &c : cuts) { c = u(rng); }
        std::sort(cuts.begin(), cuts.end());
        std::vector<int> seen(grid.size(), 0);
        for (std::size_t i = 0; i < cuts.size(); ++i) {
            AngularWindow w;
            w.azimuth_lo = cuts[i];
            w.azimuth_hi = i + 1 < cuts.size() ? cuts[i + 1] : cuts[0];
            if (cuts.size() == 1) {
                w.azimuth_lo = -kPi;
                w.azimuth_hi = kPi;
            }
            for (const auto &r : window_subgrid_unpadded(grid, w).rays) { ++seen[r.row * grid.cols + r.col]; }
        }
        for (const int s : seen) { ASSERT_EQ(s, 1); }
    }
}

TEST(WindowSubgrid, PaddingCoversLargestJitter) {
    LidarSpec spec;
    spec.jitter_sigma = deg_to_rad(0.3);
    const auto grid = build_emission_grid(spec);
    EXPECT_GT(grid.max_azimuth_jitter, grid.azimuth_res);
    AngularWindow w;
    w.azimuth_lo = deg_to_rad(10.0);
    w.azimuth_hi = deg_to_rad(12.0);
    w.elevation_lo = deg_to_rad(-12.0);
    w.elevation_hi = deg_to_rad(-8.0);
    const auto sub = window_subgrid(grid, w);
    std::set<std::size_t> in;
    for (const auto &r : sub.rays) { in.insert(r.row * grid.cols + r.col); }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto &r = grid.rays[i];
        const bool inside = r.azimuth >= w.azimuth_lo && r.azimuth <= w.azimuth_hi && r.elevation >= w.elevation_lo &&
                            r.elevation <= w.elevation_hi;
        if (inside) { ASSERT_TRUE(in.count(i)) << i; }
    }
}
