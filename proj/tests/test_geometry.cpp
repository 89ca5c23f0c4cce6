#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "lidarforge/bvh.hpp"
#include "lidarforge/emission.hpp"
#include "lidarforge/error.hpp"
#include "lidarforge/geometry.hpp"
#include "test_support.hpp"

using namespace lidarforge;
using lidarforge::testing::box_mesh;
using lidarforge::testing::cube_mesh;
using lidarforge::testing::face;
using lidarforge::testing::random_unit;

namespace {

constexpr double kPi = std::numbers::pi;

TriangleFace unit_right_triangle() { return face({0, 0, 0}, {1, 0, 0}, {0, 1, 0}); }

}  // namespace

TEST(TriangleFace, NormalAndArea) {
    const auto f = unit_right_triangle();
    EXPECT_DOUBLE_EQ(f.normal().z, 1.0);
    EXPECT_DOUBLE_EQ(f.area(), 0.5);
    const auto g = face({0, 0, 0}, {0, 1, 0}, {1, 0, 0});
    EXPECT_DOUBLE_EQ(g.normal().z, -1.0);
}

TEST(TriangleFace, DegenerateRejected) {
    EXPECT_FALSE(TriangleFace::make({0, 0, 0}, {1, 1, 1}, {2, 2, 2}));
    EXPECT_FALSE(TriangleFace::make({0, 0, 0}, {0, 0, 0}, {1, 0, 0}));
    EXPECT_FALSE(TriangleFace::make({0, 0, 0}, {1e-7, 0, 0}, {0, 1e-6, 0}));
    EXPECT_TRUE(TriangleFace::make({0, 0, 0}, {1e-3, 0, 0}, {0, 1e-3, 0}));
}

TEST(TriangleMesh, EmptyRejectedAndAabbExact) {
    EXPECT_THROW(TriangleMesh({}), ValidationError);
    const auto m = box_mesh({-1, 2, -3}, {4, 5, 6});
    EXPECT_EQ(m.aabb().min, (Vec3{-1, 2, -3}));
    EXPECT_EQ(m.aabb().max, (Vec3{4, 5, 6}));
    EXPECT_EQ(m.size(), 12U);
}

TEST(RayPlane, AxisAligned) {
    const auto f = face({5, 0, 0}, {5, 1, 0}, {5, 0, 1});
    const auto hit = ray_plane_intersect({0, 0, 0}, {1, 0, 0}, f);
    ASSERT_TRUE(hit);
    EXPECT_EQ(hit->point, (Vec3{5, 0, 0}));
    EXPECT_DOUBLE_EQ(hit->s, 5.0);
}

TEST(RayPlane, SensorHeightRay) {
    const auto f = face({0, 10, 0}, {1, 10, 0}, {0, 10, 1});
    const auto hit = ray_plane_intersect({0, 0, 2}, {0, 1, 0}, f);
    ASSERT_TRUE(hit);
    EXPECT_EQ(hit->point, (Vec3{0, 10, 2}));
    EXPECT_DOUBLE_EQ(hit->s, 10.0);
}

TEST(RayPlane, ParallelAndBehindAreAbsent) {
    const auto f = face({5, 0, 0}, {5, 1, 0}, {5, 0, 1});
    EXPECT_FALSE(ray_plane_intersect({0, 0, 0}, {0, 1, 0}, f));
    EXPECT_FALSE(ray_plane_intersect({0, 0, 0}, {-1, 0, 0}, f));
    EXPECT_FALSE(ray_plane_intersect({5, 0, 0}, {1, 0, 0}, f));
    EXPECT_FALSE(ray_plane_intersect({5.0 - 1e-10, 0, 0}, {1, 0, 0}, f));
    EXPECT_TRUE(ray_plane_intersect({5.0 - 1e-6, 0, 0}, {1, 0, 0}, f));
}

TEST(RayPlane, ResidualProperty) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    std::size_t hits = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto f = TriangleFace::make({u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)});
        if (!f) { continue; }
        const Vec3 c{u(rng), u(rng), u(rng)};
        const Vec3 t = random_unit(rng);
        const auto hit = ray_plane_intersect(c, t, *f);
        if (!hit) { continue; }
        ++hits;
        EXPECT_GT(hit->s, kMinRayParameter);
        EXPECT_LE(std::abs(dot(f->normal(), hit->point - f->v0())), 1e-9 * std::max(1.0, hit->s));
        EXPECT_EQ(hit->point, c + t * hit->s);
    }
    EXPECT_GT(hits, 3000U);
}

TEST(PointInTriangle, InsideRecoversCoordinates) {
    const auto uv = point_in_triangle({0.25, 0.25, 0}, unit_right_triangle());
    ASSERT_TRUE(uv);
    EXPECT_NEAR(uv->u, 0.25, 1e-15);
    EXPECT_NEAR(uv->v, 0.25, 1e-15);
}

TEST(PointInTriangle, OutsideHypotenuse) { EXPECT_FALSE(point_in_triangle({0.6, 0.6, 0}, unit_right_triangle())); }

TEST(PointInTriangle, BoundaryIsOutside) {
    const auto f = unit_right_triangle();
    EXPECT_FALSE(point_in_triangle({0, 0, 0}, f));
    EXPECT_FALSE(point_in_triangle({1, 0, 0}, f));
    EXPECT_FALSE(point_in_triangle({0.5, 0, 0}, f));
    EXPECT_FALSE(point_in_triangle({0, 0.5, 0}, f));
    EXPECT_FALSE(point_in_triangle({0.5, 0.5, 0}, f));
    EXPECT_TRUE(point_in_triangle({1e-6, 1e-6, 0}, f));
}

TEST(PointInTriangle, ForwardConstructionOracle) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> c(-10.0, 10.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    int checked = 0;
    while (checked < 10000) {
        const auto f = TriangleFace::make({c(rng), c(rng), c(rng)}, {c(rng), c(rng), c(rng)}, {c(rng), c(rng), c(rng)});
        if (!f || f->area() < 1e-2) { continue; }
        double u = u01(rng);
        double v = u01(rng);
        if (u + v >= 1.0) {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        if (u < 1e-6 || v < 1e-6 || u + v > 1.0 - 1e-6) { continue; }
        const Vec3 p = f->v0() + (f->v1() - f->v0()) * u + (f->v2() - f->v0()) * v;
        const auto got = point_in_triangle(p, *f);
        ASSERT_TRUE(got);
        EXPECT_NEAR(got->u, u, 1e-9);
        EXPECT_NEAR(got->v, v, 1e-9);
        // Reflect across the edge opposite v0 to land outside.
        const Vec3 outside = f->v0() + (f->v1() - f->v0()) * (1.0 - v + 0.01) + (f->v2() - f->v0()) * (1.0 - u + 0.01);
        EXPECT_FALSE(point_in_triangle(outside, *f));
        ++checked;
    }
}

TEST(PointInTriangle, RigidMotionInvariance) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> c(-5.0, 5.0);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi);
    int checked = 0;
    while (checked < 10000) {
        const auto f = TriangleFace::make({c(rng), c(rng), 0}, {c(rng), c(rng), 0}, {c(rng), c(rng), 0});
        if (!f || f->area() < 0.1) { continue; }
        const Vec3 p{c(rng), c(rng), 0};
        const auto b = barycentric_coordinates(p, *f);
        const double margin = std::min({b.u, b.v, 1.0 - b.u - b.v});
        if (std::abs(margin) < 1e-6) { continue; }
        const bool inside = point_in_triangle(p, *f).has_value();
        // Random rotation (z-x-z Euler) plus translation applied jointly.
        const double a = ang(rng);
        const double bb = ang(rng);
        const double g = ang(rng);
        const Vec3 shift{c(rng), c(rng), c(rng)};
        auto rot = [&](Vec3 v) {
            v = {std::cos(a) * v.x - std::sin(a) * v.y, std::sin(a) * v.x + std::cos(a) * v.y, v.z};
            v = {v.x, std::cos(bb) * v.y - std::sin(bb) * v.z, std::sin(bb) * v.y + std::cos(bb) * v.z};
            v = {std::cos(g) * v.x - std::sin(g) * v.y, std::sin(g) * v.x + std::cos(g) * v.y, v.z};
            return v + shift;
        };
        const auto moved = TriangleFace::make(rot(f->v0()), rot(f->v1()), rot(f->v2()));
        ASSERT_TRUE(moved);
        EXPECT_EQ(point_in_triangle(rot(p), *moved).has_value(), inside);
        ++checked;
    }
}

TEST(RayMesh, CubeNearFace) {
    const auto cube = cube_mesh({10, 0, 2}, 1.0);
    const MeshIntersector bvh(cube);
    const auto hit = ray_mesh_intersect({0, 0.01, 2.003}, normalized(Vec3{10, -0.01, -0.003}), bvh);
    ASSERT_TRUE(hit);
    EXPECT_NEAR(hit->point.x, 9.5, 1e-12);
    EXPECT_DOUBLE_EQ(cube.face(hit->face_index).normal().x, -1.0);
    const auto brute = ray_mesh_intersect_brute_force({0, 0.01, 2.003}, normalized(Vec3{10, -0.01, -0.003}), cube);
    ASSERT_TRUE(brute);
    EXPECT_EQ(brute->face_index, hit->face_index);
}

TEST(RayMesh, MissingAabbIsAbsent) {
    const MeshIntersector bvh(cube_mesh({10, 0, 2}, 1.0));
    EXPECT_FALSE(bvh.intersect({0, 0, 2}, {0, 1, 0}));
    EXPECT_FALSE(bvh.intersect({0, 0, 2}, {-1, 0, 0}));
}

TEST(RayMesh, AcceleratedMatchesBruteForce) {
    std::mt19937_64 rng(21);
    const auto sphere = lidarforge::testing::icosphere(3, 2.0, {0, 0, 0}, &rng, 0.1);
    const auto soup = lidarforge::testing::random_soup(rng, 400, {0, 0, 0}, 2.0);
    for (const auto *mesh : {&sphere, &soup}) {
        const MeshIntersector bvh(*mesh);
        std::uniform_real_distribution<double> u(-6.0, 6.0);
        for (int i = 0; i < 5000; ++i) {
            const Vec3 c{u(rng), u(rng), u(rng)};
            const Vec3 aim{u(rng) / 3, u(rng) / 3, u(rng) / 3};
            const Vec3 t = i % 4 == 0 ? random_unit(rng) : normalized(aim - c);
            const auto a = bvh.intersect(c, t);
            const auto b = ray_mesh_intersect_brute_force(c, t, *mesh);
            ASSERT_EQ(a.has_value(), b.has_value());
            if (a) {
                EXPECT_EQ(a->face_index, b->face_index);
                EXPECT_EQ(a->s, b->s);
                EXPECT_EQ(a->point, b->point);
            }
        }
    }
}

TEST(RayMesh, AxisParallelRaysMatchBruteForce) {
    const auto boxes = merge_meshes(box_mesh({0, 0, 0}, {1, 1, 1}), box_mesh({2, 0, 0}, {3, 1, 1}));
    const MeshIntersector bvh(boxes, 1);
    for (double y = -0.25; y <= 1.25; y += 0.125) {
        for (double z = -0.25; z <= 1.25; z += 0.125) {
            for (const Vec3 t : {Vec3{1, 0, 0}, Vec3{-1, 0, 0}}) {
                const Vec3 c{t.x > 0 ? -1.0 : 4.0, y, z};
                const auto a = bvh.intersect(c, t);
                const auto b = ray_mesh_intersect_brute_force(c, t, boxes);
                ASSERT_EQ(a.has_value(), b.has_value());
                if (a) { EXPECT_EQ(a->face_index, b->face_index); }
            }
        }
    }
}

TEST(RayMesh, NearestHitMonotonicity) {
    std::mt19937_64 rng(3);
    const auto mesh = lidarforge::testing::random_soup(rng, 60, {0, 0, 0}, 1.5);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    int checked = 0;
    for (int i = 0; i < 2000 && checked < 200; ++i) {
        const Vec3 c{u(rng), u(rng), 5.0};
        const Vec3 t = normalized(Vec3{u(rng) / 4, u(rng) / 4, 0} - c);
        const auto hit = ray_mesh_intersect_brute_force(c, t, mesh);
        if (!hit) { continue; }
        std::uniform_int_distribution<std::size_t> pick(0, mesh.size() - 1);
        std::size_t drop = pick(rng);
        if (drop == hit->face_index) { continue; }
        std::vector<TriangleFace> faces(mesh.faces().begin(), mesh.faces().end());
        faces.erase(faces.begin() + static_cast<std::ptrdiff_t>(drop));
        const auto again = ray_mesh_intersect_brute_force(c, t, TriangleMesh(faces));
        ASSERT_TRUE(again);
        EXPECT_EQ(again->point, hit->point);
        EXPECT_EQ(again->face_index, hit->face_index - (drop < hit->face_index ? 1 : 0));
        ++checked;
    }
    EXPECT_EQ(checked, 200);
}

TEST(Transform, IdentityPose) {
    std::mt19937_64 rng(4);
    const auto mesh = lidarforge::testing::random_soup(rng, 50, {3, -2, 1}, 2.0);
    const auto out = transform_mesh(mesh, RigidPose::identity());
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        for (int k = 0; k < 3; ++k) { EXPECT_LE(norm(out.face(i).vertex(k) - mesh.face(i).vertex(k)), 1e-12); }
    }
}

TEST(Transform, YawPiMapsPoint) {
    const Vec3 p = transform_point({1, 0, 0}, {0, 0, 0}, RigidPose::make(kPi, false, 1.0, {}));
    EXPECT_NEAR(p.x, -1.0, 1e-15);
    EXPECT_NEAR(p.y, 0.0, 1e-15);
    EXPECT_NEAR(p.z, 0.0, 1e-15);
}

TEST(Transform, FlipMirrorsXAboutCentroid) {
    const Vec3 p = transform_point({3, 1, 2}, {1, 0, 0}, RigidPose::make(0.0, true, 1.0, {}));
    EXPECT_EQ(p, (Vec3{-1, 1, 2}));
}

TEST(Transform, ScaleThenTranslate) {
    const auto m = transform_mesh(cube_mesh({0, 0, 0}, 1.0), RigidPose::make(0.0, false, 2.0, {5, 0, 1}));
    EXPECT_EQ(m.aabb().min, (Vec3{4, -1, 0}));
    EXPECT_EQ(m.aabb().max, (Vec3{6, 1, 2}));
    EXPECT_NEAR(m.face(0).normal().z, -1.0, 1e-15);
}

TEST(Transform, YawComposition) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi);
    const auto mesh = lidarforge::testing::random_soup(rng, 40, {2, 1, 0}, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double a = ang(rng);
        const double b = ang(rng);
        const auto twice =
            transform_mesh(transform_mesh(mesh, RigidPose::make(a, false, 1.0, {})), RigidPose::make(b, false, 1.0, {}));
        const auto once = transform_mesh(mesh, RigidPose::make(a + b, false, 1.0, {}));
        for (std::size_t f = 0; f < mesh.size(); ++f) {
            for (int k = 0; k < 3; ++k) { EXPECT_LE(norm(twice.face(f).vertex(k) - once.face(f).vertex(k)), 1e-9); }
        }
    }
}

TEST(Transform, InvalidPoseRejected) {
    EXPECT_THROW(RigidPose::make(0.0, false, 0.0, {}), ValidationError);
    EXPECT_THROW(RigidPose::make(0.0, false, -1.0, {}), ValidationError);
    RigidPose bad;
    bad.scale = 0.0;
    EXPECT_THROW(transform_mesh(cube_mesh({0, 0, 0}, 1.0), bad), ValidationError);
    EXPECT_NEAR(RigidPose::make(-kPi / 2, false, 1.0, {}).yaw, 1.5 * kPi, 1e-15);
    EXPECT_NEAR(RigidPose::make(5 * kPi, false, 1.0, {}).yaw, kPi, 1e-12);
}

TEST(AngularWindow, CubeOnPlusX) {
    const auto w = mesh_angular_window(cube_mesh({10, 0, 0}, 1.0), {0, 0, 2});
    EXPECT_FALSE(w.wraps());
    const double mid = 0.5 * (w.azimuth_lo + w.azimuth_hi);
    EXPECT_NEAR(mid, kPi / 2, 1e-12);
    const double half = 0.5 * (w.azimuth_hi - w.azimuth_lo);
    // Bounded by the bearings of the near and far corner columns.
    EXPECT_GE(half, std::atan(0.5 / 10.5));
    EXPECT_LE(half, std::atan(0.5 / 9.5) + 1e-15);
    EXPECT_NEAR(rad_to_deg(half), 2.9, 0.15);
    EXPECT_NEAR(w.elevation_hi, std::atan2(-1.5, std::hypot(10.5, 0.5)), 1e-12);
    EXPECT_NEAR(w.elevation_lo, std::atan2(-2.5, 9.5), 1e-12);
}

TEST(AngularWindow, SymmetricAboutPlusY) {
    const auto w = box_angular_window({{-1, 8, 0}, {1, 9, 1}}, {0, 0, 2});
    EXPECT_NEAR(w.azimuth_lo, -w.azimuth_hi, 1e-15);
}

TEST(AngularWindow, WrapsBehindSensor) {
    const auto w = box_angular_window({{-1, -9, 0}, {1, -8, 1}}, {0, 0, 2});
    EXPECT_TRUE(w.wraps());
    EXPECT_NEAR(w.azimuth_width(), 2.0 * std::atan2(1.0, 8.0), 1e-12);
}

TEST(AngularWindow, OverheadFootprintIsFullCircle) {
    const auto w = box_angular_window({{-1, -1, 5}, {1, 1, 6}}, {0, 0, 2});
    EXPECT_NEAR(w.azimuth_width(), 2.0 * kPi, 1e-15);
    EXPECT_NEAR(w.elevation_hi, kPi / 2, 1e-15);
}

TEST(AngularWindow, SensorInsideRejected) {
    EXPECT_THROW(box_angular_window({{-1, -1, 0}, {1, 1, 3}}, {0, 0, 2}), ValidationError);
}

TEST(AngularWindow, RaysOutsidePaddedWindowMiss) {
    std::mt19937_64 rng(13);
    LidarSpec spec;
    spec.azimuth_res = deg_to_rad(1.0);
    spec.elevation_res = deg_to_rad(1.0);
    spec.elevation_min = deg_to_rad(-30.0);
    spec.elevation_max = deg_to_rad(10.0);
    spec.jitter_sigma = deg_to_rad(0.2);
    spec.seed = 2;
    const auto grid = build_emission_grid(spec);
    std::uniform_real_distribution<double> pos(-12.0, 12.0);
    std::uniform_real_distribution<double> z(-1.0, 4.0);
    int meshes = 0;
    std::size_t outside_hits = 0;
    std::size_t inside_rays = 0;
    while (meshes < 100) {
        const Vec3 center{pos(rng), pos(rng), z(rng)};
        const auto mesh = lidarforge::testing::random_soup(rng, 20, center, 1.0 + 0.5 * (meshes % 3));
        if (mesh.aabb().contains(spec.center)) { continue; }
        ++meshes;
        const auto window = window_subgrid(grid, mesh_angular_window(mesh, spec.center));
        std::vector<std::uint8_t> in(grid.size(), 0);
        for (const auto &r : window.rays) { in[r.row * grid.cols + r.col] = 1; }
        inside_rays += window.size();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (in[i] == 0 && ray_mesh_intersect_brute_force(spec.center, grid.rays[i].direction, mesh)) {
                ++outside_hits;
            }
        }
    }
    EXPECT_EQ(outside_hits, 0U);
    EXPECT_LT(inside_rays, 100 * grid.size() / 4);
}
