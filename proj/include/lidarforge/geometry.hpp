#pragma once

#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "lidarforge/vec3.hpp"

namespace lidarforge {

/// Rays closer to parallel than this (|n.t|) never intersect a plane.
inline constexpr double kParallelEpsilon = 1e-12;
/// Intersections at or below this ray parameter are discarded (sensor self-hit).
inline constexpr double kMinRayParameter = 1e-9;
/// Faces with area at or below this (m^2) are rejected on construction.
inline constexpr double kDegenerateArea = 1e-12;
/// Barycentric margin; points this close to an edge count as outside.
inline constexpr double kBoundaryEpsilon = 1e-12;

struct Aabb {
    Vec3 min{0.0, 0.0, 0.0};
    Vec3 max{0.0, 0.0, 0.0};

    static Aabb empty();

    void expand(const Vec3 &p);
    void expand(const Aabb &other);
    [[nodiscard]] bool is_empty() const { return min.x > max.x; }
    [[nodiscard]] bool contains(const Vec3 &p, double inflate = 0.0) const;
    [[nodiscard]] Vec3 center() const { return (min + max) * 0.5; }
    [[nodiscard]] Vec3 extent() const { return max - min; }
};

class TriangleFace {
public:
    /// Returns nullopt for degenerate (near zero-area) triangles.
    static std::optional<TriangleFace> make(const Vec3 &v0, const Vec3 &v1, const Vec3 &v2);

    [[nodiscard]] const Vec3 &v0() const { return v0_; }
    [[nodiscard]] const Vec3 &v1() const { return v1_; }
    [[nodiscard]] const Vec3 &v2() const { return v2_; }
    [[nodiscard]] const Vec3 &vertex(int i) const { return i == 0 ? v0_ : (i == 1 ? v1_ : v2_); }
    [[nodiscard]] const Vec3 &normal() const { return normal_; }
    [[nodiscard]] double area() const { return area_; }

private:
    TriangleFace(const Vec3 &v0, const Vec3 &v1, const Vec3 &v2, const Vec3 &n, double area)
        : v0_(v0), v1_(v1), v2_(v2), normal_(n), area_(area) {}

    Vec3 v0_, v1_, v2_;
    Vec3 normal_;
    double area_;
};

/// Immutable triangle soup with an exact bounding box. Never empty.
class TriangleMesh {
public:
    explicit TriangleMesh(std::vector<TriangleFace> faces);

    [[nodiscard]] std::span<const TriangleFace> faces() const { return faces_; }
    [[nodiscard]] std::size_t size() const { return faces_.size(); }
    [[nodiscard]] const TriangleFace &face(std::size_t i) const { return faces_[i]; }
    [[nodiscard]] const Aabb &aabb() const { return aabb_; }
    /// Mean of all face vertices (each face contributes its three corners).
    [[nodiscard]] Vec3 centroid() const;

private:
    std::vector<TriangleFace> faces_;
    Aabb aabb_;
};

/// Concatenates face lists; face indices of `b` are shifted by `a.size()`.
TriangleMesh merge_meshes(const TriangleMesh &a, const TriangleMesh &b);

/// Yaw about +z, optional mirror x -> -x, uniform scale (all about the mesh
/// centroid), then translation.
struct RigidPose {
    double yaw = 0.0;
    bool flip_x = false;
    double scale = 1.0;
    Vec3 translation{};

    /// Validates scale and wraps yaw into [0, 2*pi).
    static RigidPose make(double yaw, bool flip_x, double scale, const Vec3 &translation);
    static RigidPose identity() { return {}; }
};

double wrap_two_pi(double angle);
/// Wraps into (-pi, pi].
double wrap_pi(double angle);

struct PlaneHit {
    Vec3 point;
    double s = 0.0;
};

/// Ray/plane intersection through face.v0 with the face normal. `t` must be unit.
std::optional<PlaneHit> ray_plane_intersect(const Vec3 &c, const Vec3 &t, const TriangleFace &face);

struct Barycentric {
    double u = 0.0;
    double v = 0.0;
};

/// Solves p = v0 + u (v1 - v0) + v (v2 - v0) and accepts strictly interior points.
std::optional<Barycentric> point_in_triangle(const Vec3 &p, const TriangleFace &face);

/// Same solve without the acceptance test.
Barycentric barycentric_coordinates(const Vec3 &p, const TriangleFace &face);

struct MeshHit {
    Vec3 point;
    double s = 0.0;
    std::size_t face_index = 0;
};

/// Tests a single face: plane intersection followed by containment.
std::optional<MeshHit> ray_face_intersect(const Vec3 &c, const Vec3 &t, const TriangleFace &face,
                                          std::size_t face_index);

/// Strict ordering used to pick the nearest hit: smaller s, then smaller face index.
inline bool closer(const MeshHit &a, const MeshHit &b) {
    return a.s < b.s || (a.s == b.s && a.face_index < b.face_index);
}

/// Reference nearest-hit over every face.
std::optional<MeshHit> ray_mesh_intersect_brute_force(const Vec3 &c, const Vec3 &t, const TriangleMesh &mesh);

TriangleMesh transform_mesh(const TriangleMesh &mesh, const RigidPose &pose);

/// Maps one vertex the same way transform_mesh does, given the source centroid.
Vec3 transform_point(const Vec3 &v, const Vec3 &centroid, const RigidPose &pose);

/// Azimuth/elevation rectangle as seen from a point. Azimuth follows the
/// emission convention (measured from +y towards +x). When azimuth_lo >
/// azimuth_hi the interval passes through the +-pi seam.
struct AngularWindow {
    double azimuth_lo = -std::numbers::pi;
    double azimuth_hi = std::numbers::pi;
    double elevation_lo = -std::numbers::pi / 2;
    double elevation_hi = std::numbers::pi / 2;

    [[nodiscard]] bool wraps() const { return azimuth_lo > azimuth_hi; }
    /// Angular width of the azimuth interval in [0, 2*pi].
    [[nodiscard]] double azimuth_width() const;
};

/// Azimuth of a direction, in (-pi, pi], measured from +y.
double azimuth_of(const Vec3 &d);
/// Elevation above the xy plane.
double elevation_of(const Vec3 &d);

/// Bounds every direction from `c` into the box. Throws ValidationError when
/// `c` lies inside the box.
AngularWindow box_angular_window(const Aabb &box, const Vec3 &c);

AngularWindow mesh_angular_window(const TriangleMesh &mesh, const Vec3 &c);

}  // namespace lidarforge
