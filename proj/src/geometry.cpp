#include "lidarforge/geometry.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <string>

#include "lidarforge/error.hpp"

namespace lidarforge {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

Aabb Aabb::empty() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {{inf, inf, inf}, {-inf, -inf, -inf}};
}

void Aabb::expand(const Vec3 &p) {
    min = component_min(min, p);
    max = component_max(max, p);
}

void Aabb::expand(const Aabb &other) {
    min = component_min(min, other.min);
    max = component_max(max, other.max);
}

bool Aabb::contains(const Vec3 &p, double inflate) const {
    return p.x >= min.x - inflate && p.x <= max.x + inflate && p.y >= min.y - inflate &&
           p.y <= max.y + inflate && p.z >= min.z - inflate && p.z <= max.z + inflate;
}

std::optional<TriangleFace> TriangleFace::make(const Vec3 &v0, const Vec3 &v1, const Vec3 &v2) {
    const Vec3 n = cross(v1 - v0, v2 - v0);
    const double twice_area = norm(n);
    const double area = 0.5 * twice_area;
    if (!(area > kDegenerateArea) || !std::isfinite(area)) { return std::nullopt; }
    return TriangleFace(v0, v1, v2, n / twice_area, area);
}

TriangleMesh::TriangleMesh(std::vector<TriangleFace> faces) : faces_(std::move(faces)), aabb_(Aabb::empty()) {
    if (faces_.empty()) { throw ValidationError("triangle mesh must contain at least one face"); }
    for (const auto &f : faces_) {
        aabb_.expand(f.v0());
        aabb_.expand(f.v1());
        aabb_.expand(f.v2());
    }
}

Vec3 TriangleMesh::centroid() const {
    Vec3 sum{};
    for (const auto &f : faces_) {
        sum += f.v0();
        sum += f.v1();
        sum += f.v2();
    }
    return sum / (3.0 * static_cast<double>(faces_.size()));
}

TriangleMesh merge_meshes(const TriangleMesh &a, const TriangleMesh &b) {
    std::vector<TriangleFace> faces(a.faces().begin(), a.faces().end());
    faces.insert(faces.end(), b.faces().begin(), b.faces().end());
    return TriangleMesh(std::move(faces));
}

double wrap_two_pi(double angle) {
    double r = std::fmod(angle, kTwoPi);
    if (r < 0.0) { r += kTwoPi; }
    if (r >= kTwoPi) { r = 0.0; }
    return r;
}

double wrap_pi(double angle) {
    double r = std::fmod(angle + std::numbers::pi, kTwoPi);
    if (r <= 0.0) { r += kTwoPi; }
    return r - std::numbers::pi;
}

RigidPose RigidPose::make(double yaw, bool flip_x, double scale, const Vec3 &translation) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw ValidationError("pose scale must be positive, got " + std::to_string(scale));
    }
    return RigidPose{wrap_two_pi(yaw), flip_x, scale, translation};
}

std::optional<PlaneHit> ray_plane_intersect(const Vec3 &c, const Vec3 &t, const TriangleFace &face) {
    assert(std::abs(norm(t) - 1.0) <= 1e-9);
    const Vec3 &n = face.normal();
    const double denom = dot(n, t);
    if (std::abs(denom) < kParallelEpsilon) { return std::nullopt; }
    const double s = dot(n, face.v0() - c) / denom;
    if (!(s > kMinRayParameter)) { return std::nullopt; }
    return PlaneHit{c + t * s, s};
}

Barycentric barycentric_coordinates(const Vec3 &p, const TriangleFace &face) {
    const Vec3 e1 = face.v1() - face.v0();
    const Vec3 e2 = face.v2() - face.v0();
    const Vec3 w = p - face.v0();
    const double d11 = dot(e1, e1);
    const double d12 = dot(e1, e2);
    const double d22 = dot(e2, e2);
    const double w1 = dot(w, e1);
    const double w2 = dot(w, e2);
    const double det = d11 * d22 - d12 * d12;
    return {(d22 * w1 - d12 * w2) / det, (d11 * w2 - d12 * w1) / det};
}

std::optional<Barycentric> point_in_triangle(const Vec3 &p, const TriangleFace &face) {
    const Barycentric b = barycentric_coordinates(p, face);
    if (b.u > kBoundaryEpsilon && b.v > kBoundaryEpsilon && b.u + b.v < 1.0 - kBoundaryEpsilon) { return b; }
    return std::nullopt;
}

std::optional<MeshHit> ray_face_intersect(const Vec3 &c, const Vec3 &t, const TriangleFace &face,
                                          std::size_t face_index) {
    const auto plane = ray_plane_intersect(c, t, face);
    if (!plane) { return std::nullopt; }
    if (!point_in_triangle(plane->point, face)) { return std::nullopt; }
    return MeshHit{plane->point, plane->s, face_index};
}

std::optional<MeshHit> ray_mesh_intersect_brute_force(const Vec3 &c, const Vec3 &t, const TriangleMesh &mesh) {
    std::optional<MeshHit> best;
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        const auto hit = ray_face_intersect(c, t, mesh.face(i), i);
        if (hit && (!best || closer(*hit, *best))) { best = hit; }
    }
    return best;
}

Vec3 transform_point(const Vec3 &v, const Vec3 &centroid, const RigidPose &pose) {
    Vec3 d = v - centroid;
    if (pose.flip_x) { d.x = -d.x; }
    d = d * pose.scale;
    const double cy = std::cos(pose.yaw);
    const double sy = std::sin(pose.yaw);
    const Vec3 r{cy * d.x - sy * d.y, sy * d.x + cy * d.y, d.z};
    return centroid + r + pose.translation;
}

TriangleMesh transform_mesh(const TriangleMesh &mesh, const RigidPose &pose) {
    if (!(pose.scale > 0.0) || !std::isfinite(pose.scale)) {
        throw ValidationError("pose scale must be positive, got " + std::to_string(pose.scale));
    }
    const Vec3 centroid = mesh.centroid();
    std::vector<TriangleFace> faces;
    faces.reserve(mesh.size());
    for (const auto &f : mesh.faces()) {
        auto g = TriangleFace::make(transform_point(f.v0(), centroid, pose), transform_point(f.v1(), centroid, pose),
                                    transform_point(f.v2(), centroid, pose));
        if (!g) { throw ValidationError("pose scale collapses a mesh face to zero area"); }
        faces.push_back(*g);
    }
    return TriangleMesh(std::move(faces));
}

double AngularWindow::azimuth_width() const {
    return wraps() ? azimuth_hi - azimuth_lo + kTwoPi : azimuth_hi - azimuth_lo;
}

double azimuth_of(const Vec3 &d) { return std::atan2(d.x, d.y); }

double elevation_of(const Vec3 &d) { return std::atan2(d.z, std::hypot(d.x, d.y)); }

AngularWindow box_angular_window(const Aabb &box, const Vec3 &c) {
    if (box.contains(c)) { throw ValidationError("angular window undefined: sensor center lies inside the bounding box"); }

    const double corners[4][2] = {
        {box.min.x, box.min.y}, {box.max.x, box.min.y}, {box.max.x, box.max.y}, {box.min.x, box.max.y}};

    // Horizontal distance range from c to the footprint rectangle.
    const double dx = std::max({box.min.x - c.x, 0.0, c.x - box.max.x});
    const double dy = std::max({box.min.y - c.y, 0.0, c.y - box.max.y});
    const double rho_min = std::hypot(dx, dy);
    double rho_max = 0.0;
    for (const auto &k : corners) { rho_max = std::max(rho_max, std::hypot(k[0] - c.x, k[1] - c.y)); }

    AngularWindow w;
    if (rho_min > 0.0) {
        const double base = std::atan2(corners[0][0] - c.x, corners[0][1] - c.y);
        double lo = 0.0;
        double hi = 0.0;
        for (const auto &k : corners) {
            const double off = wrap_pi(std::atan2(k[0] - c.x, k[1] - c.y) - base);
            lo = std::min(lo, off);
            hi = std::max(hi, off);
        }
        w.azimuth_lo = wrap_pi(base + lo);
        w.azimuth_hi = wrap_pi(base + hi);
    }

    const double dz_hi = box.max.z - c.z;
    const double dz_lo = box.min.z - c.z;
    w.elevation_hi = std::atan2(dz_hi, dz_hi >= 0.0 ? rho_min : rho_max);
    w.elevation_lo = std::atan2(dz_lo, dz_lo <= 0.0 ? rho_min : rho_max);
    return w;
}

AngularWindow mesh_angular_window(const TriangleMesh &mesh, const Vec3 &c) {
    return box_angular_window(mesh.aabb(), c);
}

}  // namespace lidarforge
