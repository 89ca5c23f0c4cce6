#include "lidarforge/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lidarforge {

MeshIntersector::MeshIntersector(TriangleMesh mesh, std::uint32_t leaf_size)
    : mesh_(std::move(mesh)), leaf_size_(std::max<std::uint32_t>(1, leaf_size)) {
    const Aabb &box = mesh_.aabb();
    const double scale = std::max({std::abs(box.min.x), std::abs(box.min.y), std::abs(box.min.z),
                                   std::abs(box.max.x), std::abs(box.max.y), std::abs(box.max.z)});
    pad_ = 1e-6 * (1.0 + scale);

    const auto n = static_cast<std::uint32_t>(mesh_.size());
    order_.resize(n);
    std::vector<Vec3> centers(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        order_[i] = i;
        const auto &f = mesh_.face(i);
        centers[i] = (f.v0() + f.v1() + f.v2()) / 3.0;
    }
    nodes_.reserve(2 * n / leaf_size_ + 1);
    build(0, n, centers);
}

std::uint32_t MeshIntersector::build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3> &centers) {
    const auto index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();

    Aabb box = Aabb::empty();
    Aabb center_box = Aabb::empty();
    for (std::uint32_t i = begin; i < end; ++i) {
        const auto &f = mesh_.face(order_[i]);
        box.expand(f.v0());
        box.expand(f.v1());
        box.expand(f.v2());
        center_box.expand(centers[order_[i]]);
    }
    box.min = box.min - Vec3{pad_, pad_, pad_};
    box.max = box.max + Vec3{pad_, pad_, pad_};
    nodes_[index].box = box;

    const Vec3 spread = center_box.extent();
    if (end - begin <= leaf_size_ || std::max({spread.x, spread.y, spread.z}) <= 0.0) {
        nodes_[index].first = begin;
        nodes_[index].count = end - begin;
        return index;
    }

    int axis = 0;
    if (spread.y > spread[axis]) { axis = 1; }
    if (spread.z > spread[axis]) { axis = 2; }
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         const double ca = centers[a][axis];
                         const double cb = centers[b][axis];
                         return ca < cb || (ca == cb && a < b);
                     });

    build(begin, mid, centers);  // left child is always index + 1
    const std::uint32_t right = build(mid, end, centers);
    nodes_[index].first = right;
    nodes_[index].count = 0;
    return index;
}

bool MeshIntersector::slab(const Aabb &box, const Vec3 &c, const Vec3 &inv, const Vec3 &t, double limit,
                           double &t_near) const {
    double lo = 0.0;
    double hi = limit;
    for (int axis = 0; axis < 3; ++axis) {
        if (t[axis] == 0.0) {
            if (c[axis] < box.min[axis] || c[axis] > box.max[axis]) { return false; }
            continue;
        }
        double a = (box.min[axis] - c[axis]) * inv[axis];
        double b = (box.max[axis] - c[axis]) * inv[axis];
        if (a > b) { std::swap(a, b); }
        lo = std::max(lo, a);
        hi = std::min(hi, b);
        if (lo > hi) { return false; }
    }
    t_near = lo;
    return true;
}

std::optional<MeshHit> MeshIntersector::intersect(const Vec3 &c, const Vec3 &t) const {
    const Vec3 inv{t.x != 0.0 ? 1.0 / t.x : 0.0, t.y != 0.0 ? 1.0 / t.y : 0.0, t.z != 0.0 ? 1.0 / t.z : 0.0};
    std::optional<MeshHit> best;
    auto limit = [&] {
        return best ? best->s * (1.0 + 1e-9) + pad_ : std::numeric_limits<double>::infinity();
    };

    std::uint32_t stack[64];
    int top = 0;
    double t_near = 0.0;
    if (!slab(nodes_[0].box, c, inv, t, limit(), t_near)) { return std::nullopt; }
    stack[top++] = 0;

    while (top > 0) {
        const Node &node = nodes_[stack[--top]];
        if (node.count > 0) {
            for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
                const auto hit = ray_face_intersect(c, t, mesh_.face(order_[i]), order_[i]);
                if (hit && (!best || closer(*hit, *best))) { best = hit; }
            }
            continue;
        }
        const auto self = static_cast<std::uint32_t>(&node - nodes_.data());
        const std::uint32_t left = self + 1;
        const std::uint32_t right = node.first;
        double near_left = 0.0;
        double near_right = 0.0;
        const bool hit_left = slab(nodes_[left].box, c, inv, t, limit(), near_left);
        const bool hit_right = slab(nodes_[right].box, c, inv, t, limit(), near_right);
        // Push the farther child first so the nearer one is popped next.
        if (hit_left && hit_right) {
            if (near_left <= near_right) {
                stack[top++] = right;
                stack[top++] = left;
            } else {
                stack[top++] = left;
                stack[top++] = right;
            }
        } else if (hit_left) {
            stack[top++] = left;
        } else if (hit_right) {
            stack[top++] = right;
        }
    }
    return best;
}

std::optional<MeshHit> ray_mesh_intersect(const Vec3 &c, const Vec3 &t, const MeshIntersector &mesh) {
    return mesh.intersect(c, t);
}

}  // namespace lidarforge
