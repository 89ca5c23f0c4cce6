#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lidarforge/geometry.hpp"

namespace lidarforge {

/// Nearest-hit queries against one mesh through a bounding volume hierarchy.
///
/// Results are identical to ray_mesh_intersect_brute_force: leaf faces run the
/// same per-face test and ties resolve by face index, while node boxes are
/// padded so that floating-point error in the slab test can never cull the
/// winning face. The intersector is immutable after construction and may be
/// queried from any number of threads.
class MeshIntersector {
public:
    explicit MeshIntersector(TriangleMesh mesh, std::uint32_t leaf_size = 4);

    [[nodiscard]] std::optional<MeshHit> intersect(const Vec3 &c, const Vec3 &t) const;
    [[nodiscard]] const TriangleMesh &mesh() const { return mesh_; }
    [[nodiscard]] std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Aabb box;
        std::uint32_t first = 0;  // first face slot (leaf) or right child (inner)
        std::uint32_t count = 0;  // face count; 0 marks an inner node
    };

    std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3> &centers);
    [[nodiscard]] bool slab(const Aabb &box, const Vec3 &c, const Vec3 &inv, const Vec3 &t, double limit,
                            double &t_near) const;

    TriangleMesh mesh_;
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> order_;
    std::uint32_t leaf_size_;
    double pad_;
};

/// Convenience wrapper over MeshIntersector for one-off queries.
std::optional<MeshHit> ray_mesh_intersect(const Vec3 &c, const Vec3 &t, const MeshIntersector &mesh);

}  // namespace lidarforge
