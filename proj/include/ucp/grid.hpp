#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ucp/geometry.hpp"

namespace ucp {

enum class NodeClass : std::uint8_t {
    outside = 0,
    interior = 1,
    neumann_boundary = 2,
    dirichlet_removed = 3,
};

// Uniform grid over (the truncation box of) G with one margin layer.
// Nodes are classified by point membership of their coordinates; the
// active dofs (interior + neumann_boundary) carry a contiguous index.
struct GridDiscretization {
    int dim = 0;
    double h = 0.0;
    Point origin;                  // coordinate of node index (0,...,0)
    std::vector<std::int64_t> shape;
    std::vector<NodeClass> node_class; // flat row-major over shape
    std::vector<std::int64_t> dof_of_node; // -1 where not active
    std::vector<std::int64_t> node_of_dof;
    std::int64_t n_dofs = 0;

    std::int64_t node_count() const;
    bool active(std::int64_t flat) const {
        const NodeClass c = node_class[static_cast<std::size_t>(flat)];
        return c == NodeClass::interior || c == NodeClass::neumann_boundary;
    }
    // coordinate of a flat node index
    Point node_coord(std::int64_t flat) const;
    void node_multi_index(std::int64_t flat, std::span<std::int64_t> out) const;
    std::int64_t flat_index(std::span<const std::int64_t> idx) const;
    // stride of axis a in the flat index
    std::int64_t stride(int axis) const;

    // Restriction of a per-dof vector to the dofs whose node lies in `set`.
    std::vector<std::uint8_t> dof_mask(const BallUnion& set) const;
};

// Classifies every node of the covering grid: outside when not in the
// closure of G, dirichlet_removed when the node point lies in S, else
// interior or neumann_boundary (a node with an outside neighbor).
// Emits a warning note (returned via grid.h checks elsewhere) rather than
// failing when h > min_radius(S)/4; fails when a ball could be invisible
// (h > min radius).
GridDiscretization classify_grid(const ConvexDomain& G, const BallUnion& S, double h);

} // namespace ucp
