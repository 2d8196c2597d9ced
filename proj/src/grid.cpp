#include "ucp/grid.hpp"

#include <cmath>
#include <string>

#include "ucp/errors.hpp"
#include "ucp/parallel.hpp"

namespace ucp {

std::int64_t GridDiscretization::node_count() const {
    std::int64_t n = 1;
    for (auto s : shape) n *= s;
    return n;
}

Point GridDiscretization::node_coord(std::int64_t flat) const {
    Point x(static_cast<std::size_t>(dim));
    for (int i = dim - 1; i >= 0; --i) {
        const std::int64_t s = shape[static_cast<std::size_t>(i)];
        x[static_cast<std::size_t>(i)] = origin[static_cast<std::size_t>(i)] + h * static_cast<double>(flat % s);
        flat /= s;
    }
    return x;
}

void GridDiscretization::node_multi_index(std::int64_t flat, std::span<std::int64_t> out) const {
    for (int i = dim - 1; i >= 0; --i) {
        const std::int64_t s = shape[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(i)] = flat % s;
        flat /= s;
    }
}

std::int64_t GridDiscretization::flat_index(std::span<const std::int64_t> idx) const {
    std::int64_t flat = 0;
    for (int i = 0; i < dim; ++i) flat = flat * shape[static_cast<std::size_t>(i)] + idx[static_cast<std::size_t>(i)];
    return flat;
}

std::int64_t GridDiscretization::stride(int axis) const {
    std::int64_t s = 1;
    for (int i = dim - 1; i > axis; --i) s *= shape[static_cast<std::size_t>(i)];
    return s;
}

std::vector<std::uint8_t> GridDiscretization::dof_mask(const BallUnion& set) const {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(n_dofs), 0);
    if (set.empty()) return mask;
    const double eps = 1e-9 * h;
    for (std::int64_t dof = 0; dof < n_dofs; ++dof) {
        const Point x = node_coord(node_of_dof[static_cast<std::size_t>(dof)]);
        if (set.contains(x, eps)) mask[static_cast<std::size_t>(dof)] = 1;
    }
    return mask;
}

GridDiscretization classify_grid(const ConvexDomain& G, const BallUnion& S, double h) {
    if (!(h > 0.0)) throw invalid_params("classify_grid: h must be positive");

    GridDiscretization g;
    g.dim = G.dim();
    g.h = h;

    Point lo, hi;
    G.sampling_box(lo, hi);
    g.origin.resize(static_cast<std::size_t>(g.dim));
    g.shape.resize(static_cast<std::size_t>(g.dim));
    for (int i = 0; i < g.dim; ++i) {
        // one margin layer beyond the covering range on each side
        const double span = hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)];
        const std::int64_t inner = static_cast<std::int64_t>(std::ceil(span / h - 1e-9)) + 1;
        g.origin[static_cast<std::size_t>(i)] = lo[static_cast<std::size_t>(i)] - h;
        g.shape[static_cast<std::size_t>(i)] = inner + 2;
    }

    const std::int64_t total = g.node_count();
    if (total > (std::int64_t(1) << 31))
        throw invalid_params("classify_grid: grid too large");
    g.node_class.assign(static_cast<std::size_t>(total), NodeClass::outside);
    g.dof_of_node.assign(static_cast<std::size_t>(total), -1);

    // every obstacle ball must contain at least one grid node; the nearest
    // node to the center decides (it is the closest node to the ball)
    for (std::size_t bi = 0; bi < S.size(); ++bi) {
        double d2 = 0.0;
        for (int i = 0; i < g.dim; ++i) {
            const double rel = (S.centers[bi][static_cast<std::size_t>(i)] -
                                g.origin[static_cast<std::size_t>(i)]) / h;
            std::int64_t q = static_cast<std::int64_t>(std::llround(rel));
            q = std::max<std::int64_t>(0, std::min(q, g.shape[static_cast<std::size_t>(i)] - 1));
            const double x = g.origin[static_cast<std::size_t>(i)] + h * static_cast<double>(q);
            const double dd = x - S.centers[bi][static_cast<std::size_t>(i)];
            d2 += dd * dd;
        }
        if (d2 > S.radii[bi] * S.radii[bi] + 1e-12 * h * h)
            throw invalid_params("classify_grid: an obstacle ball contains no grid node "
                                 "(grid too coarse for radius " + std::to_string(S.radii[bi]) + ")");
    }

    const double eps = 1e-9 * h;
    // pass 1: inside / removed
    parallel_for(total, [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t f = b; f < e; ++f) {
            const Point x = g.node_coord(f);
            if (!G.contains(x, eps)) continue;
            g.node_class[static_cast<std::size_t>(f)] =
                (!S.empty() && S.contains(x, eps)) ? NodeClass::dirichlet_removed : NodeClass::interior;
        }
    });
    // pass 2: boundary = active node with an outside lattice neighbor.
    // Snapshot the outside mask so reclassification cannot race with reads.
    std::vector<std::uint8_t> outside(static_cast<std::size_t>(total));
    for (std::int64_t f = 0; f < total; ++f)
        outside[static_cast<std::size_t>(f)] = g.node_class[static_cast<std::size_t>(f)] == NodeClass::outside;
    parallel_for(total, [&](std::int64_t b, std::int64_t e) {
        std::vector<std::int64_t> idx(static_cast<std::size_t>(g.dim));
        for (std::int64_t f = b; f < e; ++f) {
            if (g.node_class[static_cast<std::size_t>(f)] != NodeClass::interior) continue;
            g.node_multi_index(f, idx);
            bool boundary = false;
            for (int a = 0; a < g.dim && !boundary; ++a) {
                for (int sgn = -1; sgn <= 1; sgn += 2) {
                    const std::int64_t v = idx[static_cast<std::size_t>(a)] + sgn;
                    if (v < 0 || v >= g.shape[static_cast<std::size_t>(a)] ||
                        outside[static_cast<std::size_t>(f + sgn * g.stride(a))]) {
                        boundary = true;
                        break;
                    }
                }
            }
            if (boundary) g.node_class[static_cast<std::size_t>(f)] = NodeClass::neumann_boundary;
        }
    });

    for (std::int64_t f = 0; f < total; ++f) {
        if (g.active(f)) {
            g.dof_of_node[static_cast<std::size_t>(f)] = g.n_dofs++;
            g.node_of_dof.push_back(f);
        }
    }
    if (g.n_dofs == 0) throw empty_interior("classify_grid: no active nodes remain");
    return g;
}

} // namespace ucp
