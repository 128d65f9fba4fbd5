#include "somkit/grid.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include <fmt/format.h>

#include "somkit/error.hpp"

namespace somkit {

std::string_view to_string(Topology t) {
    return t == Topology::Rectangular ? "rectangular" : "hexagonal";
}

Topology parse_topology(std::string_view s) {
    if (s == "rectangular" || s == "rect") return Topology::Rectangular;
    if (s == "hexagonal" || s == "hex") return Topology::Hexagonal;
    throw ParameterError(fmt::format("unknown topology '{}'", s));
}

GridTopology::GridTopology(Topology kind, int rows, int cols)
    : kind_(kind), rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1) {
        throw ParameterError(fmt::format("grid must be at least 1x1, got {}x{}", rows, cols));
    }
}

void GridTopology::check(NeuronCoord c) const {
    if (!contains(c)) {
        throw BoundsError(
            fmt::format("coordinate ({}, {}) outside {}x{} grid", c.row, c.col, rows_, cols_));
    }
}

std::size_t GridTopology::flat_index(NeuronCoord c) const {
    check(c);
    return static_cast<std::size_t>(c.row) * cols_ + c.col;
}

NeuronCoord GridTopology::coord(std::size_t flat) const {
    if (flat >= size()) {
        throw BoundsError(fmt::format("flat index {} outside grid of {} neurons", flat, size()));
    }
    return {static_cast<int>(flat / cols_), static_cast<int>(flat % cols_)};
}

PlanarPosition GridTopology::planar_position(NeuronCoord c) const {
    check(c);
    if (kind_ == Topology::Rectangular) {
        return {static_cast<double>(c.col), static_cast<double>(c.row)};
    }
    return {c.col + 0.5 * (c.row % 2), c.row * kHexRowPitch};
}

double GridTopology::grid_distance(NeuronCoord a, NeuronCoord b) const {
    const PlanarPosition pa = planar_position(a);
    const PlanarPosition pb = planar_position(b);
    const double dx = pa.x - pb.x;
    const double dy = pa.y - pb.y;
    return std::sqrt(dx * dx + dy * dy);
}

int GridTopology::ring_distance_unchecked(NeuronCoord a, NeuronCoord b) const noexcept {
    if (kind_ == Topology::Rectangular) {
        return std::max(std::abs(a.row - b.row), std::abs(a.col - b.col));
    }
    // odd-r offset -> axial
    const int qa = a.col - a.row / 2;
    const int qb = b.col - b.row / 2;
    const int dq = qb - qa;
    const int dr = b.row - a.row;
    return (std::abs(dq) + std::abs(dq + dr) + std::abs(dr)) / 2;
}

int GridTopology::ring_distance(NeuronCoord a, NeuronCoord b) const {
    check(a);
    check(b);
    return ring_distance_unchecked(a, b);
}

std::vector<NeuronCoord> GridTopology::neighbors_at_order(NeuronCoord center, int order) const {
    check(center);
    if (order < 1) throw ParameterError("neighbor order must be >= 1");
    std::vector<NeuronCoord> out;
    const int r0 = std::max(0, center.row - order);
    const int r1 = std::min(rows_ - 1, center.row + order);
    // Both metrics bound |dcol| by order (+ order/2 for hex offsets).
    const int span = order + (order + 1) / 2 + 1;
    const int c0 = std::max(0, center.col - span);
    const int c1 = std::min(cols_ - 1, center.col + span);
    for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
            if (ring_distance_unchecked(center, {r, c}) == order) out.push_back({r, c});
        }
    }
    return out;
}

}  // namespace somkit
