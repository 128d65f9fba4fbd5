#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace somkit {

enum class Topology { Rectangular, Hexagonal };

std::string_view to_string(Topology t);
Topology parse_topology(std::string_view s);

struct NeuronCoord {
    int row = 0;
    int col = 0;

    friend bool operator==(const NeuronCoord&, const NeuronCoord&) = default;
};

struct PlanarPosition {
    double x = 0.0;
    double y = 0.0;
};

/// Row pitch of the hexagonal embedding (distance between row centers).
inline constexpr double kHexRowPitch = 0.86602540378443864676;  // sqrt(3) / 2

/**
 * Layout of an m x n neuron lattice.
 *
 * Neurons are addressed by (row, col) or by their row-major flat index.
 * Hexagonal grids use the odd-row offset layout: odd rows are shifted half a
 * cell to the right and rows are sqrt(3)/2 apart, so every interior neuron
 * has six neighbors at unit distance.
 *
 * Two distances are exposed on purpose: grid_distance() is the continuous
 * planar distance fed to neighborhood kernels, ring_distance() is the
 * discrete shell order (Chebyshev on rectangles, cube distance on hexagons)
 * used for topographic adjacency, U-matrix and sample collection.
 */
class GridTopology {
public:
    GridTopology(Topology kind, int rows, int cols);

    Topology kind() const noexcept { return kind_; }
    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(rows_) * cols_; }

    bool contains(NeuronCoord c) const noexcept {
        return c.row >= 0 && c.row < rows_ && c.col >= 0 && c.col < cols_;
    }
    std::size_t flat_index(NeuronCoord c) const;
    NeuronCoord coord(std::size_t flat) const;

    PlanarPosition planar_position(NeuronCoord c) const;
    double grid_distance(NeuronCoord a, NeuronCoord b) const;
    int ring_distance(NeuronCoord a, NeuronCoord b) const;

    /// In-bounds neurons exactly `order` rings away from center, row-major.
    std::vector<NeuronCoord> neighbors_at_order(NeuronCoord center, int order) const;

    friend bool operator==(const GridTopology&, const GridTopology&) = default;

private:
    void check(NeuronCoord c) const;
    int ring_distance_unchecked(NeuronCoord a, NeuronCoord b) const noexcept;

    Topology kind_;
    int rows_;
    int cols_;
};

}  // namespace somkit
