#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "somkit/grid.hpp"
#include "somkit/som.hpp"

namespace somkit {

/// One optional scalar per neuron (row-major). Absent means "no data".
struct MapLayer {
    GridTopology topo;
    std::vector<std::optional<double>> values;
    std::string label;

    MapLayer(GridTopology t, std::string l = {})
        : topo(t), values(t.size()), label(std::move(l)) {}

    std::optional<double> at(NeuronCoord c) const { return values[topo.flat_index(c)]; }
    std::size_t present_count() const;
};

/// Sample indices grouped by BMU; each sample lands in exactly one neuron.
struct NeuronBuffer {
    GridTopology topo;
    std::size_t n_samples = 0;
    std::vector<std::vector<std::size_t>> members;

    const std::vector<std::size_t>& at(NeuronCoord c) const { return members[topo.flat_index(c)]; }
};

NeuronBuffer assign(const SomModel& model, const Dataset& data);

/// Mean feature distance from each neuron to its first-order ring.
MapLayer u_matrix(const SomModel& model);
MapLayer hit_map(const NeuronBuffer& buffer);
MapLayer component_plane(const SomModel& model, std::size_t feature_index);

enum class Stat { Mean, Std };

/// Per-neuron mean or population std of targets; absent for empty neurons.
MapLayer metric_map(const NeuronBuffer& buffer, std::span<const double> targets, Stat stat);

/// Reliability score (sigma / sqrt(n)) * ln(N / n) per populated neuron.
MapLayer score_map(const NeuronBuffer& buffer, std::span<const double> targets);

/// Competition ranks (1 = smallest) over present cells; ties share the lower rank.
MapLayer rank_map(const MapLayer& means);

/// Modal label per neuron, ties to the smallest label.
MapLayer classification_map(const NeuronBuffer& buffer, std::span<const int> labels);

struct CollectResult {
    std::vector<std::size_t> indices;  // nearest first, ties by index
    std::vector<double> distances;
    std::vector<int> orders;  // ring order each sample was collected from
    NeuronCoord bmu;
    int final_order = 0;
    bool shortfall = false;
};

inline constexpr int kDefaultCollectMaxOrder = 3;

/**
 * Collects training samples relevant to `query` by expanding rings around
 * its BMU: order 0 (the BMU's own buffer), then 1, 2, ... up to max_order,
 * stopping at the first order whose inclusion reaches min_samples. Whole
 * rings are kept. If max_order is exhausted first, the partial list comes
 * back with shortfall set.
 */
CollectResult collect_sample(const SomModel& model, const NeuronBuffer& buffer, const Dataset& data,
                             std::span<const double> query, std::size_t min_samples,
                             int max_order = kDefaultCollectMaxOrder);

/// CSV with header row,col,value; absent cells have an empty value.
std::string layer_to_csv(const MapLayer& layer);
void save_layer_csv(const MapLayer& layer, const std::filesystem::path& path);
MapLayer parse_layer_csv(const std::string& text, const GridTopology& topo);

}  // namespace somkit
