#include "somkit/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "somkit/error.hpp"

namespace somkit {

std::size_t MapLayer::present_count() const {
    return static_cast<std::size_t>(
        std::count_if(values.begin(), values.end(), [](const auto& v) { return v.has_value(); }));
}

NeuronBuffer assign(const SomModel& model, const Dataset& data) {
    NeuronBuffer buf{model.topology(), data.size(), std::vector<std::vector<std::size_t>>(model.neuron_count())};
    const auto bmus = predict_bmus(model, data);
    for (std::size_t i = 0; i < bmus.size(); ++i) {
        buf.members[model.topology().flat_index(bmus[i])].push_back(i);
    }
    return buf;
}

MapLayer u_matrix(const SomModel& model) {
    const GridTopology& topo = model.topology();
    MapLayer layer(topo, "U-matrix");
    for (std::size_t j = 0; j < topo.size(); ++j) {
        const NeuronCoord c = topo.coord(j);
        const auto ring = topo.neighbors_at_order(c, 1);
        if (ring.empty()) {
            layer.values[j] = 0.0;
            continue;
        }
        double sum = 0.0;
        for (const NeuronCoord& q : ring) {
            sum += feature_distance(model.metric(), model.weights().row(j), model.weight(q));
        }
        layer.values[j] = sum / static_cast<double>(ring.size());
    }
    return layer;
}

MapLayer hit_map(const NeuronBuffer& buffer) {
    MapLayer layer(buffer.topo, "hits");
    for (std::size_t j = 0; j < buffer.members.size(); ++j) {
        layer.values[j] = static_cast<double>(buffer.members[j].size());
    }
    return layer;
}

MapLayer component_plane(const SomModel& model, std::size_t feature_index) {
    if (feature_index >= model.dim()) {
        throw BoundsError(fmt::format("feature index {} out of range for {} features", feature_index,
                                      model.dim()));
    }
    MapLayer layer(model.topology(), fmt::format("component {}", feature_index));
    for (std::size_t j = 0; j < model.neuron_count(); ++j) {
        layer.values[j] = model.weights()(j, feature_index);
    }
    return layer;
}

namespace {

void check_targets(const NeuronBuffer& buffer, std::size_t n) {
    if (n != buffer.n_samples) {
        throw ShapeError(fmt::format("{} target values for {} assigned samples", n, buffer.n_samples));
    }
}

struct Moments {
    double mean = 0.0;
    double std = 0.0;
};

// Two-pass population moments.
Moments moments(const std::vector<std::size_t>& idx, std::span<const double> targets) {
    double sum = 0.0;
    for (std::size_t i : idx) sum += targets[i];
    const double mean = sum / static_cast<double>(idx.size());
    double ss = 0.0;
    for (std::size_t i : idx) ss += (targets[i] - mean) * (targets[i] - mean);
    return {mean, std::sqrt(ss / static_cast<double>(idx.size()))};
}

}  // namespace

MapLayer metric_map(const NeuronBuffer& buffer, std::span<const double> targets, Stat stat) {
    check_targets(buffer, targets.size());
    MapLayer layer(buffer.topo, stat == Stat::Mean ? "target mean" : "target std");
    for (std::size_t j = 0; j < buffer.members.size(); ++j) {
        const auto& idx = buffer.members[j];
        if (idx.empty()) continue;
        const Moments m = moments(idx, targets);
        layer.values[j] = stat == Stat::Mean ? m.mean : m.std;
    }
    return layer;
}

MapLayer score_map(const NeuronBuffer& buffer, std::span<const double> targets) {
    check_targets(buffer, targets.size());
    MapLayer layer(buffer.topo, "score");
    const double total = static_cast<double>(buffer.n_samples);
    for (std::size_t j = 0; j < buffer.members.size(); ++j) {
        const auto& idx = buffer.members[j];
        if (idx.empty()) continue;
        const double n = static_cast<double>(idx.size());
        layer.values[j] = moments(idx, targets).std / std::sqrt(n) * std::log(total / n);
    }
    return layer;
}

MapLayer rank_map(const MapLayer& means) {
    MapLayer layer(means.topo, "rank");
    std::vector<std::size_t> present;
    for (std::size_t j = 0; j < means.values.size(); ++j) {
        if (means.values[j]) present.push_back(j);
    }
    std::stable_sort(present.begin(), present.end(),
                     [&](std::size_t a, std::size_t b) { return *means.values[a] < *means.values[b]; });
    for (std::size_t r = 0; r < present.size(); ++r) {
        const bool tied = r > 0 && *means.values[present[r]] == *means.values[present[r - 1]];
        layer.values[present[r]] = tied ? *layer.values[present[r - 1]] : static_cast<double>(r + 1);
    }
    return layer;
}

MapLayer classification_map(const NeuronBuffer& buffer, std::span<const int> labels) {
    if (labels.size() != buffer.n_samples) {
        throw ShapeError(fmt::format("{} labels for {} assigned samples", labels.size(), buffer.n_samples));
    }
    MapLayer layer(buffer.topo, "class");
    for (std::size_t j = 0; j < buffer.members.size(); ++j) {
        const auto& idx = buffer.members[j];
        if (idx.empty()) continue;
        std::map<int, std::size_t> counts;  // ordered: first max is the smallest label
        for (std::size_t i : idx) ++counts[labels[i]];
        int best = counts.begin()->first;
        std::size_t best_n = 0;
        for (const auto& [label, n] : counts) {
            if (n > best_n) {
                best = label;
                best_n = n;
            }
        }
        layer.values[j] = static_cast<double>(best);
    }
    return layer;
}

CollectResult collect_sample(const SomModel& model, const NeuronBuffer& buffer, const Dataset& data,
                             std::span<const double> query, std::size_t min_samples, int max_order) {
    if (min_samples < 1) throw ParameterError("min_samples must be >= 1");
    if (max_order < 0) throw ParameterError("max_order must be >= 0");
    if (query.size() != model.dim()) {
        throw ShapeError(fmt::format("query has length {}, model expects {}", query.size(), model.dim()));
    }
    if (data.size() != buffer.n_samples || data.dim() != model.dim()) {
        throw ShapeError("dataset does not match the neuron buffer");
    }
    if (!(buffer.topo == model.topology())) throw ShapeError("buffer was built for another grid");

    const GridTopology& topo = model.topology();
    std::size_t best = 0;
    double best_d = feature_distance(model.metric(), query, model.weights().row(0));
    for (std::size_t j = 1; j < model.neuron_count(); ++j) {
        const double d = feature_distance(model.metric(), query, model.weights().row(j));
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }

    CollectResult out;
    out.bmu = topo.coord(best);
    struct Item {
        double distance;
        std::size_t index;
        int order;
    };
    std::vector<Item> items;
    auto take = [&](NeuronCoord c, int order) {
        for (std::size_t i : buffer.at(c)) {
            items.push_back({feature_distance(model.metric(), query, data.features.row(i)), i, order});
        }
    };
    take(out.bmu, 0);
    int order = 0;
    while (items.size() < min_samples && order < max_order) {
        ++order;
        for (const NeuronCoord& c : topo.neighbors_at_order(out.bmu, order)) take(c, order);
    }
    out.final_order = order;
    out.shortfall = items.size() < min_samples;

    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.index < b.index;
    });
    for (const Item& it : items) {
        out.indices.push_back(it.index);
        out.distances.push_back(it.distance);
        out.orders.push_back(it.order);
    }
    return out;
}

std::string layer_to_csv(const MapLayer& layer) {
    std::string out = "row,col,value\n";
    for (std::size_t j = 0; j < layer.values.size(); ++j) {
        const NeuronCoord c = layer.topo.coord(j);
        if (layer.values[j]) {
            out += fmt::format("{},{},{:.17g}\n", c.row, c.col, *layer.values[j]);
        } else {
            out += fmt::format("{},{},\n", c.row, c.col);
        }
    }
    return out;
}

void save_layer_csv(const MapLayer& layer, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError(fmt::format("cannot write '{}'", path.string()));
    f << layer_to_csv(layer);
}

MapLayer parse_layer_csv(const std::string& text, const GridTopology& topo) {
    MapLayer layer(topo);
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1 || line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            throw InputError(fmt::format("layer CSV line {} is malformed", lineno));
        }
        try {
            const int r = std::stoi(line.substr(0, c1));
            const int c = std::stoi(line.substr(c1 + 1, c2 - c1 - 1));
            const std::string v = line.substr(c2 + 1);
            const std::size_t j = topo.flat_index({r, c});
            if (!v.empty()) layer.values[j] = std::stod(v);
        } catch (const BoundsError&) {
            throw;
        } catch (const std::exception&) {
            throw InputError(fmt::format("layer CSV line {} is malformed", lineno));
        }
    }
    return layer;
}

}  // namespace somkit
