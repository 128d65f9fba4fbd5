#include "somkit/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "somkit/error.hpp"

namespace somkit {

namespace {

const std::map<std::string, std::string>& defaults() {
    static const std::map<std::string, std::string> d = {
        {"run.id", "run"},
        {"run.seed", "0"},
        {"data.path", ""},
        {"data.target", ""},
        {"data.label", ""},
        {"data.standardize", "true"},
        {"data.scaler", ""},
        {"model.path", ""},
        {"blobs.n_samples", "240"},
        {"blobs.n_features", "4"},
        {"blobs.n_centers", "3"},
        {"blobs.cluster_std", "1"},
        {"blobs.box_min", "-10"},
        {"blobs.box_max", "10"},
        {"som.rows", "25"},
        {"som.cols", "15"},
        {"som.topology", "rect"},
        {"som.metric", "euclidean"},
        {"som.kernel", "gaussian"},
        {"som.init", "pca"},
        {"train.epochs", "100"},
        {"train.lr0", "0.5"},
        {"train.sigma0", "3"},
        {"train.lr_schedule", "inverse"},
        {"train.sigma_schedule", "inverse"},
        {"train.update_mode", "batch"},
        {"train.d_th", "1"},
        {"map.types", "umatrix,hit"},
        {"cluster.space", "weights"},
        {"cluster.position_weight", "1"},
        {"cluster.algorithm", "kmeans"},
        {"cluster.k", "3"},
        {"cluster.elbow", "false"},
        {"cluster.k_min", "2"},
        {"cluster.k_max", "8"},
        {"cluster.compare", "false"},
        {"collect.min_samples", "10"},
        {"collect.max_order", "3"},
        {"collect.query", ""},
        {"collect.query_row", ""},
        {"bench.sample_sizes", "240,4000"},
        {"bench.feature_counts", "4,50"},
        {"bench.rows", "25"},
        {"bench.cols", "15"},
        {"bench.topology", "rect"},
        {"bench.epochs", "100"},
        {"bench.runs", "3"},
        {"bench.update_modes", "batch"},
        {"bench.test_fraction", "0.2"},
        {"bench.large", "false"},
        {"bench.parallel_cells", "false"},
        {"render.cell_size", "24"},
        {"render.colormap", "sequential"},
        {"render.show_colorbar", "true"},
        {"render.title", ""},
        {"render.absent_fill", "#d9d9d9"},
    };
    return d;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* want) {
    throw ConfigurationError(fmt::format("'{}' for {} is not {}", value, key, want));
}

}  // namespace

RunConfig::RunConfig() : values_(defaults()) {}

void RunConfig::set(const std::string& key, const std::string& value) {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigurationError(fmt::format("unknown config key '{}'", key));
    it->second = value;
}

const std::string& RunConfig::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigurationError(fmt::format("unknown config key '{}'", key));
    return it->second;
}

std::vector<std::string> RunConfig::keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) out.push_back(k);
    return out;
}

void RunConfig::merge_text(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // Values such as colours may contain '#', so only whole lines are comments.
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigurationError(fmt::format("{}:{}: expected 'key = value'", source, lineno));
        }
        const std::string key = trim(line.substr(0, eq));
        if (!values_.contains(key)) {
            throw ConfigurationError(fmt::format("{}:{}: unknown config key '{}'", source, lineno, key));
        }
        values_[key] = trim(line.substr(eq + 1));
    }
}

void RunConfig::merge_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw InputError(fmt::format("cannot open config '{}'", path.string()));
    std::ostringstream ss;
    ss << f.rdbuf();
    merge_text(ss.str(), path.string());
}

std::string RunConfig::to_text() const {
    std::string out;
    for (const auto& [k, v] : values_) out += fmt::format("{} = {}\n", k, v);
    return out;
}

int RunConfig::get_int(const std::string& key) const {
    const std::string& v = get(key);
    try {
        std::size_t used = 0;
        const int x = std::stoi(v, &used);
        if (used == v.size()) return x;
    } catch (const std::exception&) {
    }
    bad_value(key, v, "an integer");
}

double RunConfig::get_double(const std::string& key) const {
    const std::string& v = get(key);
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used == v.size()) return x;
    } catch (const std::exception&) {
    }
    bad_value(key, v, "a number");
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
    const std::string& v = get(key);
    try {
        std::size_t used = 0;
        if (!v.empty() && v[0] != '-') {
            const unsigned long long x = std::stoull(v, &used);
            if (used == v.size()) return x;
        }
    } catch (const std::exception&) {
    }
    bad_value(key, v, "a nonnegative integer");
}

bool RunConfig::get_bool(const std::string& key) const {
    const std::string& v = get(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    bad_value(key, v, "a boolean");
}

std::vector<std::size_t> RunConfig::get_sizes(const std::string& key) const {
    const std::string& v = get(key);
    std::vector<std::size_t> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        try {
            std::size_t used = 0;
            if (!item.empty() && item[0] != '-') {
                out.push_back(std::stoull(item, &used));
                if (used == item.size()) continue;
            }
        } catch (const std::exception&) {
        }
        bad_value(key, v, "a comma-separated list of nonnegative integers");
    }
    if (out.empty()) bad_value(key, v, "a nonempty list");
    return out;
}

namespace {

template <class F>
auto parsed(const RunConfig& cfg, const std::string& key, F parse) {
    try {
        return parse(cfg.get(key));
    } catch (const ParameterError& e) {
        throw ConfigurationError(fmt::format("{}: {}", key, e.what()));
    }
}

}  // namespace

TrainConfig train_config(const RunConfig& cfg) {
    TrainConfig t;
    t.epochs = cfg.get_int("train.epochs");
    t.lr0 = cfg.get_double("train.lr0");
    t.sigma0 = cfg.get_double("train.sigma0");
    t.lr_schedule = parsed(cfg, "train.lr_schedule", parse_schedule);
    t.sigma_schedule = parsed(cfg, "train.sigma_schedule", parse_schedule);
    t.update_mode = parsed(cfg, "train.update_mode", parse_update_mode);
    t.seed = cfg.get_u64("run.seed");
    t.d_th = cfg.get_double("train.d_th");
    t.validate();
    return t;
}

BlobSpec blob_spec(const RunConfig& cfg) {
    BlobSpec b;
    const int n = cfg.get_int("blobs.n_samples");
    const int k = cfg.get_int("blobs.n_features");
    const int c = cfg.get_int("blobs.n_centers");
    if (n < 1 || k < 1 || c < 1) throw ConfigurationError("blob counts must be >= 1");
    b.n_samples = static_cast<std::size_t>(n);
    b.n_features = static_cast<std::size_t>(k);
    b.n_centers = static_cast<std::size_t>(c);
    b.cluster_std = cfg.get_double("blobs.cluster_std");
    b.box_min = cfg.get_double("blobs.box_min");
    b.box_max = cfg.get_double("blobs.box_max");
    if (!(b.cluster_std >= 0.0) || !(b.box_min < b.box_max)) throw ConfigurationError("invalid blob parameters");
    b.seed = cfg.get_u64("run.seed");
    return b;
}

BenchPlan bench_plan(const RunConfig& cfg) {
    BenchPlan p;
    p.sample_sizes = cfg.get_sizes("bench.sample_sizes");
    p.feature_counts = cfg.get_sizes("bench.feature_counts");
    p.rows = cfg.get_int("bench.rows");
    p.cols = cfg.get_int("bench.cols");
    p.topology = parsed(cfg, "bench.topology", parse_topology);
    p.epochs = cfg.get_int("bench.epochs");
    p.runs = cfg.get_int("bench.runs");
    p.update_modes.clear();
    std::stringstream ss(cfg.get("bench.update_modes"));
    std::string item;
    while (std::getline(ss, item, ',')) {
        p.update_modes.push_back(parsed(cfg, "bench.update_modes", [&](const std::string&) {
            return parse_update_mode(trim(item));
        }));
    }
    p.seed0 = cfg.get_u64("run.seed");
    p.test_fraction = cfg.get_double("bench.test_fraction");
    p.blobs = blob_spec(cfg);
    p.allow_large = cfg.get_bool("bench.large");
    p.parallel_cells = cfg.get_bool("bench.parallel_cells");
    p.validate();
    return p;
}

RenderStyle render_style(const RunConfig& cfg) {
    RenderStyle s;
    s.cell_size = cfg.get_double("render.cell_size");
    s.colormap = parsed(cfg, "render.colormap", parse_colormap);
    s.show_colorbar = cfg.get_bool("render.show_colorbar");
    s.title = cfg.get("render.title");
    s.absent_cell_fill = cfg.get("render.absent_fill");
    try {
        s.validate();
    } catch (const ParameterError& e) {
        throw ConfigurationError(fmt::format("render: {}", e.what()));
    }
    return s;
}

GridTopology som_topology(const RunConfig& cfg) {
    const Topology kind = parsed(cfg, "som.topology", parse_topology);
    const int rows = cfg.get_int("som.rows");
    const int cols = cfg.get_int("som.cols");
    try {
        return GridTopology(kind, rows, cols);
    } catch (const Error& e) {
        throw ConfigurationError(fmt::format("som grid: {}", e.what()));
    }
}

}  // namespace somkit
