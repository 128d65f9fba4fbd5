#include "commands.hpp"

#include <fstream>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "somkit/analysis.hpp"
#include "somkit/bench.hpp"
#include "somkit/clustering.hpp"
#include "somkit/error.hpp"
#include "somkit/render.hpp"
#include "somkit/som.hpp"

namespace somkit::cli {

std::filesystem::path Context::artifact(const std::string& type, const std::string& ext) const {
    return out_dir / fmt::format("{}_{}.{}", cfg.get("run.id"), type, ext);
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError(fmt::format("cannot write '{}'", path.string()));
    f << text;
    if (!f) throw InputError(fmt::format("failed writing '{}'", path.string()));
}

template <class... Args>
void note(const Context& ctx, fmt::format_string<Args...> f, Args&&... args) {
    if (!ctx.quiet) fmt::print(f, std::forward<Args>(args)...);
}

struct Prepared {
    Dataset data;
    std::optional<Scaler> scaler;
};

// CSV from data.path, else blobs from the blobs.* keys; optionally z-scored
// with data.scaler or a scaler fitted on the data itself.
Prepared prepare_data(const RunConfig& cfg) {
    Prepared p;
    if (const std::string& path = cfg.get("data.path"); !path.empty()) {
        CsvOptions opt;
        if (const auto& t = cfg.get("data.target"); !t.empty()) opt.target_column = t;
        if (const auto& l = cfg.get("data.label"); !l.empty()) opt.label_column = l;
        p.data = load_csv(path, opt);
    } else {
        p.data = make_blobs(blob_spec(cfg));
    }
    if (cfg.get_bool("data.standardize")) {
        const std::string& scaler_path = cfg.get("data.scaler");
        p.scaler = scaler_path.empty() ? fit_scaler(p.data) : Scaler::load(scaler_path);
        p.data = p.scaler->transform(p.data);
    }
    return p;
}

SomModel load_configured_model(const RunConfig& cfg) {
    const std::string& path = cfg.get("model.path");
    if (path.empty()) throw InputError("no model given (--model)");
    return load_model(path);
}

std::string curves_csv(const FitReport& r) {
    std::string out = "epoch,qe,te\n";
    for (std::size_t t = 0; t < r.qe_curve.size(); ++t) {
        out += fmt::format("{},{:.17g},{:.17g}\n", t + 1, r.qe_curve[t], r.te_curve[t]);
    }
    return out;
}

std::string file_tag(std::string type) {
    for (char& c : type) {
        if (c == ':') c = '_';
    }
    return type;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

ClusterSpace configured_space(const RunConfig& cfg) {
    ClusterSpace s;
    try {
        s.kind = parse_space(cfg.get("cluster.space"));
    } catch (const ParameterError& e) {
        throw ConfigurationError(e.what());
    }
    s.position_weight = cfg.get_double("cluster.position_weight");
    if (!(s.position_weight > 0.0)) throw ConfigurationError("cluster.position_weight must be > 0");
    return s;
}

int configured_k(const RunConfig& cfg) {
    const int k = cfg.get_int("cluster.k");
    if (k < 1) throw ConfigurationError(fmt::format("cluster.k must be >= 1, got {}", k));
    return k;
}

MapLayer cluster_layer(const SomModel& model, const ClusterResult& r) {
    MapLayer layer(model.topology(), "cluster");
    for (std::size_t j = 0; j < r.assignment.size(); ++j) layer.values[j] = r.assignment[j];
    return layer;
}

}  // namespace

void cmd_train(const Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const TrainConfig tc = train_config(cfg);
    const GridTopology topo = som_topology(cfg);
    Metric metric{};
    Kernel kernel{};
    try {
        metric = parse_metric(cfg.get("som.metric"));
        kernel = parse_kernel(cfg.get("som.kernel"));
    } catch (const ParameterError& e) {
        throw ConfigurationError(e.what());
    }
    const std::string& init = cfg.get("som.init");
    if (init != "pca" && init != "random") throw ConfigurationError(fmt::format("unknown som.init '{}'", init));

    const Prepared prep = prepare_data(cfg);
    SomModel model = [&] {
        if (init == "random") return init_random(topo, prep.data.dim(), prep.data, tc.seed, metric, kernel);
        PcaInit p = init_pca(topo, prep.data.dim(), prep.data, metric, kernel);
        if (p.fell_back) note(ctx, "data has no variance; fell back to random initialization\n");
        return std::move(p.model);
    }();
    const FitReport report = fit(model, prep.data, tc);

    save_model(model, ctx.artifact("model", "som"));
    write_text(ctx.artifact("curves", "csv"), curves_csv(report));
    RenderStyle style = render_style(cfg);
    write_text(ctx.artifact("curves", "svg"), render_learning_curves(report.qe_curve, report.te_curve, style));
    write_text(ctx.artifact("timing", "csv"),
               fmt::format("wall_seconds,metric_seconds\n{:.6f},{:.6f}\n", report.wall_seconds,
                           report.metric_seconds));
    if (prep.scaler) prep.scaler->save(ctx.artifact("scaler", "csv"));
    note(ctx, "trained {}x{} {} map on {} samples x {} features: QE {:.4f}, TE {:.4f}\n", topo.rows(),
         topo.cols(), to_string(topo.kind()), prep.data.size(), prep.data.dim(), report.qe_curve.back(),
         report.te_curve.back());
}

void cmd_map(const Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const SomModel model = load_configured_model(cfg);
    const RenderStyle base = render_style(cfg);
    const auto types = split_list(cfg.get("map.types"));
    if (types.empty()) throw ConfigurationError("map.types is empty");

    std::optional<Prepared> prep;
    std::optional<NeuronBuffer> buffer;
    auto data = [&]() -> const Dataset& {
        if (!prep) {
            prep = prepare_data(cfg);
            if (prep->data.dim() != model.dim()) {
                throw ShapeError(fmt::format("dataset has {} features, model expects {}", prep->data.dim(),
                                             model.dim()));
            }
        }
        return prep->data;
    };
    auto buf = [&]() -> const NeuronBuffer& {
        if (!buffer) buffer = assign(model, data());
        return *buffer;
    };
    auto targets = [&](const std::string& type) -> const std::vector<double>& {
        const Dataset& d = data();
        if (!d.target) {
            throw InputError(fmt::format("map '{}' needs a target column; none given (set --target)", type));
        }
        return *d.target;
    };

    for (const std::string& type : types) {
        RenderStyle style = base;
        std::optional<MapLayer> layer;
        if (type == "umatrix") {
            layer = u_matrix(model);
        } else if (type == "hit") {
            layer = hit_map(buf());
        } else if (type.starts_with("component:")) {
            const std::string idx = type.substr(10);
            std::size_t used = 0;
            long j = -1;
            try {
                j = std::stol(idx, &used);
            } catch (const std::exception&) {
            }
            if (used != idx.size() || j < 0) throw ConfigurationError(fmt::format("bad component index '{}'", idx));
            layer = component_plane(model, static_cast<std::size_t>(j));
        } else if (type == "metric:mean" || type == "metric:std") {
            layer = metric_map(buf(), targets(type), type == "metric:mean" ? Stat::Mean : Stat::Std);
        } else if (type == "score") {
            layer = score_map(buf(), targets(type));
        } else if (type == "rank") {
            layer = rank_map(metric_map(buf(), targets(type), Stat::Mean));
        } else if (type == "classification") {
            const Dataset& d = data();
            if (!d.labels) {
                throw InputError("map 'classification' needs a label column; none given (set --label)");
            }
            layer = classification_map(buf(), *d.labels);
            style.colormap = Colormap::Categorical;
        } else if (type == "cluster") {
            const Matrix features = cluster_features(model, configured_space(cfg));
            const ClusterResult r =
                find_algorithm(cfg.get("cluster.algorithm"))(features, configured_k(cfg), cfg.get_u64("run.seed"));
            layer = cluster_layer(model, r);
            style.colormap = Colormap::Categorical;
        } else {
            throw ConfigurationError(fmt::format("unknown map type '{}'", type));
        }
        const std::string tag = file_tag(type);
        save_layer_csv(*layer, ctx.artifact(tag, "csv"));
        write_text(ctx.artifact(tag, "svg"), render_map(*layer, style));
        note(ctx, "wrote {} map ({} of {} cells populated)\n", type, layer->present_count(), layer->values.size());
    }
}

void cmd_cluster(const Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const SomModel model = load_configured_model(cfg);
    const ClusterSpace space = configured_space(cfg);
    const std::uint64_t seed = cfg.get_u64("run.seed");
    const std::string& algorithm = cfg.get("cluster.algorithm");
    const ClusterAlgorithm& run = [&]() -> const ClusterAlgorithm& {
        try {
            return find_algorithm(algorithm);
        } catch (const ParameterError& e) {
            throw ConfigurationError(e.what());
        }
    }();
    const Matrix features = cluster_features(model, space);

    int k = 0;
    if (cfg.get_bool("cluster.elbow")) {
        const ElbowResult er = elbow(features, cfg.get_int("cluster.k_min"), cfg.get_int("cluster.k_max"), seed);
        std::string csv = "k,inertia\n";
        std::vector<double> ks;
        for (std::size_t i = 0; i < er.ks.size(); ++i) {
            csv += fmt::format("{},{:.17g}\n", er.ks[i], er.inertias[i]);
            ks.push_back(er.ks[i]);
        }
        write_text(ctx.artifact("elbow", "csv"), csv);
        write_text(ctx.artifact("elbow", "svg"),
                   render_curves({{"inertia", ks, er.inertias}}, render_style(cfg), "k", "inertia"));
        k = er.selected_k;
        fmt::print("selected k = {}\n", k);
    } else {
        k = configured_k(cfg);
    }

    const ClusterResult r = run(features, k, seed);
    std::string csv = "row,col,cluster\n";
    for (std::size_t j = 0; j < r.assignment.size(); ++j) {
        const NeuronCoord c = model.topology().coord(j);
        csv += fmt::format("{},{},{}\n", c.row, c.col, r.assignment[j]);
    }
    write_text(ctx.artifact("clusters", "csv"), csv);
    RenderStyle style = render_style(cfg);
    style.colormap = Colormap::Categorical;
    write_text(ctx.artifact("cluster", "svg"), render_map(cluster_layer(model, r), style));
    if (r.k >= 2) {
        const ComparisonRow row{space, algorithm, r.k, quality_metrics(features, r.assignment), r.score};
        write_text(ctx.artifact("cluster_metrics", "csv"), comparison_to_csv({row}));
        note(ctx, "{} in {} space: k = {}, silhouette {:.4f}\n", algorithm, to_string(space.kind), r.k,
             row.metrics.silhouette);
    } else {
        note(ctx, "{} produced a single cluster; quality metrics skipped\n", algorithm);
    }

    if (cfg.get_bool("cluster.compare")) {
        const std::vector<ClusterSpace> spaces{{SpaceKind::Weights, space.position_weight},
                                               {SpaceKind::Positions, space.position_weight},
                                               {SpaceKind::Combined, space.position_weight}};
        const auto rows = compare(model, spaces, algorithm_names(), k, seed);
        write_text(ctx.artifact("comparison", "csv"), comparison_to_csv(rows));
        write_text(ctx.artifact("comparison", "svg"), render_bars(rows, render_style(cfg)));
    }
}

void cmd_collect(const Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const SomModel model = load_configured_model(cfg);
    const Prepared prep = prepare_data(cfg);
    if (prep.data.dim() != model.dim()) {
        throw ShapeError(fmt::format("dataset has {} features, model expects {}", prep.data.dim(), model.dim()));
    }

    std::vector<double> query;
    const std::string& inline_query = cfg.get("collect.query");
    const std::string& query_row = cfg.get("collect.query_row");
    if (!inline_query.empty() && !query_row.empty()) {
        throw ConfigurationError("give either a query vector or a query row, not both");
    }
    if (!inline_query.empty()) {
        for (const std::string& item : split_list(inline_query)) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(item, &used);
            } catch (const std::exception&) {
            }
            if (used != item.size() || used == 0) {
                throw InputError(fmt::format("query value '{}' is not a number", item));
            }
            query.push_back(v);
        }
        if (query.size() != model.dim()) {
            throw ShapeError(fmt::format("query has {} values, model expects {}", query.size(), model.dim()));
        }
        if (prep.scaler) prep.scaler->transform_row(query);
    } else if (!query_row.empty()) {
        const int row = cfg.get_int("collect.query_row");
        if (row < 0 || static_cast<std::size_t>(row) >= prep.data.size()) {
            throw BoundsError(fmt::format("query row {} outside [0, {})", row, prep.data.size()));
        }
        const auto r = prep.data.features.row(static_cast<std::size_t>(row));
        query.assign(r.begin(), r.end());
    } else {
        throw InputError("no query given (--query or --query-row)");
    }

    const int min_samples = cfg.get_int("collect.min_samples");
    if (min_samples < 1) throw ConfigurationError("collect.min_samples must be >= 1");
    const int max_order = cfg.get_int("collect.max_order");
    if (max_order < 0) throw ConfigurationError("collect.max_order must be >= 0");

    const NeuronBuffer buffer = assign(model, prep.data);
    const CollectResult res = collect_sample(model, buffer, prep.data, query,
                                             static_cast<std::size_t>(min_samples), max_order);
    std::string csv = "rank,index,distance,order,shortfall\n";
    for (std::size_t i = 0; i < res.indices.size(); ++i) {
        csv += fmt::format("{},{},{:.17g},{},{}\n", i + 1, res.indices[i], res.distances[i], res.orders[i],
                           res.shortfall ? 1 : 0);
    }
    write_text(ctx.artifact("collect", "csv"), csv);
    note(ctx, "collected {} samples around BMU ({}, {}) up to order {}{}\n", res.indices.size(), res.bmu.row,
         res.bmu.col, res.final_order, res.shortfall ? " (shortfall)" : "");
}

void cmd_bench(const Context& ctx) {
    const BenchPlan plan = bench_plan(ctx.cfg);
    const auto rows = run_plan(plan, [&](const BenchRow& r) {
        if (ctx.quiet) return;
        if (r.failed) {
            fmt::print(stderr, "cell {}x{} ({}) failed: {}\n", r.samples, r.features, to_string(r.update_mode),
                       r.error);
        } else {
            fmt::print(stderr, "cell {}x{} ({}) done: QE {:.3f}, train {:.2f} s\n", r.samples, r.features,
                       to_string(r.update_mode), r.qe.mean, r.time_train_s.mean);
        }
    });
    write_text(ctx.artifact("bench", "csv"), render_table(rows, TableFormat::Csv));
    const std::string table = render_table(rows, TableFormat::AlignedText);
    write_text(ctx.artifact("bench", "txt"), table);
    fmt::print("{}", table);
}

}  // namespace somkit::cli
