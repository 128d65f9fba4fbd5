#include <chrono>
#include <cstdio>
#include <ctime>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "commands.hpp"
#include "somkit/error.hpp"
#include "somkit/parallel.hpp"

namespace {

using somkit::cli::Context;

// Flags that write straight into a config key; applied after --config and --set.
class Bindings {
public:
    void value(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        auto& store = strings_.emplace_back();
        entries_.push_back({app->add_option(flag, store, help + " [" + key + "]"), key, &store});
    }
    void flag(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        entries_.push_back({app->add_flag(flag)->description(help + " [" + key + "]"), key, &true_});
    }
    void apply(somkit::RunConfig& cfg) const {
        for (const Entry& e : entries_) {
            if (e.option->count() > 0) cfg.set(e.key, *e.value);
        }
    }

private:
    struct Entry {
        CLI::Option* option;
        std::string key;
        const std::string* value;
    };
    std::deque<std::string> strings_;
    std::vector<Entry> entries_;
    std::string true_ = "true";
};

std::string timestamp_dir() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    localtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
    return std::string("somkit-runs/") + buf;
}

void add_data_flags(Bindings& b, CLI::App* sub) {
    b.value(sub, "--data", "data.path", "CSV dataset (default: generated blobs)");
    b.value(sub, "--target", "data.target", "target column name");
    b.value(sub, "--label", "data.label", "label column name");
    b.value(sub, "--standardize", "data.standardize", "z-score features (true/false)");
    b.value(sub, "--scaler", "data.scaler", "scaler CSV to apply instead of fitting one");
    b.value(sub, "--samples", "blobs.n_samples", "blob sample count");
    b.value(sub, "--features", "blobs.n_features", "blob feature count");
    b.value(sub, "--centers", "blobs.n_centers", "blob center count");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-organizing map toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string out, config_path;
    int threads = -1;
    bool quiet = false;
    std::vector<std::string> sets;
    Bindings b;
    app.add_option("--out", out, "output directory (default: somkit-runs/<timestamp>)");
    app.add_option("--config", config_path, "key = value config file");
    app.add_option("--threads", threads, "worker threads (default: SOMKIT_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);
    app.add_flag("--quiet,-q", quiet, "suppress progress messages");
    app.add_option("--set", sets, "override a config key (key=value), repeatable");
    b.value(&app, "--seed", "run.seed", "random seed");
    b.value(&app, "--run-id", "run.id", "output file prefix");

    auto* train = app.add_subcommand("train", "train a map and write model, curves and plots");
    add_data_flags(b, train);
    b.value(train, "--rows", "som.rows", "map rows");
    b.value(train, "--cols", "som.cols", "map columns");
    b.value(train, "--topology", "som.topology", "rect or hex");
    b.value(train, "--metric", "som.metric", "euclidean, cosine, manhattan or chebyshev");
    b.value(train, "--kernel", "som.kernel", "gaussian, mexican_hat, bubble or triangle");
    b.value(train, "--init", "som.init", "pca or random");
    b.value(train, "--epochs", "train.epochs", "training epochs");
    b.value(train, "--lr0", "train.lr0", "initial learning rate");
    b.value(train, "--sigma0", "train.sigma0", "initial neighborhood width");
    b.value(train, "--lr-schedule", "train.lr_schedule", "inverse or linear");
    b.value(train, "--sigma-schedule", "train.sigma_schedule", "inverse or linear");
    b.value(train, "--mode", "train.update_mode", "batch or online");

    auto* map = app.add_subcommand("map", "build map layers from a trained model");
    b.value(map, "--model", "model.path", "model file");
    add_data_flags(b, map);
    b.value(map, "--types", "map.types",
            "comma list of umatrix, hit, component:<j>, metric:mean, metric:std, score, rank, "
            "classification, cluster");
    b.value(map, "--k", "cluster.k", "clusters for the cluster map");
    b.value(map, "--algorithm", "cluster.algorithm", "clustering algorithm for the cluster map");
    b.value(map, "--space", "cluster.space", "weights, positions or combined");

    auto* cluster = app.add_subcommand("cluster", "cluster the neurons of a trained model");
    b.value(cluster, "--model", "model.path", "model file");
    b.value(cluster, "--space", "cluster.space", "weights, positions or combined");
    b.value(cluster, "--position-weight", "cluster.position_weight", "position scale in combined space");
    b.value(cluster, "--algorithm", "cluster.algorithm", "kmeans or gmm");
    b.value(cluster, "--k", "cluster.k", "number of clusters");
    b.flag(cluster, "--elbow", "cluster.elbow", "choose k by the elbow rule");
    b.value(cluster, "--k-min", "cluster.k_min", "smallest k for --elbow");
    b.value(cluster, "--k-max", "cluster.k_max", "largest k for --elbow");
    b.flag(cluster, "--compare", "cluster.compare", "compare all spaces and algorithms");

    auto* collect = app.add_subcommand("collect", "collect training samples relevant to a query");
    b.value(collect, "--model", "model.path", "model file");
    add_data_flags(b, collect);
    b.value(collect, "--query", "collect.query", "comma-separated query vector in raw feature units");
    b.value(collect, "--query-row", "collect.query_row", "use this dataset row as the query");
    b.value(collect, "--min-samples", "collect.min_samples", "samples to collect");
    b.value(collect, "--max-order", "collect.max_order", "largest neighbor ring to search");

    auto* bench = app.add_subcommand("bench", "run the benchmark protocol");
    b.value(bench, "--samples", "bench.sample_sizes", "comma list of sample sizes");
    b.value(bench, "--features", "bench.feature_counts", "comma list of feature counts");
    b.value(bench, "--rows", "bench.rows", "map rows");
    b.value(bench, "--cols", "bench.cols", "map columns");
    b.value(bench, "--topology", "bench.topology", "rect or hex");
    b.value(bench, "--epochs", "bench.epochs", "training epochs");
    b.value(bench, "--runs", "bench.runs", "seeded runs per cell");
    b.value(bench, "--modes", "bench.update_modes", "comma list of batch, online");
    b.flag(bench, "--large", "bench.large", "allow minutes-scale cells");
    b.flag(bench, "--parallel-cells", "bench.parallel_cells", "run cells concurrently");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        Context ctx;
        ctx.quiet = quiet;
        if (!config_path.empty()) ctx.cfg.merge_file(config_path);
        for (const std::string& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw somkit::ConfigurationError(fmt::format("--set '{}' lacks '='", s));
            ctx.cfg.set(s.substr(0, eq), s.substr(eq + 1));
        }
        b.apply(ctx.cfg);
        if (threads >= 0) somkit::set_thread_count(threads);

        ctx.out_dir = out.empty() ? timestamp_dir() : out;
        std::filesystem::create_directories(ctx.out_dir);
        {
            std::ofstream f(ctx.out_dir / "effective.cfg", std::ios::binary);
            if (!f) throw somkit::InputError(fmt::format("cannot write to '{}'", ctx.out_dir.string()));
            f << ctx.cfg.to_text();
        }

        const std::map<CLI::App*, std::function<void(const Context&)>> dispatch = {
            {train, somkit::cli::cmd_train},
            {map, somkit::cli::cmd_map},
            {cluster, somkit::cli::cmd_cluster},
            {collect, somkit::cli::cmd_collect},
            {bench, somkit::cli::cmd_bench},
        };
        for (const auto& [sub, fn] : dispatch) {
            if (sub->parsed()) fn(ctx);
        }
        return 0;
    } catch (const somkit::Error& e) {
        fmt::print(stderr, "somkit: error: {}\n", e.what());
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        fmt::print(stderr, "somkit: error: {}\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        fmt::print(stderr, "somkit: internal error: {}\n", e.what());
        return 1;
    }
}
