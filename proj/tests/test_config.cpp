#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <functional>

#include "somkit/config.hpp"
#include "somkit/error.hpp"

using namespace somkit;

namespace {

std::string message_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(Config, DefaultsBuildValidObjects) {
    const RunConfig cfg;
    const TrainConfig t = train_config(cfg);
    EXPECT_EQ(t.epochs, 100);
    EXPECT_EQ(t.lr0, 0.5);
    EXPECT_EQ(t.sigma0, 3.0);
    EXPECT_EQ(t.update_mode, UpdateMode::Batch);
    const GridTopology g = som_topology(cfg);
    EXPECT_EQ(g.rows(), 25);
    EXPECT_EQ(g.cols(), 15);
    EXPECT_NO_THROW(blob_spec(cfg));
    EXPECT_NO_THROW(bench_plan(cfg));
    EXPECT_NO_THROW(render_style(cfg));
}

TEST(Config, UnknownKeysAreRejected) {
    RunConfig cfg;
    EXPECT_THROW(cfg.set("train.epoch", "3"), ConfigurationError);
    EXPECT_THROW(cfg.get("nope"), ConfigurationError);
    EXPECT_FALSE(cfg.contains("nope"));
    EXPECT_TRUE(cfg.contains("som.rows"));
}

TEST(Config, MergeTextSkipsCommentLinesAndCitesLines) {
    RunConfig cfg;
    cfg.merge_text("# header\n\n  som.rows = 7  \n  # indented\nsom.topology=hex\nrender.absent_fill = #ffffff\n",
                   "a.cfg");
    EXPECT_EQ(cfg.get_int("som.rows"), 7);
    EXPECT_EQ(cfg.get("som.topology"), "hex");
    EXPECT_EQ(cfg.get("render.absent_fill"), "#ffffff");
    EXPECT_EQ(message_of([&] { cfg.merge_text("som.rows = 3\n\nwhat\n", "b.cfg"); }),
              "b.cfg:3: expected 'key = value'");
    EXPECT_EQ(message_of([&] { cfg.merge_text("x.y = 1\n", "c.cfg"); }), "c.cfg:1: unknown config key 'x.y'");
}

TEST(Config, TextRoundTrip) {
    RunConfig a;
    a.set("render.title", "map of things");
    a.set("bench.sample_sizes", "10, 20");
    RunConfig b;
    b.merge_text(a.to_text());
    EXPECT_EQ(a.to_text(), b.to_text());
    EXPECT_EQ(b.keys(), a.keys());
}

TEST(Config, TypedGetters) {
    RunConfig cfg;
    cfg.set("som.rows", "12x");
    EXPECT_THROW(cfg.get_int("som.rows"), ConfigurationError);
    cfg.set("run.seed", "-1");
    EXPECT_THROW(cfg.get_u64("run.seed"), ConfigurationError);
    cfg.set("run.seed", "18446744073709551615");
    EXPECT_EQ(cfg.get_u64("run.seed"), 18446744073709551615ull);
    for (const char* v : {"true", "1", "yes", "on"}) {
        cfg.set("bench.large", v);
        EXPECT_TRUE(cfg.get_bool("bench.large"));
    }
    cfg.set("bench.large", "maybe");
    EXPECT_THROW(cfg.get_bool("bench.large"), ConfigurationError);
    cfg.set("bench.sample_sizes", " 5 ,6,7");
    EXPECT_EQ(cfg.get_sizes("bench.sample_sizes"), (std::vector<std::size_t>{5, 6, 7}));
    cfg.set("bench.sample_sizes", "5,-6");
    EXPECT_THROW(cfg.get_sizes("bench.sample_sizes"), ConfigurationError);
    cfg.set("bench.sample_sizes", "");
    EXPECT_THROW(cfg.get_sizes("bench.sample_sizes"), ConfigurationError);
    cfg.set("train.lr0", "0.25");
    EXPECT_EQ(cfg.get_double("train.lr0"), 0.25);
    cfg.set("train.lr0", "fast");
    EXPECT_THROW(cfg.get_double("train.lr0"), ConfigurationError);
}

TEST(Config, BuildersReportBadValues) {
    RunConfig cfg;
    cfg.set("bench.topology", "torus");
    const std::string msg = message_of([&] { bench_plan(cfg); });
    EXPECT_NE(msg.find("bench.topology"), std::string::npos) << msg;
    EXPECT_THROW(bench_plan(cfg), ConfigurationError);

    cfg = RunConfig();
    cfg.set("train.update_mode", "sometimes");
    EXPECT_THROW(train_config(cfg), ConfigurationError);
    cfg = RunConfig();
    cfg.set("train.epochs", "0");
    EXPECT_THROW(train_config(cfg), Error);
    cfg = RunConfig();
    cfg.set("som.rows", "0");
    EXPECT_THROW(som_topology(cfg), ConfigurationError);
    cfg = RunConfig();
    cfg.set("blobs.box_min", "10");
    EXPECT_THROW(blob_spec(cfg), ConfigurationError);
    cfg = RunConfig();
    cfg.set("render.cell_size", "-1");
    EXPECT_THROW(render_style(cfg), ConfigurationError);
    cfg = RunConfig();
    cfg.set("render.colormap", "jet");
    EXPECT_THROW(render_style(cfg), ConfigurationError);
}

TEST(Config, MergeFile) {
    const auto path = std::filesystem::path(::testing::TempDir()) / "somkit_test.cfg";
    std::ofstream(path) << "train.epochs = 9\n";
    RunConfig cfg;
    cfg.merge_file(path);
    EXPECT_EQ(cfg.get_int("train.epochs"), 9);
    EXPECT_THROW(cfg.merge_file("/nonexistent/x.cfg"), InputError);
}
