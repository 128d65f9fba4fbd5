#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "somkit/data.hpp"
#include "somkit/grid.hpp"
#include "somkit/som.hpp"

namespace somkit {

/// Fixed protocol: blobs, seeded split, z-score fitted on train, PCA init,
/// Gaussian kernel, Euclidean metric, test-set QE/TE.
struct BenchPlan {
    std::vector<std::size_t> sample_sizes{240, 4000};
    std::vector<std::size_t> feature_counts{4, 50};
    int rows = 25;
    int cols = 15;
    Topology topology = Topology::Rectangular;
    int epochs = 100;
    int runs = 10;
    std::vector<UpdateMode> update_modes{UpdateMode::Batch};
    std::uint64_t seed0 = 0;
    double test_fraction = 0.2;
    BlobSpec blobs;  // n_samples, n_features and seed are overwritten per run
    bool allow_large = false;
    bool parallel_cells = false;

    void validate() const;
};

/// Cells at or beyond 16000x300 samples/features, or maps of 6300+ neurons.
bool is_large_cell(std::size_t samples, std::size_t features, int rows, int cols);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // population std over runs

    friend bool operator==(const MeanStd&, const MeanStd&) = default;
};

MeanStd mean_std(const std::vector<double>& xs);

struct BenchRow {
    std::size_t samples = 0;
    std::size_t features = 0;
    int rows = 0;
    int cols = 0;
    Topology topology = Topology::Rectangular;
    UpdateMode update_mode = UpdateMode::Batch;
    int runs = 0;
    bool failed = false;
    std::string error;  // set when failed
    MeanStd qe;
    MeanStd te;
    MeanStd time_init_s;
    MeanStd time_train_s;    // fit(), including per-epoch curve tracking
    MeanStd time_metrics_s;  // final test-set evaluation

    friend bool operator==(const BenchRow&, const BenchRow&) = default;
};

/// One run's raw outcome, before aggregation.
struct BenchRun {
    Quality test;
    double time_init_s = 0.0;
    double time_train_s = 0.0;
    double time_metrics_s = 0.0;
};

BenchRun run_once(const BenchPlan& plan, std::size_t samples, std::size_t features, UpdateMode mode,
                  int run);

/// Aggregates plan.runs calls of run_once; exceptions mark the row failed.
BenchRow run_cell(const BenchPlan& plan, std::size_t samples, std::size_t features, UpdateMode mode);

using BenchProgress = std::function<void(const BenchRow&)>;

/// Rows ordered by (samples, features, mode) as listed in the plan. Large
/// cells without allow_large raise ConfigurationError before any work starts.
std::vector<BenchRow> run_plan(const BenchPlan& plan, const BenchProgress& progress = {});

enum class TableFormat { Csv, AlignedText };

std::string render_table(const std::vector<BenchRow>& rows, TableFormat format);
std::vector<BenchRow> parse_bench_csv(const std::string& text);

}  // namespace somkit
