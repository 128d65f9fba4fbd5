#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "somkit/matrix.hpp"

namespace somkit {

/// N x k feature matrix with an optional regression target and/or class labels.
struct Dataset {
    Matrix features;
    std::optional<std::vector<double>> target;
    std::optional<std::vector<int>> labels;
    std::vector<std::string> feature_names;

    std::size_t size() const noexcept { return features.rows(); }
    std::size_t dim() const noexcept { return features.cols(); }

    /// Throws on inconsistent lengths or non-finite features.
    void validate() const;
    /// Rows at the given indices, in that order.
    Dataset subset(const std::vector<std::size_t>& indices) const;
};

struct BlobSpec {
    std::size_t n_samples = 100;
    std::size_t n_features = 2;
    std::size_t n_centers = 3;
    double cluster_std = 1.0;
    double box_min = -10.0;
    double box_max = 10.0;
    std::uint64_t seed = 0;
};

/// Isotropic Gaussian blobs; labels hold the generating center id.
Dataset make_blobs(const BlobSpec& spec);

struct CsvOptions {
    std::optional<std::string> target_column;
    std::optional<std::string> label_column;
};

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
/// Parses CSV text; `source` names the input in error messages.
Dataset parse_csv(const std::string& text, const CsvOptions& options = {},
                  const std::string& source = "<memory>");
/// Features (then target, then label) with 17 significant digits.
void save_csv(const Dataset& data, const std::filesystem::path& path,
              const std::string& target_name = "target", const std::string& label_name = "label");

/// Per-feature z-score parameters.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> stddev;
    std::vector<bool> constant;  // zero-variance features map to 0

    Dataset transform(const Dataset& data) const;
    Dataset inverse_transform(const Dataset& data) const;
    void transform_row(std::span<double> row) const;

    void save(const std::filesystem::path& path) const;
    static Scaler load(const std::filesystem::path& path);
};

Scaler fit_scaler(const Dataset& data);
std::pair<Dataset, Scaler> standardize(const Dataset& data);

struct Split {
    Dataset train;
    Dataset test;
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
};

/// Seeded shuffle; test gets ceil(N * test_fraction) rows.
Split split(const Dataset& data, double test_fraction, std::uint64_t seed);

}  // namespace somkit
