#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "somkit/data.hpp"
#include "somkit/grid.hpp"
#include "somkit/kernels.hpp"
#include "somkit/matrix.hpp"

namespace somkit {

/// Codebook of rows*cols weight vectors in R^dim (row-major neuron order).
/// Metric and kernel are fixed at construction; training mutates weights only.
class SomModel {
public:
    SomModel(GridTopology topo, std::size_t dim, Metric metric = Metric::Euclidean,
             Kernel kernel = Kernel::Gaussian);
    SomModel(GridTopology topo, Matrix weights, Metric metric, Kernel kernel);

    const GridTopology& topology() const noexcept { return topo_; }
    std::size_t dim() const noexcept { return weights_.cols(); }
    std::size_t neuron_count() const noexcept { return weights_.rows(); }
    Metric metric() const noexcept { return metric_; }
    Kernel kernel() const noexcept { return kernel_; }

    const Matrix& weights() const noexcept { return weights_; }
    Matrix& weights() noexcept { return weights_; }
    std::span<const double> weight(NeuronCoord c) const { return weights_.row(topo_.flat_index(c)); }

    friend bool operator==(const SomModel&, const SomModel&) = default;

private:
    GridTopology topo_;
    Matrix weights_;
    Metric metric_;
    Kernel kernel_;
};

enum class UpdateMode { Online, Batch };
std::string_view to_string(UpdateMode m);
UpdateMode parse_update_mode(std::string_view s);

struct TrainConfig {
    int epochs = 100;
    double lr0 = 0.5;
    double sigma0 = 3.0;
    Schedule lr_schedule = Schedule::Inverse;
    Schedule sigma_schedule = Schedule::Inverse;
    UpdateMode update_mode = UpdateMode::Batch;
    std::uint64_t seed = 0;
    double d_th = 1.0;

    void validate() const;
};

struct FitReport {
    std::vector<double> qe_curve;
    std::vector<double> te_curve;
    double wall_seconds = 0.0;    // whole training loop
    double metric_seconds = 0.0;  // part of wall_seconds spent on QE/TE
};

struct BmuResult {
    NeuronCoord coord;
    double distance = 0.0;
    NeuronCoord second;
    double second_distance = 0.0;
};

struct Quality {
    double qe = 0.0;
    double te = 0.0;
};

/// Uniform weights inside each feature's data range.
SomModel init_random(const GridTopology& topo, std::size_t dim, const Dataset& data,
                     std::uint64_t seed, Metric metric = Metric::Euclidean,
                     Kernel kernel = Kernel::Gaussian);

struct PcaInit {
    SomModel model;
    bool fell_back = false;  // rank-0 data: random init with seed 0 was used
};

/// Weights laid on the plane of the top two principal components, rows along
/// the first, columns along the second, each spanning +-1 standard deviation.
PcaInit init_pca(const GridTopology& topo, std::size_t dim, const Dataset& data,
                 Metric metric = Metric::Euclidean, Kernel kernel = Kernel::Gaussian);

/// Nearest and second-nearest neurons; ties go to the lowest flat index.
BmuResult find_bmu(const SomModel& model, std::span<const double> x);

std::vector<NeuronCoord> predict_bmus(const SomModel& model, const Dataset& data);

/// Sequential Kohonen updates over a seeded shuffle of the data.
void online_epoch(SomModel& model, const Dataset& data, double alpha, double sigma,
                  std::uint64_t shuffle_seed);

/// Kernel-weighted mean update against the epoch-start codebook.
void batch_epoch(SomModel& model, const Dataset& data, double sigma);

FitReport fit(SomModel& model, const Dataset& data, const TrainConfig& cfg);

double quantization_error(const SomModel& model, const Dataset& data);
double topographic_error(const SomModel& model, const Dataset& data, double d_th = 1.0);
/// QE and TE from a single BMU pass.
Quality evaluate(const SomModel& model, const Dataset& data, double d_th = 1.0);

inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const SomModel& model, const std::filesystem::path& path);
SomModel load_model(const std::filesystem::path& path);
std::string serialize_model(const SomModel& model);
SomModel deserialize_model(std::string_view bytes);

}  // namespace somkit
