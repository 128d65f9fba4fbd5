#include "somkit/som.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "somkit/error.hpp"
#include "somkit/parallel.hpp"

namespace somkit {

SomModel::SomModel(GridTopology topo, std::size_t dim, Metric metric, Kernel kernel)
    : topo_(topo), weights_(topo.size(), dim), metric_(metric), kernel_(kernel) {
    if (dim == 0) throw ParameterError("model dimension must be >= 1");
}

SomModel::SomModel(GridTopology topo, Matrix weights, Metric metric, Kernel kernel)
    : topo_(topo), weights_(std::move(weights)), metric_(metric), kernel_(kernel) {
    if (weights_.rows() != topo_.size()) {
        throw ShapeError(fmt::format("codebook has {} rows for a grid of {} neurons", weights_.rows(),
                                     topo_.size()));
    }
    if (weights_.cols() == 0) throw ParameterError("model dimension must be >= 1");
}

std::string_view to_string(UpdateMode m) { return m == UpdateMode::Online ? "online" : "batch"; }

UpdateMode parse_update_mode(std::string_view s) {
    if (s == "online") return UpdateMode::Online;
    if (s == "batch") return UpdateMode::Batch;
    throw ParameterError(fmt::format("unknown update mode '{}'", s));
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ParameterError(fmt::format("epochs must be >= 1, got {}", epochs));
    if (!(lr0 >= 0.0) || !std::isfinite(lr0)) throw ParameterError("learning rate must be >= 0");
    if (!(sigma0 >= 1.0) || !std::isfinite(sigma0)) {
        throw ParameterError(fmt::format("sigma0 must be >= 1, got {}", sigma0));
    }
    if (!(d_th > 0.0)) throw ParameterError("d_th must be > 0");
}

namespace {

void check_data(const SomModel& model, const Dataset& data) {
    if (data.dim() != model.dim()) {
        throw ShapeError(fmt::format("data has {} features, model expects {}", data.dim(), model.dim()));
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (double v : data.features.row(i)) {
            if (!std::isfinite(v)) throw InputError(fmt::format("non-finite value in sample row {}", i));
        }
    }
}

struct Winner {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    std::size_t second = 0;
    double second_d = std::numeric_limits<double>::infinity();
};

// Strict comparisons keep the lowest index on ties.
Winner scan(const SomModel& model, const double* x) {
    const Matrix& w = model.weights();
    const std::size_t k = w.cols();
    const Metric metric = model.metric();
    Winner r;
    for (std::size_t j = 0; j < w.rows(); ++j) {
        const double d = detail::distance_unchecked(metric, x, w.row(j).data(), k);
        if (d < r.best_d) {
            r.second = r.best;
            r.second_d = r.best_d;
            r.best = j;
            r.best_d = d;
        } else if (d < r.second_d) {
            r.second = j;
            r.second_d = d;
        }
    }
    return r;
}

std::vector<Winner> scan_all(const SomModel& model, const Dataset& data) {
    std::vector<Winner> out(data.size());
    parallel_for(data.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) out[i] = scan(model, data.features.row(i).data());
    });
    return out;
}

Quality quality_from(const SomModel& model, const std::vector<Winner>& winners, double d_th) {
    const GridTopology& topo = model.topology();
    double qe = 0.0;
    std::size_t errors = 0;
    for (const Winner& w : winners) {
        qe += w.best_d;
        if (topo.ring_distance(topo.coord(w.best), topo.coord(w.second)) > d_th) ++errors;
    }
    const double n = static_cast<double>(winners.size());
    return {qe / n, static_cast<double>(errors) / n};
}

/// Kernel weights indexed by (BMU row parity, drow, dcol).
class NeighborhoodTable {
public:
    NeighborhoodTable(const GridTopology& topo, Kernel kernel, double sigma)
        : rows_(topo.rows()), cols_(topo.cols()), hex_(topo.kind() == Topology::Hexagonal) {
        const int h = 2 * rows_ - 1, w = 2 * cols_ - 1;
        values_.assign(static_cast<std::size_t>(2 * h * w), 0.0);
        for (int p = 0; p < 2; ++p) {
            for (int dr = -(rows_ - 1); dr <= rows_ - 1; ++dr) {
                for (int dc = -(cols_ - 1); dc <= cols_ - 1; ++dc) {
                    double dx = dc, dy = dr;
                    if (hex_) {
                        const int parity = ((p + dr) % 2 + 2) % 2;
                        dx = dc + 0.5 * (parity - p);
                        dy = dr * kHexRowPitch;
                    }
                    values_[index(p, dr, dc)] = kernel_value(kernel, std::sqrt(dx * dx + dy * dy), sigma);
                }
            }
        }
    }

    double operator()(NeuronCoord bmu, NeuronCoord n) const {
        return values_[index(hex_ ? bmu.row % 2 : 0, n.row - bmu.row, n.col - bmu.col)];
    }

private:
    std::size_t index(int p, int dr, int dc) const {
        const int h = 2 * rows_ - 1, w = 2 * cols_ - 1;
        return static_cast<std::size_t>((p * h + dr + rows_ - 1) * w + dc + cols_ - 1);
    }

    int rows_, cols_;
    bool hex_;
    std::vector<double> values_;
};

void batch_update(SomModel& model, const Dataset& data, const std::vector<std::size_t>& bmus,
                  double sigma) {
    const GridTopology& topo = model.topology();
    const std::size_t m = topo.size(), k = model.dim();
    std::vector<double> counts(m, 0.0);
    Matrix sums(m, k);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::size_t b = bmus[i];
        counts[b] += 1.0;
        auto s = sums.row(b);
        auto x = data.features.row(i);
        for (std::size_t l = 0; l < k; ++l) s[l] += x[l];
    }
    std::vector<std::size_t> active;
    for (std::size_t b = 0; b < m; ++b) {
        if (counts[b] > 0) active.push_back(b);
    }
    std::vector<NeuronCoord> active_coords;
    active_coords.reserve(active.size());
    for (std::size_t b : active) active_coords.push_back(topo.coord(b));

    const NeighborhoodTable table(topo, model.kernel(), sigma);
    Matrix& w = model.weights();
    parallel_for(m, [&](std::size_t begin, std::size_t end) {
        std::vector<double> num(k);
        for (std::size_t j = begin; j < end; ++j) {
            const NeuronCoord nj = topo.coord(j);
            std::fill(num.begin(), num.end(), 0.0);
            double den = 0.0;
            for (std::size_t a = 0; a < active.size(); ++a) {
                const double h = table(active_coords[a], nj);
                if (h == 0.0) continue;
                den += h * counts[active[a]];
                auto s = sums.row(active[a]);
                for (std::size_t l = 0; l < k; ++l) num[l] += h * s[l];
            }
            if (den == 0.0) continue;
            auto wj = w.row(j);
            for (std::size_t l = 0; l < k; ++l) wj[l] = num[l] / den;
        }
    }, 4);
}

std::vector<std::size_t> firsts(const std::vector<Winner>& winners) {
    std::vector<std::size_t> out(winners.size());
    for (std::size_t i = 0; i < winners.size(); ++i) out[i] = winners[i].best;
    return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t t) {
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (t + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

SomModel init_random(const GridTopology& topo, std::size_t dim, const Dataset& data,
                     std::uint64_t seed, Metric metric, Kernel kernel) {
    if (data.size() == 0) throw InputError("cannot initialize from empty data");
    if (data.dim() != dim) {
        throw InputError(fmt::format("requested dimension {} but data has {} features", dim, data.dim()));
    }
    std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
    std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto x = data.features.row(i);
        for (std::size_t l = 0; l < dim; ++l) {
            lo[l] = std::min(lo[l], x[l]);
            hi[l] = std::max(hi[l], x[l]);
        }
    }
    SomModel model(topo, dim, metric, kernel);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t j = 0; j < model.neuron_count(); ++j) {
        auto w = model.weights().row(j);
        for (std::size_t l = 0; l < dim; ++l) {
            const double u = unit(rng);
            w[l] = lo[l] == hi[l] ? lo[l] : lo[l] + u * (hi[l] - lo[l]);
        }
    }
    return model;
}

PcaInit init_pca(const GridTopology& topo, std::size_t dim, const Dataset& data, Metric metric,
                 Kernel kernel) {
    if (data.size() == 0) throw InputError("cannot initialize from empty data");
    if (data.dim() != dim) {
        throw InputError(fmt::format("requested dimension {} but data has {} features", dim, data.dim()));
    }
    const auto n = static_cast<Eigen::Index>(data.size());
    const auto k = static_cast<Eigen::Index>(dim);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(
        data.features.data().data(), n, k);
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - mean;
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n);

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::VectorXd& values = eig.eigenvalues();  // ascending
    const double scale = std::max(1.0, centered.cwiseAbs().maxCoeff() + mean.cwiseAbs().maxCoeff());
    if (!(values(k - 1) > 1e-20 * scale * scale)) {
        return {init_random(topo, dim, data, 0, metric, kernel), true};
    }

    auto component = [&](Eigen::Index which) {
        Eigen::VectorXd v = eig.eigenvectors().col(which);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        return v;
    };
    const Eigen::VectorXd pc1 = component(k - 1);
    const Eigen::VectorXd pc2 = k >= 2 ? component(k - 2) : Eigen::VectorXd::Zero(k);
    const double l1 = std::sqrt(std::max(0.0, values(k - 1)));
    const double l2 = k >= 2 ? std::sqrt(std::max(0.0, values(k - 2))) : 0.0;

    SomModel model(topo, dim, metric, kernel);
    const int rows = topo.rows(), cols = topo.cols();
    for (int i = 0; i < rows; ++i) {
        const double u = rows == 1 ? 0.0 : -1.0 + 2.0 * i / (rows - 1);
        for (int j = 0; j < cols; ++j) {
            const double v = cols == 1 ? 0.0 : -1.0 + 2.0 * j / (cols - 1);
            auto w = model.weights().row(topo.flat_index({i, j}));
            for (Eigen::Index l = 0; l < k; ++l) {
                w[l] = mean(l) + u * l1 * pc1(l) + v * l2 * pc2(l);
            }
        }
    }
    return {std::move(model), false};
}

BmuResult find_bmu(const SomModel& model, std::span<const double> x) {
    if (x.size() != model.dim()) {
        throw ShapeError(fmt::format("input has length {}, model expects {}", x.size(), model.dim()));
    }
    if (model.neuron_count() < 2) {
        throw ConfigurationError("second BMU undefined on a 1-neuron grid");
    }
    const Winner w = scan(model, x.data());
    const GridTopology& topo = model.topology();
    return {topo.coord(w.best), w.best_d, topo.coord(w.second), w.second_d};
}

std::vector<NeuronCoord> predict_bmus(const SomModel& model, const Dataset& data) {
    if (data.dim() != model.dim()) {
        throw ShapeError(fmt::format("data has {} features, model expects {}", data.dim(), model.dim()));
    }
    const auto winners = scan_all(model, data);
    std::vector<NeuronCoord> out;
    out.reserve(winners.size());
    for (const Winner& w : winners) out.push_back(model.topology().coord(w.best));
    return out;
}

void online_epoch(SomModel& model, const Dataset& data, double alpha, double sigma,
                  std::uint64_t shuffle_seed) {
    check_data(model, data);
    if (!(alpha >= 0.0)) throw ParameterError("learning rate must be >= 0");
    if (!(sigma > 0.0)) throw ParameterError("sigma must be > 0");
    const GridTopology& topo = model.topology();
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);

    const NeighborhoodTable table(topo, model.kernel(), sigma);
    Matrix& w = model.weights();
    const std::size_t k = model.dim();
    for (std::size_t i : order) {
        auto x = data.features.row(i);
        const NeuronCoord bmu = topo.coord(scan(model, x.data()).best);
        for (std::size_t j = 0; j < topo.size(); ++j) {
            const double h = table(bmu, topo.coord(j));
            if (h == 0.0) continue;
            const double step = alpha * h;
            auto wj = w.row(j);
            for (std::size_t l = 0; l < k; ++l) wj[l] += step * (x[l] - wj[l]);
        }
    }
}

void batch_epoch(SomModel& model, const Dataset& data, double sigma) {
    check_data(model, data);
    if (data.size() == 0) throw InputError("batch epoch on empty data");
    if (!(sigma > 0.0)) throw ParameterError("sigma must be > 0");
    batch_update(model, data, firsts(scan_all(model, data)), sigma);
}

FitReport fit(SomModel& model, const Dataset& data, const TrainConfig& cfg) {
    cfg.validate();
    if (data.size() == 0) throw InputError("cannot train on empty data");
    check_data(model, data);
    if (model.neuron_count() < 2) throw ConfigurationError("training needs at least 2 neurons");

    const double gamma = default_gamma(cfg.epochs);
    const auto lrs = replay_schedule(ScheduleTarget::LearningRate, cfg.lr_schedule, cfg.lr0,
                                     cfg.epochs, gamma);
    const auto sigmas = replay_schedule(ScheduleTarget::Sigma, cfg.sigma_schedule, cfg.sigma0,
                                        cfg.epochs, gamma);

    using clock = std::chrono::steady_clock;
    FitReport report;
    report.qe_curve.reserve(cfg.epochs);
    report.te_curve.reserve(cfg.epochs);
    const auto start = clock::now();
    clock::duration metric_time{};

    // The metric pass of epoch t is run against the codebook that epoch t + 1
    // starts from, so its BMUs seed the next batch update.
    std::vector<std::size_t> cached;
    for (int t = 0; t < cfg.epochs; ++t) {
        if (cfg.update_mode == UpdateMode::Batch) {
            if (cached.empty()) cached = firsts(scan_all(model, data));
            batch_update(model, data, cached, sigmas[t]);
        } else {
            online_epoch(model, data, lrs[t], sigmas[t], mix_seed(cfg.seed, t));
        }
        const auto m0 = clock::now();
        const auto winners = scan_all(model, data);
        const Quality q = quality_from(model, winners, cfg.d_th);
        metric_time += clock::now() - m0;
        report.qe_curve.push_back(q.qe);
        report.te_curve.push_back(q.te);
        if (cfg.update_mode == UpdateMode::Batch) cached = firsts(winners);
    }
    report.wall_seconds = std::chrono::duration<double>(clock::now() - start).count();
    report.metric_seconds = std::chrono::duration<double>(metric_time).count();
    return report;
}

Quality evaluate(const SomModel& model, const Dataset& data, double d_th) {
    if (data.size() == 0) throw InputError("cannot evaluate on empty data");
    if (model.neuron_count() < 2) throw ConfigurationError("second BMU undefined on a 1-neuron grid");
    check_data(model, data);
    return quality_from(model, scan_all(model, data), d_th);
}

double quantization_error(const SomModel& model, const Dataset& data) {
    if (data.size() == 0) throw InputError("cannot evaluate on empty data");
    check_data(model, data);
    const auto winners = scan_all(model, data);
    double qe = 0.0;
    for (const Winner& w : winners) qe += w.best_d;
    return qe / static_cast<double>(winners.size());
}

double topographic_error(const SomModel& model, const Dataset& data, double d_th) {
    return evaluate(model, data, d_th).te;
}

}  // namespace somkit
