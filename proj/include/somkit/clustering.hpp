#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "somkit/matrix.hpp"
#include "somkit/som.hpp"

namespace somkit {

enum class SpaceKind { Weights, Positions, Combined };
std::string_view to_string(SpaceKind s);
SpaceKind parse_space(std::string_view s);

struct ClusterSpace {
    SpaceKind kind = SpaceKind::Weights;
    double position_weight = 1.0;  // lambda, Combined only
};

struct ClusterResult {
    std::vector<int> assignment;  // one id per row, contiguous 0..k-1
    int k = 0;
    double score = 0.0;           // inertia (k-means) or log-likelihood (GMM)
    std::vector<double> history;  // score per iteration
    int iterations = 0;
    Matrix centers;
};

/// Neuron feature rows for clustering in the requested space.
Matrix cluster_features(const SomModel& model, const ClusterSpace& space);

struct KMeansOptions {
    int n_init = 10;  // k-means++ restarts; the lowest inertia wins, ties to the earliest
    int max_iter = 300;
    double tol = 1e-6;
};

/// Lloyd iterations from k-means++ seeding, best of opt.n_init restarts.
ClusterResult kmeans(const Matrix& features, int k, std::uint64_t seed, const KMeansOptions& opt = {});
/// Lloyd iterations from given initial centers (one row per cluster).
ClusterResult kmeans_from(const Matrix& features, Matrix centers, const KMeansOptions& opt = {});

struct GmmOptions {
    int max_iter = 200;
    double tol = 1e-6;
    double reg = 1e-6;  // variance floor
};

/// Diagonal-covariance EM initialized from k-means.
ClusterResult gmm(const Matrix& features, int k, std::uint64_t seed, const GmmOptions& opt = {});

struct ElbowResult {
    std::vector<int> ks;
    std::vector<double> inertias;
    int selected_k = 0;
};

/// k at the largest discrete second difference of the inertia curve (interior points).
int select_elbow(const std::vector<int>& ks, const std::vector<double>& inertias);

/// K-means over a contiguous k range; each k warm-starts from the previous
/// centers plus the farthest point, so inertia never increases with k.
ElbowResult elbow(const Matrix& features, int k_min, int k_max, std::uint64_t seed);

struct QualityMetrics {
    double silhouette = 0.0;
    double davies_bouldin = 0.0;
    double calinski_harabasz = 0.0;
};

QualityMetrics quality_metrics(const Matrix& features, const std::vector<int>& assignment);

using ClusterAlgorithm = std::function<ClusterResult(const Matrix&, int, std::uint64_t)>;

/// Registers a clustering algorithm under `name` (overwrites). "kmeans" and
/// "gmm" are always available.
void register_algorithm(const std::string& name, ClusterAlgorithm algorithm);
const ClusterAlgorithm& find_algorithm(const std::string& name);
std::vector<std::string> algorithm_names();

struct ComparisonRow {
    ClusterSpace space;
    std::string algorithm;
    int k = 0;
    QualityMetrics metrics;
    double score = 0.0;
};

std::vector<ComparisonRow> compare(const SomModel& model, const std::vector<ClusterSpace>& spaces,
                                   const std::vector<std::string>& algorithms, int k,
                                   std::uint64_t seed);

std::string comparison_to_csv(const std::vector<ComparisonRow>& rows);

}  // namespace somkit
