#include "somkit/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>

#include <fmt/format.h>

#include "somkit/error.hpp"

namespace somkit {

std::string_view to_string(SpaceKind s) {
    switch (s) {
        case SpaceKind::Weights: return "weights";
        case SpaceKind::Positions: return "positions";
        case SpaceKind::Combined: return "combined";
    }
    return "?";
}

SpaceKind parse_space(std::string_view s) {
    if (s == "weights") return SpaceKind::Weights;
    if (s == "positions") return SpaceKind::Positions;
    if (s == "combined") return SpaceKind::Combined;
    throw ParameterError(fmt::format("unknown cluster space '{}'", s));
}

Matrix cluster_features(const SomModel& model, const ClusterSpace& space) {
    if (space.kind == SpaceKind::Weights) return model.weights();
    if (!(space.position_weight > 0.0)) throw ParameterError("position weight must be > 0");

    const GridTopology& topo = model.topology();
    const std::size_t m = topo.size();
    Matrix pos(m, 2);
    for (std::size_t j = 0; j < m; ++j) {
        const PlanarPosition p = topo.planar_position(topo.coord(j));
        pos(j, 0) = p.x;
        pos(j, 1) = p.y;
    }
    for (std::size_t a = 0; a < 2; ++a) {
        double lo = pos(0, a), hi = pos(0, a);
        for (std::size_t j = 0; j < m; ++j) {
            lo = std::min(lo, pos(j, a));
            hi = std::max(hi, pos(j, a));
        }
        for (std::size_t j = 0; j < m; ++j) pos(j, a) = hi > lo ? (pos(j, a) - lo) / (hi - lo) : 0.0;
    }
    if (space.kind == SpaceKind::Positions) return pos;

    const Matrix& w = model.weights();
    const std::size_t k = w.cols();
    Matrix out(m, k + 2);
    for (std::size_t l = 0; l < k; ++l) {
        double mean = 0.0;
        for (std::size_t j = 0; j < m; ++j) mean += w(j, l);
        mean /= static_cast<double>(m);
        double var = 0.0;
        for (std::size_t j = 0; j < m; ++j) var += (w(j, l) - mean) * (w(j, l) - mean);
        const double sd = std::sqrt(var / static_cast<double>(m));
        for (std::size_t j = 0; j < m; ++j) out(j, l) = sd > 0.0 ? (w(j, l) - mean) / sd : 0.0;
    }
    for (std::size_t j = 0; j < m; ++j) {
        out(j, k) = space.position_weight * pos(j, 0);
        out(j, k + 1) = space.position_weight * pos(j, 1);
    }
    return out;
}

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t l = 0; l < a.size(); ++l) s += (a[l] - b[l]) * (a[l] - b[l]);
    return s;
}

void check_k(const Matrix& features, int k) {
    if (k < 1 || static_cast<std::size_t>(k) > features.rows()) {
        throw ParameterError(fmt::format("cluster count {} outside [1, {}]", k, features.rows()));
    }
}

// Nearest center per row (ties to lowest id); returns the summed squared distance.
double assign_nearest(const Matrix& x, const Matrix& centers, std::vector<int>& labels,
                      std::vector<double>& dist) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centers.rows(); ++c) {
            const double d = sq_dist(x.row(i), centers.row(c));
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(c);
            }
        }
        labels[i] = best;
        dist[i] = best_d;
        total += best_d;
    }
    return total;
}

// Renumbers labels to 0..k'-1 preserving id order; drops empty clusters' centers.
int compact(std::vector<int>& labels, Matrix& centers) {
    std::vector<int> remap(centers.rows(), -1);
    std::vector<bool> used(centers.rows(), false);
    for (int l : labels) used[static_cast<std::size_t>(l)] = true;
    int next = 0;
    Matrix kept;
    for (std::size_t c = 0; c < centers.rows(); ++c) {
        if (!used[c]) continue;
        remap[c] = next++;
        kept.append_row(centers.row(c));
    }
    for (int& l : labels) l = remap[static_cast<std::size_t>(l)];
    if (next != static_cast<int>(centers.rows())) centers = std::move(kept);
    return next;
}

std::size_t farthest_point(const Matrix& x, const Matrix& centers) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centers.rows(); ++c) d = std::min(d, sq_dist(x.row(i), centers.row(c)));
        if (d > best) {
            best = d;
            arg = i;
        }
    }
    return arg;
}

}  // namespace

ClusterResult kmeans_from(const Matrix& x, Matrix centers, const KMeansOptions& opt) {
    const int k = static_cast<int>(centers.rows());
    check_k(x, k);
    if (centers.cols() != x.cols()) throw ShapeError("initial centers have the wrong width");
    const std::size_t n = x.rows(), p = x.cols();

    ClusterResult r;
    std::vector<int> labels(n, 0);
    std::vector<double> dist(n, 0.0);
    std::vector<int> previous;
    for (int iter = 0; iter < opt.max_iter; ++iter) {
        r.history.push_back(assign_nearest(x, centers, labels, dist));
        r.iterations = iter + 1;
        if (labels == previous) break;
        previous = labels;

        Matrix next(static_cast<std::size_t>(k), p);
        std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(labels[i]);
            ++counts[c];
            auto dst = next.row(c);
            auto src = x.row(i);
            for (std::size_t l = 0; l < p; ++l) dst[l] += src[l];
        }
        std::vector<bool> taken(n, false);
        double shift = 0.0;
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            auto dst = next.row(c);
            if (counts[c] == 0) {
                // Empty cluster: move it onto the worst-served point.
                std::size_t arg = 0;
                double worst = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (!taken[i] && dist[i] > worst) {
                        worst = dist[i];
                        arg = i;
                    }
                }
                taken[arg] = true;
                std::copy_n(x.row(arg).begin(), p, dst.begin());
            } else {
                for (double& v : dst) v /= static_cast<double>(counts[c]);
            }
            shift = std::max(shift, sq_dist(dst, centers.row(c)));
        }
        centers = std::move(next);
        if (shift <= opt.tol * opt.tol) {
            r.history.push_back(assign_nearest(x, centers, labels, dist));
            break;
        }
    }
    if (labels != previous) {
        // Loop ended on the iteration cap right after an update.
        const double final_inertia = assign_nearest(x, centers, labels, dist);
        if (r.history.empty() || final_inertia != r.history.back()) r.history.push_back(final_inertia);
    }
    r.score = r.history.back();
    r.k = compact(labels, centers);
    r.assignment = std::move(labels);
    r.centers = std::move(centers);
    return r;
}

ClusterResult kmeans(const Matrix& x, int k, std::uint64_t seed, const KMeansOptions& opt) {
    check_k(x, k);
    const std::size_t n = x.rows();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    if (opt.n_init < 1) throw ParameterError(fmt::format("n_init must be >= 1, got {}", opt.n_init));

    std::optional<ClusterResult> best;
    for (int attempt = 0; attempt < opt.n_init; ++attempt) {
        Matrix centers;
        std::vector<double> d2(n, std::numeric_limits<double>::infinity());
        std::size_t first = std::min<std::size_t>(n - 1, static_cast<std::size_t>(unit(rng) * n));
        centers.append_row(x.row(first));
        while (centers.rows() < static_cast<std::size_t>(k)) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                d2[i] = std::min(d2[i], sq_dist(x.row(i), centers.row(centers.rows() - 1)));
                total += d2[i];
            }
            std::size_t pick = n - 1;
            if (total > 0.0) {
                const double target = unit(rng) * total;
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    acc += d2[i];
                    if (d2[i] > 0.0 && acc >= target) {
                        pick = i;
                        break;
                    }
                }
            } else {
                pick = static_cast<std::size_t>(unit(rng) * n) % n;
            }
            centers.append_row(x.row(pick));
        }
        ClusterResult r = kmeans_from(x, std::move(centers), opt);
        if (!best || r.score < best->score) best = std::move(r);
    }
    return std::move(*best);
}

ClusterResult gmm(const Matrix& x, int k, std::uint64_t seed, const GmmOptions& opt) {
    check_k(x, k);
    if (!(opt.reg > 0.0)) throw ParameterError("GMM variance floor must be > 0");
    const std::size_t n = x.rows(), p = x.cols();
    const ClusterResult init = kmeans(x, k, seed);
    const std::size_t kc = static_cast<std::size_t>(init.k);

    Matrix means = init.centers;
    Matrix vars(kc, p, 0.0);
    std::vector<double> weights(kc, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(init.assignment[i]);
        weights[c] += 1.0;
        for (std::size_t l = 0; l < p; ++l) {
            const double d = x(i, l) - means(c, l);
            vars(c, l) += d * d;
        }
    }
    for (std::size_t c = 0; c < kc; ++c) {
        for (std::size_t l = 0; l < p; ++l) vars(c, l) = std::max(vars(c, l) / weights[c], opt.reg);
        weights[c] /= static_cast<double>(n);
    }

    const double log2pi = std::log(2.0 * std::numbers::pi);
    Matrix resp(n, kc);
    ClusterResult r;
    for (int iter = 0; iter < opt.max_iter; ++iter) {
        // E-step
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < kc; ++c) {
                double lp = weights[c] > 0.0 ? std::log(weights[c]) : -std::numeric_limits<double>::infinity();
                for (std::size_t l = 0; l < p; ++l) {
                    const double d = x(i, l) - means(c, l);
                    lp -= 0.5 * (log2pi + std::log(vars(c, l)) + d * d / vars(c, l));
                }
                resp(i, c) = lp;
                mx = std::max(mx, lp);
            }
            double s = 0.0;
            for (std::size_t c = 0; c < kc; ++c) s += std::exp(resp(i, c) - mx);
            const double lse = mx + std::log(s);
            ll += lse;
            for (std::size_t c = 0; c < kc; ++c) resp(i, c) = std::exp(resp(i, c) - lse);
        }
        const bool converged = iter > 0 && ll - r.history.back() < opt.tol;
        r.history.push_back(ll);
        r.iterations = iter + 1;
        if (converged || iter + 1 == opt.max_iter) break;

        // M-step
        for (std::size_t c = 0; c < kc; ++c) {
            double nc = 0.0;
            for (std::size_t i = 0; i < n; ++i) nc += resp(i, c);
            weights[c] = nc / static_cast<double>(n);
            if (nc <= 0.0) continue;
            for (std::size_t l = 0; l < p; ++l) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i) s += resp(i, c) * x(i, l);
                means(c, l) = s / nc;
            }
            for (std::size_t l = 0; l < p; ++l) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = x(i, l) - means(c, l);
                    s += resp(i, c) * d * d;
                }
                vars(c, l) = std::max(s / nc, opt.reg);
            }
        }
    }

    std::vector<int> labels(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < kc; ++c) {
            if (resp(i, c) > resp(i, best)) best = c;
        }
        labels[i] = static_cast<int>(best);
    }
    r.score = r.history.back();
    r.k = compact(labels, means);
    r.assignment = std::move(labels);
    r.centers = std::move(means);
    return r;
}

int select_elbow(const std::vector<int>& ks, const std::vector<double>& inertias) {
    if (ks.size() != inertias.size()) throw ShapeError("elbow curve and k range differ in length");
    if (ks.size() < 3) throw ParameterError("elbow needs at least 3 k values");
    std::size_t best = 1;
    double best_d2 = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < ks.size(); ++i) {
        const double d2 = inertias[i - 1] - 2.0 * inertias[i] + inertias[i + 1];
        if (d2 > best_d2) {
            best_d2 = d2;
            best = i;
        }
    }
    return ks[best];
}

ElbowResult elbow(const Matrix& x, int k_min, int k_max, std::uint64_t seed) {
    if (k_max - k_min + 1 < 3) throw ParameterError("elbow needs a k range of at least 3 values");
    check_k(x, k_min);
    check_k(x, k_max);
    ElbowResult out;
    ClusterResult prev = kmeans(x, k_min, seed);
    out.ks.push_back(k_min);
    out.inertias.push_back(prev.score);
    for (int k = k_min + 1; k <= k_max; ++k) {
        Matrix init = prev.centers;
        while (init.rows() < static_cast<std::size_t>(k)) init.append_row(x.row(farthest_point(x, init)));
        prev = kmeans_from(x, std::move(init));
        out.ks.push_back(k);
        out.inertias.push_back(prev.score);
    }
    out.selected_k = select_elbow(out.ks, out.inertias);
    return out;
}

QualityMetrics quality_metrics(const Matrix& x, const std::vector<int>& assignment) {
    const std::size_t n = x.rows(), p = x.cols();
    if (assignment.size() != n) throw ShapeError("assignment length does not match feature rows");
    int k = 0;
    for (int a : assignment) {
        if (a < 0) throw MetricError("negative cluster id");
        k = std::max(k, a + 1);
    }
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (int a : assignment) ++counts[static_cast<std::size_t>(a)];
    if (k < 2) throw MetricError("quality metrics need at least 2 clusters");
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0) throw MetricError(fmt::format("cluster {} is empty", c));
    }
    const auto kk = static_cast<std::size_t>(k);

    // Silhouette; singletons score 0.
    double sil = 0.0;
    std::vector<double> sums(kk);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) sums[static_cast<std::size_t>(assignment[j])] += std::sqrt(sq_dist(x.row(i), x.row(j)));
        }
        const auto own = static_cast<std::size_t>(assignment[i]);
        if (counts[own] == 1) continue;
        const double a = sums[own] / static_cast<double>(counts[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < kk; ++c) {
            if (c != own) b = std::min(b, sums[c] / static_cast<double>(counts[c]));
        }
        const double denom = std::max(a, b);
        if (denom > 0.0) sil += (b - a) / denom;
    }

    Matrix centroids(kk, p);
    std::vector<double> overall(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto c = centroids.row(static_cast<std::size_t>(assignment[i]));
        for (std::size_t l = 0; l < p; ++l) {
            c[l] += x(i, l);
            overall[l] += x(i, l);
        }
    }
    for (std::size_t c = 0; c < kk; ++c) {
        for (double& v : centroids.row(c)) v /= static_cast<double>(counts[c]);
    }
    for (double& v : overall) v /= static_cast<double>(n);

    std::vector<double> scatter(kk, 0.0);
    double within = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(assignment[i]);
        const double d2 = sq_dist(x.row(i), centroids.row(c));
        scatter[c] += std::sqrt(d2);
        within += d2;
    }
    for (std::size_t c = 0; c < kk; ++c) scatter[c] /= static_cast<double>(counts[c]);

    double db = 0.0;
    for (std::size_t c = 0; c < kk; ++c) {
        double worst = 0.0;
        for (std::size_t o = 0; o < kk; ++o) {
            if (o == c) continue;
            const double sep = std::sqrt(sq_dist(centroids.row(c), centroids.row(o)));
            const double ratio = sep > 0.0 ? (scatter[c] + scatter[o]) / sep
                                           : std::numeric_limits<double>::infinity();
            worst = std::max(worst, ratio);
        }
        db += worst;
    }
    db /= static_cast<double>(kk);

    double between = 0.0;
    for (std::size_t c = 0; c < kk; ++c) between += counts[c] * sq_dist(centroids.row(c), overall);
    double ch = 1.0;
    if (within > 0.0 && n > kk) {
        ch = (between / static_cast<double>(kk - 1)) / (within / static_cast<double>(n - kk));
    }
    return {sil / static_cast<double>(n), db, ch};
}

namespace {

std::map<std::string, ClusterAlgorithm>& registry() {
    static std::map<std::string, ClusterAlgorithm> algorithms = {
        {"kmeans", [](const Matrix& x, int k, std::uint64_t seed) { return kmeans(x, k, seed); }},
        {"gmm", [](const Matrix& x, int k, std::uint64_t seed) { return gmm(x, k, seed); }},
    };
    return algorithms;
}

}  // namespace

void register_algorithm(const std::string& name, ClusterAlgorithm algorithm) {
    registry()[name] = std::move(algorithm);
}

const ClusterAlgorithm& find_algorithm(const std::string& name) {
    const auto it = registry().find(name);
    if (it == registry().end()) throw ParameterError(fmt::format("unknown clustering algorithm '{}'", name));
    return it->second;
}

std::vector<std::string> algorithm_names() {
    std::vector<std::string> names;
    for (const auto& [name, fn] : registry()) names.push_back(name);
    return names;
}

std::vector<ComparisonRow> compare(const SomModel& model, const std::vector<ClusterSpace>& spaces,
                                   const std::vector<std::string>& algorithms, int k,
                                   std::uint64_t seed) {
    std::vector<ComparisonRow> rows;
    for (const ClusterSpace& space : spaces) {
        const Matrix features = cluster_features(model, space);
        for (const std::string& name : algorithms) {
            const ClusterResult r = find_algorithm(name)(features, k, seed);
            rows.push_back({space, name, r.k, quality_metrics(features, r.assignment), r.score});
        }
    }
    return rows;
}

std::string comparison_to_csv(const std::vector<ComparisonRow>& rows) {
    std::string out = "space,algorithm,k,silhouette,davies_bouldin,calinski_harabasz,inertia_or_loglik\n";
    for (const ComparisonRow& r : rows) {
        out += fmt::format("{},{},{},{:.17g},{:.17g},{:.17g},{:.17g}\n", to_string(r.space.kind), r.algorithm,
                           r.k, r.metrics.silhouette, r.metrics.davies_bouldin,
                           r.metrics.calinski_harabasz, r.score);
    }
    return out;
}

}  // namespace somkit
