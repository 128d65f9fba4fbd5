#pragma once

#include <cmath>
#include <span>
#include <string_view>
#include <vector>

namespace somkit {

enum class Kernel { Gaussian, MexicanHat, Bubble, Triangle };
enum class Metric { Cosine, Euclidean, Manhattan, Chebyshev };
enum class Schedule { Inverse, Linear };

std::string_view to_string(Kernel k);
std::string_view to_string(Metric m);
std::string_view to_string(Schedule s);
Kernel parse_kernel(std::string_view s);
Metric parse_metric(std::string_view s);
Schedule parse_schedule(std::string_view s);

/// Neighborhood weight at grid distance d for width sigma. Raw closed forms:
/// the Mexican hat keeps its 1/(pi sigma^4) prefactor and may go negative.
double kernel_value(Kernel kernel, double d, double sigma);

/// Feature-space distance between equal-length vectors.
double feature_distance(Metric metric, std::span<const double> x, std::span<const double> w);

namespace detail {

double cosine_from_parts(double dot, double nx2, double nw2);

// Unchecked hot-path variant; callers guarantee equal lengths.
inline double distance_unchecked(Metric metric, const double* x, const double* w, std::size_t k) {
    switch (metric) {
        case Metric::Euclidean: {
            double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
            std::size_t l = 0;
            for (; l + 4 <= k; l += 4) {
                const double d0 = x[l] - w[l], d1 = x[l + 1] - w[l + 1];
                const double d2 = x[l + 2] - w[l + 2], d3 = x[l + 3] - w[l + 3];
                a0 += d0 * d0;
                a1 += d1 * d1;
                a2 += d2 * d2;
                a3 += d3 * d3;
            }
            for (; l < k; ++l) {
                const double d = x[l] - w[l];
                a0 += d * d;
            }
            return std::sqrt((a0 + a1) + (a2 + a3));
        }
        case Metric::Manhattan: {
            double s = 0;
            for (std::size_t l = 0; l < k; ++l) s += std::abs(x[l] - w[l]);
            return s;
        }
        case Metric::Chebyshev: {
            double m = 0;
            for (std::size_t l = 0; l < k; ++l) m = std::max(m, std::abs(x[l] - w[l]));
            return m;
        }
        case Metric::Cosine:
        default:
            break;
    }
    double dot = 0, nx = 0, nw = 0;
    for (std::size_t l = 0; l < k; ++l) {
        dot += x[l] * w[l];
        nx += x[l] * x[l];
        nw += w[l] * w[l];
    }
    return cosine_from_parts(dot, nx, nw);
}

}  // namespace detail

/// Scheduler state: current value at iteration t of T, with inverse-decay rate gamma.
struct ScheduleState {
    double value = 0.0;
    int t = 0;
    int T = 1;
    double gamma = 1.0;
};

/// One learning-rate step value(t) -> value(t+1).
double lr_step(Schedule kind, const ScheduleState& s);
/// One neighborhood-width step sigma(t) -> sigma(t+1).
double sigma_step(Schedule kind, const ScheduleState& s);
/// General asymptotic decay theta(t) -> theta(t+1).
double asymptotic_step(const ScheduleState& s);

/// Default inverse-decay rate for T iterations: T / 100.
inline double default_gamma(int T) { return T / 100.0; }

enum class ScheduleTarget { LearningRate, Sigma };

/// Replays a scheduler from (v0, t = 0); returns values for t = 0..T (T + 1 entries).
std::vector<double> replay_schedule(ScheduleTarget target, Schedule kind, double v0, int T,
                                    double gamma);

}  // namespace somkit
