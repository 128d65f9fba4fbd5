#include "somkit/kernels.hpp"

#include <algorithm>
#include <numbers>

#include <fmt/format.h>

#include "somkit/error.hpp"

namespace somkit {

std::string_view to_string(Kernel k) {
    switch (k) {
        case Kernel::Gaussian: return "gaussian";
        case Kernel::MexicanHat: return "mexican_hat";
        case Kernel::Bubble: return "bubble";
        case Kernel::Triangle: return "triangle";
    }
    return "?";
}

std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::Cosine: return "cosine";
        case Metric::Euclidean: return "euclidean";
        case Metric::Manhattan: return "manhattan";
        case Metric::Chebyshev: return "chebyshev";
    }
    return "?";
}

std::string_view to_string(Schedule s) { return s == Schedule::Inverse ? "inverse" : "linear"; }

Kernel parse_kernel(std::string_view s) {
    if (s == "gaussian") return Kernel::Gaussian;
    if (s == "mexican_hat" || s == "mexican") return Kernel::MexicanHat;
    if (s == "bubble") return Kernel::Bubble;
    if (s == "triangle") return Kernel::Triangle;
    throw ParameterError(fmt::format("unknown neighborhood kernel '{}'", s));
}

Metric parse_metric(std::string_view s) {
    if (s == "cosine") return Metric::Cosine;
    if (s == "euclidean") return Metric::Euclidean;
    if (s == "manhattan") return Metric::Manhattan;
    if (s == "chebyshev") return Metric::Chebyshev;
    throw ParameterError(fmt::format("unknown distance metric '{}'", s));
}

Schedule parse_schedule(std::string_view s) {
    if (s == "inverse") return Schedule::Inverse;
    if (s == "linear") return Schedule::Linear;
    throw ParameterError(fmt::format("unknown scheduler '{}'", s));
}

double kernel_value(Kernel kernel, double d, double sigma) {
    if (!(sigma > 0.0)) throw ParameterError(fmt::format("kernel width must be > 0, got {}", sigma));
    if (d < 0.0) throw ParameterError("kernel distance must be >= 0");
    switch (kernel) {
        case Kernel::Gaussian:
            return std::exp(-(d * d) / (2.0 * sigma * sigma));
        case Kernel::MexicanHat: {
            const double u = (d * d) / (2.0 * sigma * sigma);
            return (1.0 / (std::numbers::pi * sigma * sigma * sigma * sigma)) * (1.0 - u) *
                   std::exp(-u);
        }
        case Kernel::Bubble:
            return d <= sigma ? 1.0 : 0.0;
        case Kernel::Triangle:
            return std::max(0.0, 1.0 - d / sigma);
    }
    return 0.0;
}

namespace detail {

double cosine_from_parts(double dot, double nx2, double nw2) {
    if (nx2 == 0.0 || nw2 == 0.0) throw DomainError("cosine distance undefined for a zero vector");
    const double c = dot / (std::sqrt(nx2) * std::sqrt(nw2));
    return std::clamp(1.0 - c, 0.0, 2.0);
}

}  // namespace detail

double feature_distance(Metric metric, std::span<const double> x, std::span<const double> w) {
    if (x.size() != w.size()) {
        throw ShapeError(fmt::format("distance between vectors of length {} and {}", x.size(),
                                     w.size()));
    }
    if (x.empty()) throw ShapeError("distance between empty vectors");
    return detail::distance_unchecked(metric, x.data(), w.data(), x.size());
}

namespace {

void check_state(const ScheduleState& s) {
    if (s.T < 1) throw ParameterError("scheduler requires T >= 1");
    if (s.t < 0 || s.t > s.T) {
        throw ParameterError(fmt::format("scheduler iteration {} outside [0, {}]", s.t, s.T));
    }
}

}  // namespace

double lr_step(Schedule kind, const ScheduleState& s) {
    check_state(s);
    if (kind == Schedule::Inverse) {
        if (!(s.gamma > 0.0)) throw ParameterError("inverse decay requires gamma > 0");
        return s.value * (s.gamma / (s.gamma + s.t));
    }
    return s.value * (1.0 - static_cast<double>(s.t) / s.T);
}

double sigma_step(Schedule kind, const ScheduleState& s) {
    check_state(s);
    if (kind == Schedule::Inverse) {
        return s.value / (1.0 + s.t * (s.value - 1.0) / s.T);
    }
    return s.value + s.t * (1.0 - s.value) / s.T;
}

double asymptotic_step(const ScheduleState& s) {
    check_state(s);
    return s.value / (1.0 + s.t / (s.T / 2.0));
}

std::vector<double> replay_schedule(ScheduleTarget target, Schedule kind, double v0, int T,
                                    double gamma) {
    if (T < 1) throw ParameterError("scheduler requires T >= 1");
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(T) + 1);
    values.push_back(v0);
    for (int t = 0; t < T; ++t) {
        const ScheduleState s{values.back(), t, T, gamma};
        values.push_back(target == ScheduleTarget::LearningRate ? lr_step(kind, s)
                                                                : sigma_step(kind, s));
    }
    return values;
}

}  // namespace somkit
