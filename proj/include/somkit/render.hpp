#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "somkit/analysis.hpp"
#include "somkit/clustering.hpp"

namespace somkit {

enum class Colormap { Sequential, Categorical };
std::string_view to_string(Colormap c);
Colormap parse_colormap(std::string_view s);

struct RenderStyle {
    double cell_size = 24.0;  // px; for hex grids, the centre spacing along a row
    Colormap colormap = Colormap::Sequential;
    bool show_colorbar = true;
    std::string title;
    std::string absent_cell_fill = "#d9d9d9";

    void validate() const;
};

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    std::string hex() const;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr int kCategoricalColors = 12;

/// Viridis-like ramp; t is clamped to [0, 1]. Luma is non-decreasing in t.
Rgb sequential_color(double t);
/// Cycles after kCategoricalColors; negative ids wrap too.
Rgb categorical_color(long id);
/// Rec. 601 luma of the gamma-encoded colour, in [0, 255].
double luma(Rgb c);

/// Heatmap with one element of class "cell" per neuron.
std::string render_map(const MapLayer& layer, const RenderStyle& style);

struct Series {
    std::string name;
    std::vector<double> x;  // empty: 0, 1, 2, ...
    std::vector<double> y;
};

struct CurvePanel {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
};

/// Panels side by side, each with axes, ticks and a legend. A one-point
/// series is drawn as a marker only.
std::string render_curve_panels(const std::vector<CurvePanel>& panels, const RenderStyle& style);
/// Single panel titled by style.title.
std::string render_curves(const std::vector<Series>& series, const RenderStyle& style,
                          const std::string& x_label = "epoch", const std::string& y_label = "");
/// QE and TE panels over epochs.
std::string render_learning_curves(const std::vector<double>& qe, const std::vector<double>& te,
                                   const RenderStyle& style);

/// One panel per quality metric; each panel has one element of class "bar"
/// per row, grouped by space and coloured by algorithm, drawn from a zero
/// baseline.
std::string render_bars(const std::vector<ComparisonRow>& rows, const RenderStyle& style);

std::string xml_escape(std::string_view s);

}  // namespace somkit
