#include "somkit/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "somkit/error.hpp"

namespace somkit {

std::string_view to_string(Colormap c) {
    return c == Colormap::Sequential ? "sequential" : "categorical";
}

Colormap parse_colormap(std::string_view s) {
    if (s == "sequential" || s == "viridis") return Colormap::Sequential;
    if (s == "categorical") return Colormap::Categorical;
    throw ParameterError(fmt::format("unknown colormap '{}'", s));
}

void RenderStyle::validate() const {
    if (!(cell_size > 0.0) || !std::isfinite(cell_size)) throw ParameterError("cell size must be > 0");
}

std::string Rgb::hex() const { return fmt::format("#{:02x}{:02x}{:02x}", r, g, b); }

namespace {

constexpr std::array<Rgb, 9> kViridis{{{68, 1, 84},
                                       {71, 45, 123},
                                       {59, 82, 139},
                                       {44, 114, 142},
                                       {33, 145, 140},
                                       {40, 174, 128},
                                       {94, 201, 98},
                                       {173, 220, 48},
                                       {253, 231, 37}}};

constexpr std::array<Rgb, kCategoricalColors> kCategorical{{{0x1f, 0x77, 0xb4},
                                                            {0xff, 0x7f, 0x0e},
                                                            {0x2c, 0xa0, 0x2c},
                                                            {0xd6, 0x27, 0x28},
                                                            {0x94, 0x67, 0xbd},
                                                            {0x8c, 0x56, 0x4b},
                                                            {0xe3, 0x77, 0xc2},
                                                            {0x7f, 0x7f, 0x7f},
                                                            {0xbc, 0xbd, 0x22},
                                                            {0x17, 0xbe, 0xcf},
                                                            {0xae, 0xc7, 0xe8},
                                                            {0xff, 0xbb, 0x78}}};

constexpr double kMargin = 10.0;
constexpr double kTitleHeight = 24.0;
constexpr double kSqrt3 = 1.7320508075688772;

std::string num(double v) {
    std::string s = fmt::format("{:.2f}", v);
    if (s == "-0.00") s = "0.00";
    return s;
}

std::string label_num(double v) {
    std::string s = fmt::format("{:.4g}", v);
    if (s == "-0") s = "0";
    return s;
}

std::string open_svg(double w, double h) {
    return fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" "
        "viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"11\">\n"
        "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n",
        num(w), num(h), num(w), num(h), num(w), num(h));
}

std::string text(double x, double y, std::string_view s, std::string_view anchor = "start",
                 std::string_view extra = "") {
    return fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"{}\"{}>{}</text>\n", num(x), num(y), anchor,
                       extra, xml_escape(s));
}

}  // namespace

Rgb sequential_color(double t) {
    if (!(t > 0.0)) t = 0.0;  // also maps NaN to the low end
    if (t > 1.0) t = 1.0;
    const double pos = t * static_cast<double>(kViridis.size() - 1);
    const std::size_t i = std::min(static_cast<std::size_t>(pos), kViridis.size() - 2);
    const double f = pos - static_cast<double>(i);
    auto mix = [f](std::uint8_t a, std::uint8_t b) {
        return static_cast<std::uint8_t>(std::lround(a + (static_cast<double>(b) - a) * f));
    };
    const Rgb& a = kViridis[i];
    const Rgb& b = kViridis[i + 1];
    return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

Rgb categorical_color(long id) {
    const long n = kCategoricalColors;
    return kCategorical[static_cast<std::size_t>(((id % n) + n) % n)];
}

double luma(Rgb c) { return 0.299 * c.r + 0.587 * c.g + 0.114 * c.b; }

std::string xml_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string render_map(const MapLayer& layer, const RenderStyle& style) {
    style.validate();
    const GridTopology& topo = layer.topo;
    const bool hex = topo.kind() == Topology::Hexagonal;
    const double s = style.cell_size;
    const double radius = s / kSqrt3;  // pointy-top hexagon circumradius
    const double top = kMargin + (style.title.empty() ? 0.0 : kTitleHeight);

    double map_w = s * topo.cols();
    double map_h = s * topo.rows();
    if (hex) {
        map_w = s * (topo.cols() + (topo.rows() > 1 ? 0.5 : 0.0));
        map_h = 2.0 * radius + (topo.rows() - 1) * s * kSqrt3 / 2.0;
    }

    bool any = false;
    double lo = 0.0, hi = 0.0;
    std::set<long> categories;
    for (const auto& v : layer.values) {
        if (!v) continue;
        lo = any ? std::min(lo, *v) : *v;
        hi = any ? std::max(hi, *v) : *v;
        any = true;
        if (style.colormap == Colormap::Categorical) categories.insert(std::lround(*v));
    }

    const bool categorical = style.colormap == Colormap::Categorical;
    const double legend_w = style.show_colorbar || !any ? 90.0 : 0.0;
    double legend_h = 0.0;
    if (legend_w > 0.0) {
        legend_h = !any ? 20.0 : categorical ? 16.0 * (static_cast<double>(categories.size()) + 1) : 120.0;
    }
    const double width = kMargin * 2 + map_w + legend_w;
    const double height = top + std::max(map_h, legend_h) + kMargin;

    std::string out = open_svg(width, height);
    if (!style.title.empty()) out += text(width / 2, kMargin + 14, style.title, "middle", " font-size=\"14\"");

    auto fill_of = [&](const std::optional<double>& v) -> std::string {
        if (!v) return style.absent_cell_fill;
        if (categorical) return categorical_color(std::lround(*v)).hex();
        return sequential_color(hi > lo ? (*v - lo) / (hi - lo) : 0.5).hex();
    };

    out += "<g class=\"map\">\n";
    for (std::size_t j = 0; j < topo.size(); ++j) {
        const NeuronCoord c = topo.coord(j);
        const auto& v = layer.values[j];
        const std::string tip = fmt::format("({}, {}): {}", c.row, c.col, v ? label_num(*v) : "n/a");
        const std::string fill = xml_escape(fill_of(v));
        if (hex) {
            const double cx = kMargin + s / 2 + s * (c.col + 0.5 * (c.row % 2));
            const double cy = top + radius + c.row * s * kSqrt3 / 2.0;
            std::string pts;
            for (int k = 0; k < 6; ++k) {
                const double a = (-90.0 + 60.0 * k) * std::acos(-1.0) / 180.0;
                if (k > 0) pts += ' ';
                pts += num(cx + radius * std::cos(a)) + ',' + num(cy + radius * std::sin(a));
            }
            out += fmt::format("<polygon class=\"cell\" points=\"{}\" fill=\"{}\" stroke=\"#ffffff\" "
                               "stroke-width=\"0.5\"><title>{}</title></polygon>\n",
                               pts, fill, xml_escape(tip));
        } else {
            out += fmt::format("<rect class=\"cell\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" "
                               "stroke=\"#ffffff\" stroke-width=\"0.5\"><title>{}</title></rect>\n",
                               num(kMargin + c.col * s), num(top + c.row * s), num(s), num(s), fill,
                               xml_escape(tip));
        }
    }
    out += "</g>\n";

    if (legend_w > 0.0) {
        const double lx = kMargin * 2 + map_w;
        out += "<g class=\"legend\">\n";
        if (!any) {
            out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n", num(lx),
                               num(top), xml_escape(style.absent_cell_fill));
            out += text(lx + 16, top + 10, "no data");
        } else if (categorical) {
            double y = top;
            std::size_t shown = 0;
            for (long id : categories) {
                if (shown++ == static_cast<std::size_t>(kCategoricalColors)) break;
                out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n", num(lx),
                                   num(y), categorical_color(id).hex());
                out += text(lx + 16, y + 10, std::to_string(id));
                y += 16.0;
            }
            if (categories.size() > static_cast<std::size_t>(kCategoricalColors)) {
                out += text(lx, y + 10, fmt::format("{} classes, colours repeat", categories.size()));
            }
        } else {
            constexpr double bar_h = 100.0;
            out += "<defs><linearGradient id=\"ramp\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">\n";
            for (std::size_t k = 0; k < kViridis.size(); ++k) {
                out += fmt::format("<stop offset=\"{}\" stop-color=\"{}\"/>\n",
                                   num(static_cast<double>(k) / (kViridis.size() - 1)), kViridis[k].hex());
            }
            out += "</linearGradient></defs>\n";
            out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"14\" height=\"{}\" fill=\"url(#ramp)\"/>\n",
                               num(lx), num(top), num(bar_h));
            out += text(lx + 18, top + 10, label_num(hi));
            out += text(lx + 18, top + bar_h, label_num(lo));
        }
        out += "</g>\n";
    }
    out += "</svg>\n";
    return out;
}

namespace {

constexpr double kPanelW = 420.0;
constexpr double kPanelH = 280.0;
constexpr double kPadL = 60.0, kPadR = 110.0, kPadT = 30.0, kPadB = 44.0;

struct Range {
    double lo, hi;
};

// Pads so no data point lands on the frame; a flat range gets unit padding.
Range padded(double lo, double hi) {
    if (hi > lo) {
        const double p = 0.05 * (hi - lo);
        return {lo - p, hi + p};
    }
    const double p = lo != 0.0 ? 0.5 * std::abs(lo) : 1.0;
    return {lo - p, hi + p};
}

std::string axes(double ox, double oy, Range xr, Range yr, const std::string& x_label,
                 const std::string& y_label, bool integer_x) {
    const double pw = kPanelW - kPadL - kPadR, ph = kPanelH - kPadT - kPadB;
    const double x0 = ox + kPadL, y0 = oy + kPadT;
    std::string out = fmt::format(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444444\"/>\n", num(x0),
        num(y0), num(pw), num(ph));
    constexpr int ticks = 5;
    for (int i = 0; i < ticks; ++i) {
        const double f = static_cast<double>(i) / (ticks - 1);
        const double yv = yr.lo + f * (yr.hi - yr.lo);
        const double yy = y0 + ph - f * ph;
        out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#444444\"/>\n", num(x0 - 4),
                           num(yy), num(x0), num(yy));
        out += text(x0 - 6, yy + 4, label_num(yv), "end");
        const double xv = xr.lo + f * (xr.hi - xr.lo);
        const double xx = x0 + f * pw;
        out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#444444\"/>\n", num(xx),
                           num(y0 + ph), num(xx), num(y0 + ph + 4));
        out += text(xx, y0 + ph + 16, integer_x ? label_num(std::round(xv * 100) / 100) : label_num(xv),
                    "middle");
    }
    if (!x_label.empty()) out += text(x0 + pw / 2, y0 + ph + 34, x_label, "middle");
    if (!y_label.empty()) {
        out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 {} {})\">{}</text>\n",
                           num(ox + 14), num(y0 + ph / 2), num(ox + 14), num(y0 + ph / 2),
                           xml_escape(y_label));
    }
    return out;
}

std::string curve_panel(const CurvePanel& panel, double ox, double oy) {
    bool any = false;
    double xlo = 0, xhi = 0, ylo = 0, yhi = 0;
    for (const Series& s : panel.series) {
        if (!s.x.empty() && s.x.size() != s.y.size()) {
            throw ShapeError(fmt::format("series '{}' has {} x values and {} y values", s.name, s.x.size(),
                                         s.y.size()));
        }
        for (std::size_t i = 0; i < s.y.size(); ++i) {
            const double x = s.x.empty() ? static_cast<double>(i) : s.x[i];
            const double y = s.y[i];
            if (!std::isfinite(x) || !std::isfinite(y)) {
                throw ParameterError(fmt::format("series '{}' has a non-finite point", s.name));
            }
            xlo = any ? std::min(xlo, x) : x;
            xhi = any ? std::max(xhi, x) : x;
            ylo = any ? std::min(ylo, y) : y;
            yhi = any ? std::max(yhi, y) : y;
            any = true;
        }
    }
    const Range xr = xhi > xlo ? Range{xlo, xhi} : padded(xlo, xhi);
    const Range yr = padded(ylo, yhi);
    const double pw = kPanelW - kPadL - kPadR, ph = kPanelH - kPadT - kPadB;
    const double x0 = ox + kPadL, y0 = oy + kPadT;
    auto px = [&](double x) { return x0 + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double y) { return y0 + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

    std::string out = "<g class=\"panel\">\n";
    if (!panel.title.empty()) out += text(x0 + pw / 2, oy + 18, panel.title, "middle", " font-size=\"13\"");
    out += axes(ox, oy, xr, yr, panel.x_label, panel.y_label, true);
    for (std::size_t k = 0; k < panel.series.size(); ++k) {
        const Series& s = panel.series[k];
        const std::string color = categorical_color(static_cast<long>(k)).hex();
        if (s.y.size() == 1) {
            const double x = s.x.empty() ? 0.0 : s.x[0];
            out += fmt::format("<circle class=\"marker\" cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\"/>\n",
                               num(px(x)), num(py(s.y[0])), color);
        } else if (s.y.size() > 1) {
            std::string pts;
            for (std::size_t i = 0; i < s.y.size(); ++i) {
                if (i > 0) pts += ' ';
                pts += num(px(s.x.empty() ? static_cast<double>(i) : s.x[i])) + ',' + num(py(s.y[i]));
            }
            out += fmt::format("<polyline class=\"series\" points=\"{}\" fill=\"none\" stroke=\"{}\" "
                               "stroke-width=\"1.5\"/>\n",
                               pts, color);
        }
        const double ly = y0 + 8 + 16.0 * static_cast<double>(k);
        out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                           num(x0 + pw + 10), num(ly), num(x0 + pw + 28), num(ly), color);
        out += text(x0 + pw + 32, ly + 4, s.name);
    }
    out += "</g>\n";
    return out;
}

}  // namespace

std::string render_curve_panels(const std::vector<CurvePanel>& panels, const RenderStyle& style) {
    style.validate();
    if (panels.empty()) throw ParameterError("nothing to plot");
    const double top = style.title.empty() ? 0.0 : kTitleHeight;
    const double width = kPanelW * static_cast<double>(panels.size());
    const double height = top + kPanelH;
    std::string out = open_svg(width, height);
    if (!style.title.empty()) out += text(width / 2, 18, style.title, "middle", " font-size=\"14\"");
    for (std::size_t p = 0; p < panels.size(); ++p) out += curve_panel(panels[p], kPanelW * p, top);
    out += "</svg>\n";
    return out;
}

std::string render_curves(const std::vector<Series>& series, const RenderStyle& style,
                          const std::string& x_label, const std::string& y_label) {
    return render_curve_panels({CurvePanel{"", x_label, y_label, series}}, style);
}

std::string render_learning_curves(const std::vector<double>& qe, const std::vector<double>& te,
                                   const RenderStyle& style) {
    std::vector<double> epochs(qe.size());
    for (std::size_t i = 0; i < epochs.size(); ++i) epochs[i] = static_cast<double>(i + 1);
    std::vector<double> te_epochs(te.size());
    for (std::size_t i = 0; i < te_epochs.size(); ++i) te_epochs[i] = static_cast<double>(i + 1);
    return render_curve_panels({CurvePanel{"quantization error", "epoch", "QE", {{"QE", epochs, qe}}},
                                CurvePanel{"topographic error", "epoch", "TE", {{"TE", te_epochs, te}}}},
                               style);
}

std::string render_bars(const std::vector<ComparisonRow>& rows, const RenderStyle& style) {
    style.validate();
    if (rows.empty()) throw ParameterError("no comparison rows to plot");

    std::vector<std::string> algorithms;
    for (const ComparisonRow& r : rows) {
        if (std::find(algorithms.begin(), algorithms.end(), r.algorithm) == algorithms.end()) {
            algorithms.push_back(r.algorithm);
        }
    }
    struct Metric {
        const char* name;
        double QualityMetrics::*field;
    };
    const Metric metrics[] = {{"silhouette", &QualityMetrics::silhouette},
                              {"davies_bouldin", &QualityMetrics::davies_bouldin},
                              {"calinski_harabasz", &QualityMetrics::calinski_harabasz}};

    const double top = style.title.empty() ? 0.0 : kTitleHeight;
    const double width = kPanelW * 3;
    std::string out = open_svg(width, top + kPanelH);
    if (!style.title.empty()) out += text(width / 2, 18, style.title, "middle", " font-size=\"14\"");

    const double pw = kPanelW - kPadL - kPadR, ph = kPanelH - kPadT - kPadB;
    for (std::size_t p = 0; p < 3; ++p) {
        const double ox = kPanelW * p, x0 = ox + kPadL, y0 = top + kPadT;
        double lo = 0.0, hi = 0.0;
        for (const ComparisonRow& r : rows) {
            const double v = r.metrics.*metrics[p].field;
            if (!std::isfinite(v)) throw ParameterError(fmt::format("non-finite {}", metrics[p].name));
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const Range yr = padded(lo, hi);
        auto py = [&](double y) { return y0 + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

        out += "<g class=\"panel\">\n";
        out += text(x0 + pw / 2, top + 18, metrics[p].name, "middle", " font-size=\"13\"");
        out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444444\"/>\n",
                           num(x0), num(y0), num(pw), num(ph));
        for (int i = 0; i < 5; ++i) {
            const double yv = yr.lo + (yr.hi - yr.lo) * i / 4.0;
            out += text(x0 - 6, py(yv) + 4, label_num(yv), "end");
        }
        const double slot = pw / static_cast<double>(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const ComparisonRow& r = rows[i];
            const double v = r.metrics.*metrics[p].field;
            const auto alg = std::find(algorithms.begin(), algorithms.end(), r.algorithm) - algorithms.begin();
            const double y_top = std::min(py(v), py(0.0));
            const double h = std::abs(py(v) - py(0.0));
            out += fmt::format(
                "<rect class=\"bar\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"><title>{} {}: {}</title></rect>\n",
                num(x0 + slot * i + slot * 0.1), num(y_top), num(slot * 0.8), num(h),
                categorical_color(static_cast<long>(alg)).hex(), xml_escape(to_string(r.space.kind)),
                xml_escape(r.algorithm), label_num(v));
            const bool group_start = i == 0 || rows[i - 1].space.kind != r.space.kind;
            if (group_start) out += text(x0 + slot * i + 2, y0 + ph + 16, to_string(r.space.kind));
        }
        out += fmt::format("<line class=\"baseline\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#000000\"/>\n",
                           num(x0), num(py(0.0)), num(x0 + pw), num(py(0.0)));
        for (std::size_t a = 0; a < algorithms.size(); ++a) {
            const double ly = y0 + 8 + 16.0 * a;
            out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n",
                               num(x0 + pw + 10), num(ly - 6), categorical_color(static_cast<long>(a)).hex());
            out += text(x0 + pw + 26, ly + 4, algorithms[a]);
        }
        out += "</g>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace somkit
