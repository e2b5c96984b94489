#include "dproj/svg.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace dproj::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string header(double w, double h) {
    return fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
                       "viewBox=\"0 0 {:.0f} {:.0f}\" font-family=\"sans-serif\" font-size=\"12\">\n"
                       "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
                       w, h, w, h);
}

// Blue-white-red ramp over t in [0, 1].
std::string ramp_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    int r, g, b;
    if (t < 0.5) {
        const double u = t / 0.5;
        r = static_cast<int>(std::lround(40 + u * 215));
        g = static_cast<int>(std::lround(70 + u * 185));
        b = 255;
    } else {
        const double u = (t - 0.5) / 0.5;
        r = 255;
        g = static_cast<int>(std::lround(255 - u * 215));
        b = static_cast<int>(std::lround(255 - u * 215));
    }
    return fmt::format("#{:02x}{:02x}{:02x}", r, g, b);
}

} // namespace

std::string line_plot(const LinePlot& plot) {
    double x_min = 0.0, x_max = 0.0;
    bool first = true;
    for (const auto& s : plot.series)
        for (const auto& [x, y] : s.points) {
            x_min = first ? x : std::min(x_min, x);
            x_max = first ? x : std::max(x_max, x);
            first = false;
        }
    if (x_max <= x_min)
        x_max = x_min + 1.0;
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * pw; };
    auto sy = [&](double y) {
        const double yc = std::clamp(y, plot.y_min, plot.y_max);
        return kTop + (plot.y_max - yc) / (plot.y_max - plot.y_min) * ph;
    };

    std::string out = header(kWidth, kHeight);
    out += fmt::format("<text x=\"{:.1f}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                       kWidth / 2, escape(plot.title));
    out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" "
                       "stroke=\"black\"/>\n",
                       kLeft, kTop, pw, ph);
    for (int i = 0; i <= 4; ++i) {
        const double x = x_min + (x_max - x_min) * i / 4.0;
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.3g}</text>\n", sx(x),
                           kHeight - kBottom + 16, x);
        const double y = plot.y_min + (plot.y_max - plot.y_min) * i / 4.0;
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n", kLeft - 6,
                           sy(y) + 4, y);
    }
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", kLeft + pw / 2,
                       kHeight - 12, escape(plot.x_label));
    out += fmt::format("<text x=\"14\" y=\"{:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.1f})\">"
                       "{}</text>\n",
                       kTop + ph / 2, kTop + ph / 2, escape(plot.y_label));
    for (double r : plot.rules)
        out += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"gray\" "
                           "stroke-dasharray=\"4 3\"/>\n",
                           kLeft, sy(r), kLeft + pw, sy(r));
    std::size_t idx = 0;
    for (const auto& s : plot.series) {
        const char* color = kPalette[idx % std::size(kPalette)];
        std::string pts;
        for (const auto& [x, y] : s.points)
            pts += fmt::format("{:.2f},{:.2f} ", sx(x), sy(y));
        out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\" points=\"{}\"/>\n", color,
                           pts);
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" fill=\"{}\">{}</text>\n", kLeft + pw - 150,
                           kTop + 16 + 16.0 * static_cast<double>(idx), color, escape(s.label));
        ++idx;
    }
    out += "</svg>\n";
    return out;
}

std::string heatmap(const Heatmap& map) {
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    const double cw = pw / std::max(1, map.cols);
    const double ch = ph / std::max(1, map.rows);
    double lo = 0.0, hi = 1.0;
    if (!map.values.empty()) {
        const auto [mn, mx] = std::minmax_element(map.values.begin(), map.values.end());
        lo = *mn;
        hi = *mx > *mn ? *mx : *mn + 1.0;
    }
    std::string out = header(kWidth, kHeight);
    out += fmt::format("<text x=\"{:.1f}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                       kWidth / 2, escape(map.title));
    for (int r = 0; r < map.rows; ++r)
        for (int c = 0; c < map.cols; ++c) {
            const double v = map.values[static_cast<std::size_t>(r) * map.cols + c];
            out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
                               kLeft + c * cw, kTop + r * ch, cw + 0.05, ch + 0.05, ramp_color((v - lo) / (hi - lo)));
        }
    auto cx = [&](double c) { return kLeft + (c + 0.5) * cw; };
    auto cy = [&](double r) { return kTop + (r + 0.5) * ch; };
    if (!map.path.empty()) {
        std::string pts;
        for (const auto& [c, r] : map.path)
            pts += fmt::format("{:.2f},{:.2f} ", cx(c), cy(r));
        out += fmt::format("<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"{}\"/>\n", pts);
        out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"black\"/>\n", cx(map.path.back().first),
                           cy(map.path.back().second));
    }
    if (map.star)
        out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\" font-size=\"18\" "
                           "fill=\"gold\" stroke=\"black\">&#9733;</text>\n",
                           cx(map.star->first), cy(map.star->second) + 6);
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", kLeft + pw / 2,
                       kHeight - 12, escape(map.x_label));
    out += fmt::format("<text x=\"14\" y=\"{:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.1f})\">"
                       "{}</text>\n",
                       kTop + ph / 2, kTop + ph / 2, escape(map.y_label));
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">range [{:.4g}, {:.4g}]</text>\n",
                       kWidth - kRight, kHeight - 30, lo, hi);
    out += "</svg>\n";
    return out;
}

} // namespace dproj::svg
