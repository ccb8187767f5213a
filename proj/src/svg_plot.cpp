#include "groupinv/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "groupinv/errors.hpp"

namespace groupinv {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 420;
constexpr int kMarginLeft = 64;
constexpr int kMarginRight = 24;
constexpr int kMarginTop = 48;
constexpr int kMarginBottom = 56;

const char* kPalette[] = {"#1b6ca8", "#d1495b", "#3a7d44", "#8e5ba6", "#c97b1f", "#4a4a4a"};
constexpr size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

double max_l1_gap(const std::vector<PlotCurve>& curves) {
    double worst = 0.0;
    for (size_t a = 0; a < curves.size(); ++a) {
        for (size_t b = a + 1; b < curves.size(); ++b) {
            const KdeCurve& ca = curves[a].curve;
            const KdeCurve& cb = curves[b].curve;
            if (ca.grid.size() != cb.grid.size()) {
                throw ContractError("curves must share a grid to compare densities");
            }
            double gap = 0.0;
            for (size_t g = 0; g + 1 < ca.grid.size(); ++g) {
                const double step = ca.grid[g + 1] - ca.grid[g];
                const double d0 = std::fabs(ca.density[g] - cb.density[g]);
                const double d1 = std::fabs(ca.density[g + 1] - cb.density[g + 1]);
                gap += 0.5 * step * (d0 + d1);
            }
            worst = std::max(worst, gap);
        }
    }
    return worst;
}

std::string render_density_svg(const std::string& title, const std::string& x_label,
                               const std::vector<PlotCurve>& curves) {
    if (curves.empty()) throw ContractError("cannot render a plot with no curves");
    const size_t grid_n = curves[0].curve.grid.size();
    double x_lo = curves[0].curve.grid.front();
    double x_hi = curves[0].curve.grid.back();
    double y_hi = 0.0;
    for (const PlotCurve& c : curves) {
        if (c.curve.grid.size() != grid_n) {
            throw ContractError("all plotted curves must share a grid");
        }
        for (double d : c.curve.density) y_hi = std::max(y_hi, d);
    }
    if (y_hi <= 0.0) throw ContractError("all curves are identically zero");
    y_hi *= 1.08;  // headroom above the tallest peak

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    const auto sx = [&](double x) {
        return kMarginLeft + (x - x_lo) / (x_hi - x_lo) * plot_w;
    };
    const auto sy = [&](double y) { return kMarginTop + plot_h - y / y_hi * plot_h; };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    svg << "  <rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" fill=\"#ffffff\"/>\n";
    svg << "  <text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << escape_xml(title) << "</text>\n";

    // Axes with five ticks per side.
    svg << "  <line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop + plot_h << "\" x2=\""
        << kMarginLeft + plot_w << "\" y2=\"" << kMarginTop + plot_h
        << "\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
    svg << "  <line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\"" << kMarginLeft
        << "\" y2=\"" << kMarginTop + plot_h << "\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double frac = static_cast<double>(t) / 4.0;
        const double xv = x_lo + frac * (x_hi - x_lo);
        const double yv = frac * y_hi;
        const double px = sx(xv);
        const double py = sy(yv);
        svg << "  <line x1=\"" << fmt(px) << "\" y1=\"" << kMarginTop + plot_h << "\" x2=\""
            << fmt(px) << "\" y2=\"" << kMarginTop + plot_h + 5
            << "\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
        svg << "  <text x=\"" << fmt(px) << "\" y=\"" << kMarginTop + plot_h + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt(xv) << "</text>\n";
        svg << "  <line x1=\"" << kMarginLeft - 5 << "\" y1=\"" << fmt(py) << "\" x2=\""
            << kMarginLeft << "\" y2=\"" << fmt(py)
            << "\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
        svg << "  <text x=\"" << kMarginLeft - 9 << "\" y=\"" << fmt(py + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(yv)
            << "</text>\n";
    }
    svg << "  <text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << kHeight - 14
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << escape_xml(x_label) << "</text>\n";
    svg << "  <text x=\"18\" y=\"" << kMarginTop + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << kMarginTop + plot_h / 2 << ")\">density</text>\n";

    for (size_t c = 0; c < curves.size(); ++c) {
        const KdeCurve& kc = curves[c].curve;
        std::ostringstream d;
        for (size_t g = 0; g < kc.grid.size(); ++g) {
            d << (g == 0 ? "M" : " L") << fmt(sx(kc.grid[g])) << " " << fmt(sy(kc.density[g]));
        }
        svg << "  <path d=\"" << d.str() << "\" fill=\"none\" stroke=\""
            << kPalette[c % kPaletteSize] << "\" stroke-width=\"1.8\"/>\n";
    }

    // Legend: swatch plus label with per-curve sample count.
    const double legend_x = kMarginLeft + 12;
    double legend_y = kMarginTop + 10;
    for (size_t c = 0; c < curves.size(); ++c) {
        svg << "  <rect x=\"" << fmt(legend_x) << "\" y=\"" << fmt(legend_y - 9)
            << "\" width=\"14\" height=\"4\" fill=\"" << kPalette[c % kPaletteSize] << "\"/>\n";
        svg << "  <text x=\"" << fmt(legend_x + 20) << "\" y=\"" << fmt(legend_y - 2)
            << "\" font-family=\"sans-serif\" font-size=\"12\">"
            << escape_xml(curves[c].label) << " (n=" << curves[c].samples << ")</text>\n";
        legend_y += 18;
    }

    svg << "</svg>\n";
    return svg.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ContractError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw ContractError("failed writing " + path);
}

}  // namespace groupinv
