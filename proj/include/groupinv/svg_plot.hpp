#pragma once

#include <string>
#include <vector>

#include "groupinv/metrics.hpp"

namespace groupinv {

/// One labelled density curve; all curves in a plot share the same grid.
struct PlotCurve {
    std::string label;  // shown in the legend, sample count appended
    int samples = 0;
    KdeCurve curve;
};

/// Renders density curves as a standalone SVG document. Output is a pure
/// function of the inputs: no timestamps, fixed palette, fixed layout.
std::string render_density_svg(const std::string& title, const std::string& x_label,
                               const std::vector<PlotCurve>& curves);

/// Largest trapezoid L1 distance between any two curves (they must share a
/// grid); quantifies how far the densities are from coinciding.
double max_l1_gap(const std::vector<PlotCurve>& curves);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace groupinv
