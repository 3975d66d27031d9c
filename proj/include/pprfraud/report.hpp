#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pprfraud/model.hpp"

namespace pprfraud {

struct CurveSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

// Unit-square line chart. `diagonal` adds the y = x chance line.
std::string render_curve_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                             std::span<const CurveSeries> series, bool diagonal);

// Horizontal bar chart of absolute standardized coefficients.
std::string render_importance_svg(const std::string& title, std::span<const ImportanceEntry> entries);

}  // namespace pprfraud
