#include "pprfraud/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace pprfraud {

namespace {

constexpr double kWidth = 520;
constexpr double kHeight = 420;
constexpr double kLeft = 60;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 50;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

std::string fixed(double v, int digits = 2) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

void header(std::ostringstream& out, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title)
        << "</text>\n";
}

}  // namespace

std::string render_curve_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                             std::span<const CurveSeries> series, bool diagonal) {
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + std::clamp(x, 0.0, 1.0) * plot_w; };
    auto py = [&](double y) { return kTop + (1.0 - std::clamp(y, 0.0, 1.0)) * plot_h; };

    std::ostringstream out;
    header(out, title);
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double t = i / 4.0;
        out << "<text x=\"" << fixed(px(t)) << "\" y=\"" << fixed(kTop + plot_h + 16)
            << "\" text-anchor=\"middle\">" << fixed(t) << "</text>\n";
        out << "<text x=\"" << fixed(kLeft - 6) << "\" y=\"" << fixed(py(t) + 4) << "\" text-anchor=\"end\">"
            << fixed(t) << "</text>\n";
    }
    out << "<text x=\"" << fixed(kLeft + plot_w / 2) << "\" y=\"" << fixed(kHeight - 12)
        << "\" text-anchor=\"middle\">" << xml_escape(x_label) << "</text>\n";
    out << "<text transform=\"translate(16," << fixed(kTop + plot_h / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
        << xml_escape(y_label) << "</text>\n";
    if (diagonal)
        out << "<line x1=\"" << fixed(px(0)) << "\" y1=\"" << fixed(py(0)) << "\" x2=\"" << fixed(px(1)) << "\" y2=\""
            << fixed(py(1)) << "\" stroke=\"#999\" stroke-dasharray=\"4 4\"/>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* colour = kPalette[s % std::size(kPalette)];
        out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        std::string last;
        for (const auto& [x, y] : series[s].points) {
            std::string pt = fixed(px(x)) + "," + fixed(py(y));
            // Collapse runs that land on the same pixel.
            if (pt == last) continue;
            out << pt << ' ';
            last = std::move(pt);
        }
        out << "\"/>\n";
        const double ly = kTop + 16 + 16.0 * static_cast<double>(s);
        out << "<line x1=\"" << fixed(kLeft + plot_w - 150) << "\" y1=\"" << fixed(ly - 4) << "\" x2=\""
            << fixed(kLeft + plot_w - 130) << "\" y2=\"" << fixed(ly - 4) << "\" stroke=\"" << colour
            << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << fixed(kLeft + plot_w - 124) << "\" y=\"" << fixed(ly) << "\">"
            << xml_escape(series[s].name) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string render_importance_svg(const std::string& title, std::span<const ImportanceEntry> entries) {
    std::ostringstream out;
    header(out, title);
    const double label_w = 190;
    const double bar_x = label_w + 10;
    const double bar_max = kWidth - bar_x - 70;
    const double row_h = std::min(40.0, (kHeight - kTop - 20) / std::max<double>(1.0, static_cast<double>(entries.size())));
    double top = 0.0;
    for (const auto& e : entries) top = std::max(top, e.importance);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const double y = kTop + static_cast<double>(i) * row_h;
        const double w = top > 0 ? entries[i].importance / top * bar_max : 0.0;
        out << "<text x=\"" << fixed(label_w) << "\" y=\"" << fixed(y + row_h * 0.6) << "\" text-anchor=\"end\">"
            << xml_escape(entries[i].feature) << "</text>\n"
            << "<rect x=\"" << fixed(bar_x) << "\" y=\"" << fixed(y + row_h * 0.15) << "\" width=\"" << fixed(w)
            << "\" height=\"" << fixed(row_h * 0.7) << "\" fill=\"" << kPalette[0] << "\"/>\n"
            << "<text x=\"" << fixed(bar_x + w + 6) << "\" y=\"" << fixed(y + row_h * 0.6) << "\">"
            << fixed(entries[i].importance, 3) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace pprfraud
