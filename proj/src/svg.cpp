#include "pro_ood/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace pro_ood {

namespace {

// Blue (low) -> white -> red (high).
std::string heat_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    int r, g, b;
    if (t < 0.5) {
        const double u = t / 0.5;
        r = static_cast<int>(40 + 215 * u);
        g = static_cast<int>(80 + 175 * u);
        b = 255;
    } else {
        const double u = (t - 0.5) / 0.5;
        r = 255;
        g = static_cast<int>(255 - 175 * u);
        b = static_cast<int>(255 - 215 * u);
    }
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

}  // namespace

std::string landscape_svg(const LandscapeGrid& grid) {
    const std::size_t n = grid.alpha_values.size();
    const double cell = 12.0;
    const double size = cell * static_cast<double>(n);

    double lo = grid.z[0][0], hi = grid.z[0][0];
    for (const auto& row : grid.z)
        for (double v : row) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    const double span = hi > lo ? hi - lo : 1.0;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
        << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n";
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out << "<rect x=\"" << cell * static_cast<double>(j) << "\" y=\""
                << cell * static_cast<double>(n - 1 - i) << "\" width=\"" << cell
                << "\" height=\"" << cell << "\" fill=\""
                << heat_color((grid.z[i][j] - lo) / span) << "\"/>\n";
        }
    }
    // Mark the unperturbed input at the center.
    const double cx = cell * (static_cast<double>(n / 2) + 0.5);
    out << "<text x=\"" << cx << "\" y=\"" << cx + 4.0
        << "\" text-anchor=\"middle\" font-size=\"12\" fill=\"black\">x</text>\n";
    out << "</svg>\n";
    return out.str();
}

std::string histogram_svg(const Histogram& hist) {
    const std::size_t bins = hist.edges.size() - 1;
    const double w = 720.0, h = 360.0, bar = w / static_cast<double>(bins);
    std::size_t max_count = 1;
    for (const auto& counts : hist.counts)
        for (std::size_t c : counts) max_count = std::max(max_count, c);

    static const char* palette[] = {"#3366cc", "#dc3912", "#ff9900", "#109618", "#990099"};
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h + 24
        << "\" viewBox=\"0 0 " << w << ' ' << h + 24 << "\">\n";
    for (std::size_t s = 0; s < hist.counts.size(); ++s) {
        const char* color = palette[s % 5];
        for (std::size_t b = 0; b < bins; ++b) {
            const double bh = h * static_cast<double>(hist.counts[s][b]) /
                              static_cast<double>(max_count);
            if (bh <= 0.0) continue;
            out << "<rect x=\"" << bar * static_cast<double>(b) << "\" y=\"" << h - bh
                << "\" width=\"" << bar << "\" height=\"" << bh << "\" fill=\"" << color
                << "\" fill-opacity=\"0.45\"/>\n";
        }
        out << "<text x=\"8\" y=\"" << 16 * (s + 1) << "\" font-size=\"12\" fill=\"" << color
            << "\">" << hist.set_names[s] << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace pro_ood
