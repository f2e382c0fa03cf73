#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "volterra/grid.hpp"

namespace volterra::report {

/// Shortest round-trip decimal form; locale independent.
inline std::string fmt(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::ofstream open(const std::filesystem::path& path)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    return out;
}

struct Column {
    std::string name;
    std::span<const double> values;
};

/// Rows i = 0..rows-1 of equally long columns; missing entries are written empty.
inline void write_csv(const std::filesystem::path& path, const std::vector<Column>& columns)
{
    auto out = open(path);
    std::size_t rows = 0;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        out << (c ? "," : "") << columns[c].name;
        rows = std::max(rows, columns[c].values.size());
    }
    out << '\n';
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c)
                out << ',';
            if (i < columns[c].values.size())
                out << fmt(columns[c].values[i]);
        }
        out << '\n';
    }
    if (!out)
        throw IoError("write failed for '" + path.string() + "'");
}

inline std::vector<double> times(const Grid& g)
{
    std::vector<double> t(g.n_points());
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = g.time(i);
    return t;
}

struct Series {
    std::string label;
    std::span<const double> x;
    std::span<const double> y;
};

/// Line chart of several series; at most `max_points` vertices per series
/// (every k-th sample).
inline void write_svg(const std::filesystem::path& path, const std::string& title, const std::vector<Series>& series,
                      std::size_t max_points = 2000)
{
    constexpr double W = 800, H = 480, L = 70, R = 160, Tm = 40, B = 50;
    double x0 = HUGE_VAL, x1 = -HUGE_VAL, y0 = HUGE_VAL, y1 = -HUGE_VAL;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i]))
                continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (!(x1 > x0)) {
        x0 = 0;
        x1 = 1;
    }
    if (!(y1 > y0)) {
        y0 -= 1;
        y1 += 1;
    }
    const auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    const auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - Tm - B); };
    static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

    auto out = open(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << L << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";
    out << "<rect x=\"" << L << "\" y=\"" << Tm << "\" width=\"" << W - L - R << "\" height=\"" << H - Tm - B
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = x0 + (x1 - x0) * k / 4.0;
        const double yv = y0 + (y1 - y0) * k / 4.0;
        out << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 18 << "\" font-family=\"sans-serif\" font-size=\"11\" "
            << "text-anchor=\"middle\">" << fmt(std::round(xv * 1000) / 1000) << "</text>\n";
        out << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" font-family=\"sans-serif\" font-size=\"11\" "
            << "text-anchor=\"end\">" << fmt(std::round(yv * 1e4) / 1e4) << "</text>\n";
    }
    if (y0 < 0 && y1 > 0)
        out << "<line x1=\"" << L << "\" x2=\"" << W - R << "\" y1=\"" << py(0) << "\" y2=\"" << py(0)
            << "\" stroke=\"#bbb\"/>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* colour = colours[k % 6];
        const std::size_t stride = std::max<std::size_t>(1, s.x.size() / max_points);
        out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); i += stride)
            if (std::isfinite(s.y[i]))
                out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        out << "\"/>\n";
        out << "<text x=\"" << W - R + 10 << "\" y=\"" << Tm + 16 + 18 * k << "\" font-family=\"sans-serif\" "
            << "font-size=\"12\" fill=\"" << colour << "\">" << s.label << "</text>\n";
    }
    out << "</svg>\n";
    if (!out)
        throw IoError("write failed for '" + path.string() + "'");
}

} // namespace volterra::report
