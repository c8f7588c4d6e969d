#pragma once
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "gsp/errors.hpp"
#include "gsp/matrix.hpp"

namespace gsp {

struct Series {
    std::string label;
    std::vector<double> xs;
    std::vector<double> ys;
};

namespace detail {

inline std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline std::string fmt_pos(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline const char* series_color(int i) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
    return palette[i % 8];
}

// Round-ish tick positions covering [lo, hi].
inline std::vector<double> ticks(double lo, double hi, int want = 5) {
    if (!(hi > lo)) return {lo};
    double span = hi - lo;
    double raw = span / want;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (mag * m >= raw) {
            step = mag * m;
            break;
        }
    }
    std::vector<double> out;
    double t = std::ceil(lo / step) * step;
    for (; t <= hi + step * 1e-9; t += step) out.push_back(t);
    return out;
}

}  // namespace detail

// Dependency-free line chart. When x_tick_labels is nonempty the x axis is
// categorical: points plot at their x values (usually 0..n-1) and the labels
// annotate integer positions.
inline std::string line_chart_svg(const std::string& title, const std::string& x_label,
                                  const std::string& y_label,
                                  const std::vector<Series>& series,
                                  const std::vector<std::string>& x_tick_labels = {},
                                  int width = 640, int height = 400) {
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const Series& s : series)
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            if (first) {
                xmin = xmax = s.xs[i];
                ymin = ymax = s.ys[i];
                first = false;
            }
            xmin = std::min(xmin, s.xs[i]);
            xmax = std::max(xmax, s.xs[i]);
            ymin = std::min(ymin, s.ys[i]);
            ymax = std::max(ymax, s.ys[i]);
        }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    const double L = 64, R = 16, T = 32, B = 48;
    double pw = width - L - R, ph = height - T - B;
    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return T + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" font-family=\"sans-serif\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + std::to_string(width / 2) +
           "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" + title + "</text>\n";

    out += "<line x1=\"" + detail::fmt_pos(L) + "\" y1=\"" + detail::fmt_pos(T) + "\" x2=\"" +
           detail::fmt_pos(L) + "\" y2=\"" + detail::fmt_pos(T + ph) +
           "\" stroke=\"black\"/>\n";
    out += "<line x1=\"" + detail::fmt_pos(L) + "\" y1=\"" + detail::fmt_pos(T + ph) +
           "\" x2=\"" + detail::fmt_pos(L + pw) + "\" y2=\"" + detail::fmt_pos(T + ph) +
           "\" stroke=\"black\"/>\n";

    for (double t : detail::ticks(ymin, ymax)) {
        double y = py(t);
        out += "<line x1=\"" + detail::fmt_pos(L - 4) + "\" y1=\"" + detail::fmt_pos(y) +
               "\" x2=\"" + detail::fmt_pos(L) + "\" y2=\"" + detail::fmt_pos(y) +
               "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + detail::fmt_pos(L - 7) + "\" y=\"" + detail::fmt_pos(y + 4) +
               "\" text-anchor=\"end\" font-size=\"10\">" + detail::fmt_num(t) + "</text>\n";
    }
    if (x_tick_labels.empty()) {
        for (double t : detail::ticks(xmin, xmax)) {
            double x = px(t);
            out += "<line x1=\"" + detail::fmt_pos(x) + "\" y1=\"" + detail::fmt_pos(T + ph) +
                   "\" x2=\"" + detail::fmt_pos(x) + "\" y2=\"" + detail::fmt_pos(T + ph + 4) +
                   "\" stroke=\"black\"/>\n";
            out += "<text x=\"" + detail::fmt_pos(x) + "\" y=\"" + detail::fmt_pos(T + ph + 16) +
                   "\" text-anchor=\"middle\" font-size=\"10\">" + detail::fmt_num(t) +
                   "</text>\n";
        }
    } else {
        for (std::size_t i = 0; i < x_tick_labels.size(); ++i) {
            double x = px(double(i));
            out += "<line x1=\"" + detail::fmt_pos(x) + "\" y1=\"" + detail::fmt_pos(T + ph) +
                   "\" x2=\"" + detail::fmt_pos(x) + "\" y2=\"" + detail::fmt_pos(T + ph + 4) +
                   "\" stroke=\"black\"/>\n";
            out += "<text x=\"" + detail::fmt_pos(x) + "\" y=\"" + detail::fmt_pos(T + ph + 16) +
                   "\" text-anchor=\"middle\" font-size=\"9\">" + x_tick_labels[i] +
                   "</text>\n";
        }
    }
    out += "<text x=\"" + std::to_string(width / 2) + "\" y=\"" +
           std::to_string(height - 8) + "\" text-anchor=\"middle\" font-size=\"11\">" +
           x_label + "</text>\n";
    out += "<text x=\"14\" y=\"" + std::to_string(height / 2) +
           "\" text-anchor=\"middle\" font-size=\"11\" transform=\"rotate(-90 14 " +
           std::to_string(height / 2) + ")\">" + y_label + "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const Series& s = series[si];
        if (s.xs.empty()) continue;
        std::string pts;
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            if (i) pts += ' ';
            pts += detail::fmt_pos(px(s.xs[i])) + "," + detail::fmt_pos(py(s.ys[i]));
        }
        out += "<polyline fill=\"none\" stroke=\"" + std::string(detail::series_color(int(si))) +
               "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        double ly = T + 14 + 14 * double(si);
        out += "<line x1=\"" + detail::fmt_pos(L + pw - 92) + "\" y1=\"" + detail::fmt_pos(ly) +
               "\" x2=\"" + detail::fmt_pos(L + pw - 72) + "\" y2=\"" + detail::fmt_pos(ly) +
               "\" stroke=\"" + detail::series_color(int(si)) + "\" stroke-width=\"1.5\"/>\n";
        out += "<text x=\"" + detail::fmt_pos(L + pw - 68) + "\" y=\"" +
               detail::fmt_pos(ly + 4) + "\" font-size=\"10\">" + s.label + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

// Magnitude heatmap of a matrix, white for exact zeros, darkening blue with
// |value|. Rows render top to bottom.
inline std::string heatmap_svg(const std::string& title, const DenseMatrix& m,
                               int cell = 12) {
    const int L = 40, T = 32, B = 16, R = 16;
    int width = L + m.cols * cell + R;
    int height = T + m.rows * cell + B;
    double vmax = max_abs(m);
    if (vmax == 0.0) vmax = 1.0;
    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" font-family=\"sans-serif\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + std::to_string(width / 2) +
           "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" + title + "</text>\n";
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) {
            double a = std::abs(m.at(i, j)) / vmax;
            int shade = int(std::lround(255.0 * (1.0 - a)));
            char color[8];
            std::snprintf(color, sizeof color, "#%02x%02xff", shade, shade);
            out += "<rect x=\"" + std::to_string(L + j * cell) + "\" y=\"" +
                   std::to_string(T + i * cell) + "\" width=\"" + std::to_string(cell) +
                   "\" height=\"" + std::to_string(cell) + "\" fill=\"" + color +
                   "\" stroke=\"#ddd\" stroke-width=\"0.5\"/>\n";
        }
    out += "</svg>\n";
    return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path + ": cannot open for writing");
    out << content;
}

}  // namespace gsp
