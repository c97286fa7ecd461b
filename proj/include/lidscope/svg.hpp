#pragma once

// Fixed-style SVG charts. Output depends only on the data, never on time or
// environment, so charts diff cleanly between runs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace lidscope::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct Box {
    std::string label;
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

namespace detail {

inline constexpr double kWidth = 640, kHeight = 400;
inline constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
inline constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

inline std::string num(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << v;
    return s.str();
}

inline std::string tick(double v) {
    std::ostringstream s;
    s << std::setprecision(4) << v;
    return s.str();
}

inline std::string escape(const std::string& in) {
    std::string out;
    for (char c : in) {
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

struct Range {
    double lo = 0, hi = 1;
    void pad() {
        if (hi == lo) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
    double map(double v, double a, double b) const { return a + (v - lo) / (hi - lo) * (b - a); }
};

inline void frame(std::ostringstream& o, const std::string& title, const std::string& xlabel,
                  const std::string& ylabel, const Range& yr) {
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
      << "</text>\n";
    const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
    o << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x1) << "\" y2=\"" << num(y0)
      << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x0) << "\" y2=\"" << num(y1)
      << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = yr.lo + (yr.hi - yr.lo) * i / 4.0;
        const double y = yr.map(v, y0, y1);
        o << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << tick(v)
          << "</text>\n";
        o << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x1) << "\" y2=\"" << num(y)
          << "\" stroke=\"#dddddd\"/>\n";
    }
    o << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(kHeight - 12) << "\" text-anchor=\"middle\">"
      << escape(xlabel) << "</text>\n";
    o << "<text x=\"16\" y=\"" << num((y0 + y1) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << num((y0 + y1) / 2) << ")\">" << escape(ylabel) << "</text>\n";
}

}  // namespace detail

inline std::string line_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                              const std::vector<Series>& series) {
    using namespace detail;
    Range xr{INFINITY, -INFINITY}, yr{INFINITY, -INFINITY};
    for (const auto& s : series) {
        for (double v : s.x) xr = {std::min(xr.lo, v), std::max(xr.hi, v)};
        for (double v : s.y) yr = {std::min(yr.lo, v), std::max(yr.hi, v)};
    }
    if (!std::isfinite(xr.lo)) xr = {0, 1};
    if (!std::isfinite(yr.lo)) yr = {0, 1};
    xr.pad();
    yr.pad();
    std::ostringstream o;
    frame(o, title, xlabel, ylabel, yr);
    const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
    for (int i = 0; i <= 4; ++i) {
        const double v = xr.lo + (xr.hi - xr.lo) * i / 4.0;
        o << "<text x=\"" << num(xr.map(v, x0, x1)) << "\" y=\"" << num(y0 + 16) << "\" text-anchor=\"middle\">"
          << tick(v) << "</text>\n";
    }
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kPalette[k % std::size(kPalette)];
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
            o << (i ? " " : "") << num(xr.map(s.x[i], x0, x1)) << ',' << num(yr.map(s.y[i], y0, y1));
        o << "\"/>\n";
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
            o << "<circle cx=\"" << num(xr.map(s.x[i], x0, x1)) << "\" cy=\"" << num(yr.map(s.y[i], y0, y1))
              << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
        o << "<text x=\"" << num(x1 - 4) << "\" y=\"" << num(y1 + 14 * (k + 1)) << "\" text-anchor=\"end\" fill=\""
          << color << "\">" << escape(s.label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

inline std::string box_chart(const std::string& title, const std::string& ylabel, const std::vector<Box>& boxes) {
    using namespace detail;
    Range yr{INFINITY, -INFINITY};
    for (const auto& b : boxes) yr = {std::min(yr.lo, b.min), std::max(yr.hi, b.max)};
    if (!std::isfinite(yr.lo)) yr = {0, 1};
    yr.pad();
    std::ostringstream o;
    frame(o, title, "", ylabel, yr);
    const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
    const double slot = boxes.empty() ? 0 : (x1 - x0) / static_cast<double>(boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const auto& b = boxes[i];
        const double cx = x0 + slot * (static_cast<double>(i) + 0.5);
        const double w = std::min(40.0, slot * 0.6);
        const char* color = kPalette[0];
        o << "<line x1=\"" << num(cx) << "\" y1=\"" << num(yr.map(b.min, y0, y1)) << "\" x2=\"" << num(cx)
          << "\" y2=\"" << num(yr.map(b.max, y0, y1)) << "\" stroke=\"black\"/>\n";
        o << "<rect x=\"" << num(cx - w / 2) << "\" y=\"" << num(yr.map(b.q3, y0, y1)) << "\" width=\"" << num(w)
          << "\" height=\"" << num(yr.map(b.q1, y0, y1) - yr.map(b.q3, y0, y1)) << "\" fill=\"" << color
          << "\" fill-opacity=\"0.35\" stroke=\"" << color << "\"/>\n";
        o << "<line x1=\"" << num(cx - w / 2) << "\" y1=\"" << num(yr.map(b.median, y0, y1)) << "\" x2=\""
          << num(cx + w / 2) << "\" y2=\"" << num(yr.map(b.median, y0, y1)) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << num(cx) << "\" y=\"" << num(y0 + 16) << "\" text-anchor=\"middle\" font-size=\"9\">"
          << escape(b.label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace lidscope::svg
