#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace gearmr::cli {

namespace {

constexpr double kWidth = 900.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;
constexpr int kBuckets = 1600;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                               "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string escape(const std::string& s) {
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

double nice_step(double span) {
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double f : {1.0, 2.0, 5.0, 10.0})
        if (raw <= f * mag) return f * mag;
    return 10.0 * mag;
}

// Per-bucket min and max, in x order.
std::vector<std::pair<double, double>> reduce(const Series& s, double x0, double x1, bool log_y) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    auto value = [&](std::size_t i) { return log_y ? std::log10(std::max(s.y[i], 1e-300)) : s.y[i]; };
    std::vector<std::pair<double, double>> pts;
    if (n <= 2 * kBuckets) {
        for (std::size_t i = 0; i < n; ++i) pts.emplace_back(s.x[i], value(i));
        return pts;
    }
    std::size_t i = 0;
    for (int b = 0; b < kBuckets && i < n; ++b) {
        const double edge = x0 + (x1 - x0) * (b + 1) / kBuckets;
        std::size_t lo = i, hi = i;
        while (i < n && (s.x[i] <= edge || b == kBuckets - 1)) {
            if (value(i) < value(lo)) lo = i;
            if (value(i) > value(hi)) hi = i;
            ++i;
        }
        if (i == lo && lo == hi) continue;
        const auto [a, c] = std::minmax(lo, hi);
        pts.emplace_back(s.x[a], value(a));
        if (c != a) pts.emplace_back(s.x[c], value(c));
    }
    return pts;
}

}  // namespace

std::string render_svg(const Chart& chart) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
    double y0 = x0, y1 = -x0;
    for (const auto& s : chart.series) {
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            const double y = chart.log_y ? std::log10(std::max(s.y[i], 1e-300)) : s.y[i];
            if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    if (!(x1 >= x0)) x0 = 0.0, x1 = 1.0;
    if (!(y1 >= y0)) y0 = 0.0, y1 = 1.0;
    if (x1 == x0) x1 = x0 + 1.0;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * ph; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << escape(chart.title) << "</text>\n";

    const double xs = nice_step(x1 - x0);
    for (double t = std::ceil(x0 / xs) * xs; t <= x1 + 1e-9 * xs; t += xs) {
        out << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(px(t)) << "\" y2=\""
            << num(kTop + ph) << "\" stroke=\"#e0e0e0\"/>\n";
        out << "<text x=\"" << num(px(t)) << "\" y=\"" << num(kTop + ph + 16) << "\" text-anchor=\"middle\">"
            << tick(t) << "</text>\n";
    }
    const double ys = nice_step(y1 - y0);
    for (double t = std::ceil(y0 / ys) * ys; t <= y1 + 1e-9 * ys; t += ys) {
        out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(kLeft + pw)
            << "\" y2=\"" << num(py(t)) << "\" stroke=\"#e0e0e0\"/>\n";
        const std::string label = chart.log_y ? "1e" + tick(t) : tick(t);
        out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(t) + 4) << "\" text-anchor=\"end\">"
            << label << "</text>\n";
    }
    out << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\""
        << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (double m : chart.markers) {
        if (m < x0 || m > x1) continue;
        out << "<line x1=\"" << num(px(m)) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(px(m))
            << "\" y2=\"" << num(kTop + ph) << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
    }

    for (std::size_t k = 0; k < chart.series.size(); ++k) {
        const auto pts = reduce(chart.series[k], x0, x1, chart.log_y);
        const char* color = kColors[k % std::size(kColors)];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (!std::isfinite(pts[i].second)) continue;
            out << (i ? " " : "") << num(px(pts[i].first)) << ',' << num(py(pts[i].second));
        }
        out << "\"/>\n";
        if (chart.series.size() > 1) {
            const double ly = kTop + 14 + 16 * static_cast<double>(k);
            out << "<line x1=\"" << num(kLeft + pw - 140) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
                << num(kLeft + pw - 120) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color << "\"/>\n";
            out << "<text x=\"" << num(kLeft + pw - 115) << "\" y=\"" << num(ly) << "\">"
                << escape(chart.series[k].name) << "</text>\n";
        }
    }

    out << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 14)
        << "\" text-anchor=\"middle\">" << escape(chart.x_label) << "</text>\n";
    out << "<text transform=\"translate(18 " << num(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
        << escape(chart.y_label) << "</text>\n";
    out << "</svg>\n";
    return out.str();
}

}  // namespace gearmr::cli
