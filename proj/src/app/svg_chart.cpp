#include "criticalwave/app/svg_chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace criticalwave::app {

namespace {

constexpr double kWidth = 720, kHeight = 460;
constexpr double kLeft = 84, kRight = 180, kTop = 44, kBottom = 62;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

struct Axis
{
    bool log = false;
    double lo = 0.0, hi = 1.0; // in transformed units

    double map(double v) const { return log ? std::log10(v) : v; }
    double fraction(double v) const { return (map(v) - lo) / (hi - lo); }

    // tick positions in data units
    std::vector<double> ticks() const
    {
        std::vector<double> out;
        if (log) {
            const double first = std::ceil(lo - 1e-9), last = std::floor(hi + 1e-9);
            const double step = std::max(1.0, std::ceil((last - first + 1) / 8));
            for (double e = first; e <= last + 1e-9; e += step)
                out.push_back(std::pow(10.0, e));
            if (out.size() < 2)
                for (double m : {2.0, 5.0})
                    for (double e = std::floor(lo); e <= hi; e += 1.0)
                        if (const double v = m * std::pow(10.0, e); map(v) >= lo && map(v) <= hi)
                            out.push_back(v);
            std::ranges::sort(out);
            return out;
        }
        const double raw = (hi - lo) / 6;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 5.0, 10.0})
            if (m * mag >= raw) {
                step = m * mag;
                break;
            }
        for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step)
            out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
        return out;
    }
};

Axis make_axis(bool log, double lo, double hi)
{
    Axis a;
    a.log = log;
    if (!(lo <= hi)) {
        lo = log ? 1.0 : 0.0;
        hi = log ? 10.0 : 1.0;
    }
    a.lo = a.map(lo);
    a.hi = a.map(hi);
    if (a.hi - a.lo < 1e-12 * std::max(1.0, std::abs(a.hi))) {
        const double pad = log ? 0.5 : std::max(1e-12, 0.5 * std::abs(a.lo));
        a.lo -= pad;
        a.hi += pad;
    } else if (!log) {
        const double pad = 0.04 * (a.hi - a.lo);
        a.lo -= pad;
        a.hi += pad;
    }
    return a;
}

bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

} // namespace

std::string Chart::render() const
{
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
    for (const auto& s : series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
            if (usable(s.x[i], log_x) && usable(s.y[i], log_y)) {
                xlo = std::min(xlo, s.x[i]);
                xhi = std::max(xhi, s.x[i]);
                ylo = std::min(ylo, s.y[i]);
                yhi = std::max(yhi, s.y[i]);
            }
    const Axis ax = make_axis(log_x, xlo, xhi);
    const Axis ay = make_axis(log_y, ylo, yhi);
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    const auto px = [&](double v) { return kLeft + pw * ax.fraction(v); };
    const auto py = [&](double v) { return kTop + ph * (1.0 - ay.fraction(v)); };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" viewBox=\"0 0 "
      << kWidth << ' ' << kHeight << "\">\n";
    o << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" style=\"fill:#ffffff\"/>\n";
    o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"26\" style=\"font-family:sans-serif;font-size:16px;text-anchor:middle\">"
      << escape(title) << "</text>\n";

    for (double t : ax.ticks()) {
        const double x = px(t);
        o << "<line x1=\"" << num(x) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(x) << "\" y2=\"" << num(kTop + ph)
          << "\" style=\"stroke:#e0e0e0;stroke-width:1\"/>\n";
        o << "<text x=\"" << num(x) << "\" y=\"" << num(kTop + ph + 18)
          << "\" style=\"font-family:sans-serif;font-size:11px;text-anchor:middle\">" << tick_label(t) << "</text>\n";
    }
    for (double t : ay.ticks()) {
        const double y = py(t);
        o << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft + pw) << "\" y2=\"" << num(y)
          << "\" style=\"stroke:#e0e0e0;stroke-width:1\"/>\n";
        o << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y + 4)
          << "\" style=\"font-family:sans-serif;font-size:11px;text-anchor:end\">" << tick_label(t) << "</text>\n";
    }
    o << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
      << "\" style=\"fill:none;stroke:#000000;stroke-width:1\"/>\n";
    o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 16)
      << "\" style=\"font-family:sans-serif;font-size:13px;text-anchor:middle\">" << escape(x_label) << "</text>\n";
    o << "<text x=\"18\" y=\"" << num(kTop + ph / 2) << "\" transform=\"rotate(-90 18 " << num(kTop + ph / 2)
      << ")\" style=\"font-family:sans-serif;font-size:13px;text-anchor:middle\">" << escape(y_label) << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kPalette[k % std::size(kPalette)];
        std::string points;
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
            if (usable(s.x[i], log_x) && usable(s.y[i], log_y))
                points += num(px(s.x[i])) + ',' + num(py(s.y[i])) + ' ';
        if (!points.empty()) {
            points.pop_back();
            o << "<polyline points=\"" << points << "\" style=\"fill:none;stroke:" << color
              << ";stroke-width:1.6;stroke-linejoin:round\"/>\n";
        }
        const double ly = kTop + 10 + 18 * static_cast<double>(k);
        o << "<line x1=\"" << num(kLeft + pw + 12) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(kLeft + pw + 34) << "\" y2=\""
          << num(ly) << "\" style=\"stroke:" << color << ";stroke-width:2\"/>\n";
        o << "<text x=\"" << num(kLeft + pw + 40) << "\" y=\"" << num(ly + 4) << "\" style=\"font-family:sans-serif;font-size:11px\">"
          << escape(s.label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

void Chart::write(const std::filesystem::path& file) const
{
    std::ofstream out(file, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + file.string());
    out << render();
}

} // namespace criticalwave::app
