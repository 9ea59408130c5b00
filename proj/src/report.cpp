#include "mppac/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mppac {

namespace {

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
    out << "time_s,episodes,lower,upper\n";
    for (const auto& r : trace) {
        out << fmt("%.6f", r.seconds) << ',' << r.episodes << ',' << fmt("%.10g", r.lower * r.r_max) << ','
            << fmt("%.10g", r.upper * r.r_max) << '\n';
    }
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
    std::ostringstream os;
    write_csv(os, trace);
    return os.str();
}

std::string trace_svg(const std::vector<TraceRow>& trace, const std::string& title) {
    constexpr double W = 640, H = 400, left = 60, right = 20, top = 40, bottom = 50;
    double t_max = 0.0, v_max = 0.0;
    for (const auto& r : trace) {
        t_max = std::max(t_max, r.seconds);
        v_max = std::max(v_max, r.upper * r.r_max);
    }
    if (t_max <= 0.0) t_max = 1.0;
    if (v_max <= 0.0) v_max = 1.0;
    auto x = [&](double t) { return left + (W - left - right) * t / t_max; };
    auto y = [&](double v) { return H - bottom - (H - top - bottom) * v / v_max; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
       << W << ' ' << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
       << escape_xml(title) << "</text>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\"" << H - bottom
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom
       << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = v_max * i / 4.0;
        const double t = t_max * i / 4.0;
        os << "<text x=\"" << left - 6 << "\" y=\"" << y(v) + 4
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << fmt("%.3g", v) << "</text>\n";
        os << "<text x=\"" << x(t) << "\" y=\"" << H - bottom + 16
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << fmt("%.3g", t)
           << "</text>\n";
    }
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">time (s)</text>\n";
    auto polyline = [&](bool upper, const char* color) {
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& r : trace) {
            const double v = (upper ? r.upper : r.lower) * r.r_max;
            os << fmt("%.2f", x(r.seconds)) << ',' << fmt("%.2f", y(v)) << ' ';
        }
        os << "\"/>\n";
    };
    polyline(false, "#1f77b4");
    polyline(true, "#d62728");
    os << "<text x=\"" << W - right - 4 << "\" y=\"" << top + 12
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#d62728\">upper</text>\n";
    os << "<text x=\"" << W - right - 4 << "\" y=\"" << top + 26
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#1f77b4\">lower</text>\n";
    os << "</svg>\n";
    return os.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << text;
    if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace mppac
