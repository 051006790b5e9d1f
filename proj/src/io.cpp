#include "mfcd/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mfcd {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out)
            throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string region_csv(const StabilityRegion& region) {
    std::ostringstream os;
    os << "kp,kd,predicted,stable\n";
    for (const RegionPoint& p : region.grid)
        os << format_double(p.kp) << ',' << format_double(p.kd) << ',' << (p.predicted ? 1 : 0)
           << ',' << (p.stable ? 1 : 0) << '\n';
    return os.str();
}

namespace {

nlohmann::json line_json(const PhaseLine& line) {
    nlohmann::json j;
    j["slope"] = line.slope;
    j["intercept"] = line.intercept;
    j["vertical"] = line.vertical;
    j["omega"] = line.omega;
    j["w"] = line.w;
    switch (line.feasible) {
    case LineSide::above: j["feasible_side"] = "above"; break;
    case LineSide::below: j["feasible_side"] = "below"; break;
    case LineSide::non_binding: j["feasible_side"] = "non-binding"; break;
    }
    return j;
}

} // namespace

std::string region_summary_json(const StabilityRegion& region) {
    nlohmann::json j;
    j["alpha"] = region.spec.alpha;
    j["c"] = region.spec.c;
    j["ts"] = region.spec.ts;
    j["n"] = region.spec.n;
    j["resolution"] = region.resolution;
    j["ellipse"] = {{"q11", region.ellipse.q11}, {"q12", region.ellipse.q12},
                    {"q22", region.ellipse.q22}, {"rhs", region.ellipse.rhs},
                    {"omega", region.ellipse.omega}};
    if (region.line)
        j["phase_line"] = line_json(*region.line);
    j["simplified_phase_line"] = line_json(region.simplified_line);
    if (region.omega0)
        j["omega0"] = *region.omega0;
    if (region.omega1)
        j["omega1"] = *region.omega1;
    j["omega0_found"] = region.omega0_found;
    j["predicted"] = region.predicted_count();
    j["stable"] = region.stable_count();
    j["predicted_and_stable"] = region.predicted_and_stable_count();
    return j.dump(2) + "\n";
}

std::string trace_csv(const SimTrace& trace) {
    const bool cascade = !trace.inner_ref.empty();
    std::ostringstream os;
    os << "t,y_ref,y,e,u";
    if (cascade)
        os << ",inner_ref,inner_y";
    os << '\n';
    for (std::size_t k = 0; k < trace.size(); ++k) {
        os << format_double(trace.t[k]) << ',' << format_double(trace.y_ref[k]) << ','
           << format_double(trace.y[k]) << ',' << format_double(trace.e[k]) << ','
           << format_double(trace.u[k]);
        if (cascade)
            os << ',' << format_double(trace.inner_ref[k]) << ',' << format_double(trace.inner_y[k]);
        os << '\n';
    }
    return os.str();
}

SimTrace trace_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw Error("empty trace file");
    const bool cascade = line.find("inner_ref") != std::string::npos;

    SimTrace trace;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(row, cell, ','))
            vals.push_back(std::strtod(cell.c_str(), nullptr));
        if (vals.size() < 5)
            throw Error("malformed trace row: " + line);
        trace.t.push_back(vals[0]);
        trace.y_ref.push_back(vals[1]);
        trace.y.push_back(vals[2]);
        trace.e.push_back(vals[3]);
        trace.u.push_back(vals[4]);
        if (cascade && vals.size() >= 7) {
            trace.inner_ref.push_back(vals[5]);
            trace.inner_y.push_back(vals[6]);
        }
    }
    if (trace.size() >= 2)
        trace.ts = trace.t[1] - trace.t[0];
    return trace;
}

std::string metrics_json(const Metrics& m) {
    nlohmann::json j;
    j["iae"] = m.iae;
    j["iaudd"] = m.iaudd;
    j["os"] = m.os;
    return j.dump() + "\n";
}

namespace {

struct Viewport {
    double kp_lo, kp_hi, kd_lo, kd_hi;
    static constexpr double margin = 55.0;
    static constexpr double width = 760.0;
    static constexpr double height = 560.0;

    double x(double kp) const {
        return margin + (kp - kp_lo) / (kp_hi - kp_lo) * (width - 2 * margin);
    }
    double y(double kd) const {
        return height - margin - (kd - kd_lo) / (kd_hi - kd_lo) * (height - 2 * margin);
    }
};

std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

void svg_polyline(std::ostringstream& os, const std::vector<std::pair<double, double>>& pts,
                  const Viewport& vp, const char* color, const char* dash, bool close) {
    if (pts.empty())
        return;
    os << "<path d=\"";
    for (std::size_t i = 0; i < pts.size(); ++i)
        os << (i == 0 ? 'M' : 'L') << svg_num(vp.x(pts[i].first)) << ' ' << svg_num(vp.y(pts[i].second));
    if (close)
        os << 'Z';
    os << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\"";
    if (dash)
        os << " stroke-dasharray=\"" << dash << "\"";
    os << " clip-path=\"url(#plot)\"/>\n";
}

// clip an infinite line kd = s*kp + b (or kp = const) to the kp range
std::vector<std::pair<double, double>> line_points(const PhaseLine& line, const Viewport& vp) {
    if (line.vertical)
        return {{0.0, vp.kd_lo}, {0.0, vp.kd_hi}};
    return {{vp.kp_lo, line.slope * vp.kp_lo + line.intercept},
            {vp.kp_hi, line.slope * vp.kp_hi + line.intercept}};
}

} // namespace

std::string region_svg(const StabilityRegion& region) {
    Viewport vp{};
    vp.kp_lo = region.grid.front().kp;
    vp.kp_hi = region.grid.back().kp;
    vp.kd_lo = region.grid.front().kd;
    vp.kd_hi = region.grid.back().kd;
    for (const RegionPoint& p : region.grid) {
        vp.kp_lo = std::min(vp.kp_lo, p.kp);
        vp.kp_hi = std::max(vp.kp_hi, p.kp);
        vp.kd_lo = std::min(vp.kd_lo, p.kd);
        vp.kd_hi = std::max(vp.kd_hi, p.kd);
    }

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Viewport::width << "\" height=\""
       << Viewport::height << "\" viewBox=\"0 0 " << Viewport::width << ' ' << Viewport::height
       << "\">\n";
    os << "<defs><clipPath id=\"plot\"><rect x=\"" << Viewport::margin << "\" y=\"" << Viewport::margin
       << "\" width=\"" << Viewport::width - 2 * Viewport::margin << "\" height=\""
       << Viewport::height - 2 * Viewport::margin << "\"/></clipPath></defs>\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // axes
    os << "<rect x=\"" << Viewport::margin << "\" y=\"" << Viewport::margin << "\" width=\""
       << Viewport::width - 2 * Viewport::margin << "\" height=\""
       << Viewport::height - 2 * Viewport::margin
       << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double kp = vp.kp_lo + (vp.kp_hi - vp.kp_lo) * i / 5.0;
        const double kd = vp.kd_lo + (vp.kd_hi - vp.kd_lo) * i / 5.0;
        os << "<text x=\"" << svg_num(vp.x(kp)) << "\" y=\"" << Viewport::height - Viewport::margin + 18
           << "\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">" << svg_num(kp)
           << "</text>\n";
        os << "<text x=\"" << Viewport::margin - 8 << "\" y=\"" << svg_num(vp.y(kd) + 4)
           << "\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">" << svg_num(kd)
           << "</text>\n";
    }
    os << "<text x=\"" << Viewport::width / 2 << "\" y=\"" << Viewport::height - 12
       << "\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\">Kp</text>\n";
    os << "<text x=\"16\" y=\"" << Viewport::height / 2
       << "\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\" transform=\"rotate(-90 16 "
       << Viewport::height / 2 << ")\">Kd</text>\n";

    // grid points, verified colour
    for (const RegionPoint& p : region.grid)
        os << "<circle cx=\"" << svg_num(vp.x(p.kp)) << "\" cy=\"" << svg_num(vp.y(p.kd))
           << "\" r=\"2\" fill=\"" << (p.stable ? "#2ca02c" : "#d62728") << "\"/>\n";

    // module boundary (ellipse or degenerate slab)
    if (!region.ellipse.degenerate()) {
        svg_polyline(os, region.ellipse.boundary_points(256), vp, "#1f77b4", nullptr, true);
    } else {
        // slab: sqrt(q11) Kp' + s sqrt(q22) Kd = +-sqrt(rhs)
        const double a = std::sqrt(region.ellipse.q11) * region.ellipse.ts;
        const double b = std::copysign(std::sqrt(region.ellipse.q22), region.ellipse.q12);
        const double r = std::sqrt(region.ellipse.rhs);
        if (b != 0.0) {
            for (double sign : {1.0, -1.0}) {
                std::vector<std::pair<double, double>> pts{
                    {vp.kp_lo, (sign * r - a * vp.kp_lo) / b},
                    {vp.kp_hi, (sign * r - a * vp.kp_hi) / b}};
                svg_polyline(os, pts, vp, "#1f77b4", nullptr, false);
            }
        }
    }

    if (region.line)
        svg_polyline(os, line_points(*region.line, vp), vp, "black", nullptr, false);
    svg_polyline(os, line_points(region.simplified_line, vp), vp, "#888", "6 4", false);

    os << "</svg>\n";
    return os.str();
}

} // namespace mfcd
