#ifndef M12_REPORT_HPP
#define M12_REPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace m12 {

struct SweepRow {
    std::string scheme;
    std::string x_name;   // snr_db, distance_km, launch_power_dbm
    double x = 0.0;
    double power_dbm = std::numeric_limits<double>::quiet_NaN(); // per-power curves only
    std::string metric;
    double value = 0.0;
    double ci95 = 0.0;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
};

struct SweepReport {
    std::vector<std::string> header; // effective config etc., emitted as comments
    std::vector<SweepRow> rows;
    bool converged = true;
};

namespace detail {

inline std::string fmt_g(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace detail

inline void write_csv(const SweepReport& rep, std::ostream& os) {
    for (const auto& h : rep.header) os << "# " << h << '\n';
    os << "scheme,x_name,x,power_dbm,metric,value,ci95,n_samples,seed\n";
    for (const auto& r : rep.rows) {
        os << r.scheme << ',' << r.x_name << ',' << detail::fmt_g(r.x) << ','
           << detail::fmt_g(r.power_dbm) << ',' << r.metric << ','
           << detail::fmt_g(r.value) << ',' << detail::fmt_g(r.ci95) << ','
           << r.n_samples << ',' << r.seed << '\n';
    }
}

// Minimal SVG line plot of the report, one polyline per (scheme, metric,
// power) curve. Log y-axis when log_y is set (intended for BER).
inline void write_svg(const SweepReport& rep, std::ostream& os, bool log_y = false) {
    const double W = 720, H = 480, ml = 70, mr = 20, mt = 20, mb = 50;
    struct Key {
        std::string s, m;
        double p;
        bool operator<(const Key& o) const {
            return std::tie(s, m, p) < std::tie(o.s, o.m, o.p);
        }
    };
    std::map<Key, std::vector<std::pair<double, double>>> curves;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    std::string x_name = "x";
    for (const auto& r : rep.rows) {
        double y = r.value;
        if (log_y) {
            if (y <= 0.0) continue;
            y = std::log10(y);
        }
        curves[{r.scheme, r.metric, r.power_dbm}].push_back({r.x, y});
        xmin = std::min(xmin, r.x);
        xmax = std::max(xmax, r.x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
        x_name = r.x_name;
    }
    if (curves.empty() || xmax <= xmin) {
        os << "<svg xmlns='http://www.w3.org/2000/svg'/>\n";
        return;
    }
    if (ymax <= ymin) { ymax = ymin + 1.0; }
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    os << "<rect width='100%' height='100%' fill='white'/>\n";
    os << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='" << H - mb
       << "' stroke='black'/>\n";
    os << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb
       << "' stroke='black'/>\n";
    os << "<text x='" << (W / 2) << "' y='" << (H - 12) << "' text-anchor='middle'>" << x_name
       << "</text>\n";
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
    int ci = 0, leg = 0;
    for (const auto& [key, pts] : curves) {
        auto sorted = pts;
        std::sort(sorted.begin(), sorted.end());
        os << "<polyline fill='none' stroke='" << colors[ci % 8] << "' stroke-width='1.5' points='";
        for (const auto& [x, y] : sorted) os << px(x) << ',' << py(y) << ' ';
        os << "'/>\n";
        std::string label = key.s + " " + key.m;
        if (!std::isnan(key.p)) label += " @" + detail::fmt_g(key.p) + "dBm";
        os << "<text x='" << (ml + 10) << "' y='" << (mt + 14 + 16 * leg) << "' fill='"
           << colors[ci % 8] << "' font-size='12'>" << label << "</text>\n";
        ++ci;
        ++leg;
    }
    for (int t = 0; t <= 5; ++t) {
        const double xv = xmin + (xmax - xmin) * t / 5.0;
        const double yv = ymin + (ymax - ymin) * t / 5.0;
        os << "<text x='" << px(xv) << "' y='" << (H - mb + 16)
           << "' text-anchor='middle' font-size='11'>" << detail::fmt_g(xv) << "</text>\n";
        os << "<text x='" << (ml - 6) << "' y='" << (py(yv) + 4)
           << "' text-anchor='end' font-size='11'>"
           << (log_y ? "1e" + detail::fmt_g(yv) : detail::fmt_g(yv)) << "</text>\n";
    }
    os << "</svg>\n";
}

} // namespace m12

#endif
