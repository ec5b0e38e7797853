#include "bellnav/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

namespace bellnav {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double x, int digits) {
    if(std::isnan(x)) return "nan";
    auto s = fmt::format("{:.{}f}", x, digits);
    if(s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1); // no "-0.000"
    return s;
}

std::vector<std::string> split(const std::string &line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while(std::getline(in, cur, sep)) out.push_back(cur);
    if(!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_num(const std::string &s) {
    if(s == "nan") return kNaN;
    try {
        std::size_t used = 0;
        const double v   = std::stod(s, &used);
        if(used != s.size()) throw ConfigError("");
        return v;
    } catch(const std::exception &) {
        throw ConfigError(fmt::format("csv: bad number '{}'", s));
    }
}

std::string escape(const std::string &s) {
    std::string out;
    for(char c : s) {
        if(c == '<') out += "&lt;";
        else if(c == '>') out += "&gt;";
        else if(c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

const char *kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

/// Round-number tick positions covering [lo, hi].
std::vector<double> ticks(double lo, double hi) {
    const double span = hi - lo;
    const double raw  = span / 5.0;
    const double mag  = std::pow(10.0, std::floor(std::log10(raw)));
    double step       = mag;
    for(double m : {1.0, 2.0, 5.0, 10.0})
        if(raw <= m * mag) {
            step = m * mag;
            break;
        }
    std::vector<double> out;
    for(double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    return out;
}

} // namespace

std::string records_to_csv(const std::vector<SweepRecord> &records, const CsvHeader &header) {
    std::size_t u = 0;
    for(const auto &r : records) u = std::max(u, r.settings.size());
    std::string out = fmt::format("# config_hash={} tau_lock={} tau_jump={} prominence={} gap_depth={} angles=units_of_pi\n", header.config_hash,
                                  header.tau_lock, header.tau_jump, header.prominence, header.gap_depth);
    out += "h,J,lambda1,lambda2,gap,dlambda_dh";
    for(std::size_t k = 1; k <= u; ++k) out += fmt::format(",theta_a{0},phi_a{0},theta_ap{0},phi_ap{0}", k);
    out += ",converged\n";
    for(const auto &r : records) {
        out += fmt::format("{},{},{},{},{},{}", num(r.h, 10), num(r.J, 10), num(r.lambda1, 12), num(r.lambda2, 12), num(r.gap, 12), num(r.dlambda_dh, 10));
        for(std::size_t k = 0; k < u; ++k) {
            if(k < r.settings.size()) {
                for(const auto &v : {r.settings[k].a, r.settings[k].a_prime}) {
                    const auto a = vector_to_angles(v);
                    out += fmt::format(",{},{}", num(a.theta / kPi, 10), num(a.phi / kPi, 10));
                }
            } else {
                out += ",nan,nan,nan,nan";
            }
        }
        out += fmt::format(",{}\n", r.converged ? 1 : 0);
    }
    return out;
}

std::vector<SweepRecord> records_from_csv(const std::string &text, CsvHeader *header) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> cols;
    std::vector<SweepRecord> out;
    while(std::getline(in, line)) {
        if(line.empty()) continue;
        if(line.front() == '#') {
            if(header != nullptr) {
                std::istringstream fields(line.substr(1));
                std::string kv;
                while(fields >> kv) {
                    const auto eq = kv.find('=');
                    if(eq == std::string::npos) continue;
                    const auto k = kv.substr(0, eq), v = kv.substr(eq + 1);
                    if(k == "config_hash") header->config_hash = v;
                    else if(k == "tau_lock") header->tau_lock = parse_num(v);
                    else if(k == "tau_jump") header->tau_jump = parse_num(v);
                    else if(k == "prominence") header->prominence = parse_num(v);
                    else if(k == "gap_depth") header->gap_depth = parse_num(v);
                }
            }
            continue;
        }
        if(cols.empty()) {
            cols = split(line, ',');
            if(cols.size() < 7 || cols[0] != "h" || cols.back() != "converged" || (cols.size() - 7) % 4 != 0)
                throw ConfigError("csv: unrecognized header");
            continue;
        }
        const auto f = split(line, ',');
        if(f.size() != cols.size()) throw ConfigError(fmt::format("csv: row has {} fields, header has {}", f.size(), cols.size()));
        SweepRecord r;
        r.h          = parse_num(f[0]);
        r.J          = parse_num(f[1]);
        r.lambda1    = parse_num(f[2]);
        r.lambda2    = parse_num(f[3]);
        r.gap        = parse_num(f[4]);
        r.dlambda_dh = parse_num(f[5]);
        const std::size_t u = (cols.size() - 7) / 4;
        for(std::size_t k = 0; k < u; ++k) {
            const double t  = parse_num(f[6 + 4 * k]), p = parse_num(f[7 + 4 * k]);
            const double tp = parse_num(f[8 + 4 * k]), pp = parse_num(f[9 + 4 * k]);
            if(std::isnan(t)) continue;
            r.settings.push_back({angles_to_vector({t * kPi, p * kPi}), angles_to_vector({tp * kPi, pp * kPi})});
        }
        r.converged = f.back() == "1";
        out.push_back(std::move(r));
    }
    if(cols.empty()) throw ConfigError("csv: no header row");
    return out;
}

std::string render_svg(const std::string &title, const std::string &xlabel, const std::vector<PlotPanel> &panels) {
    const double W = 720, left = 80, right = 170, top = 40, panel_h = 180, gap = 40, bottom = 50;
    const double H  = top + panels.size() * panel_h + (panels.size() > 0 ? (panels.size() - 1) * gap : 0) + bottom;
    const double pw = W - left - right;

    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    for(const auto &p : panels)
        for(const auto &s : p.series)
            for(double x : s.x)
                if(!std::isnan(x)) {
                    xlo = std::min(xlo, x);
                    xhi = std::max(xhi, x);
                }
    if(!(xlo < xhi)) {
        xlo = std::isfinite(xlo) ? xlo - 1 : 0;
        xhi = xlo + 2;
    }

    std::string out = fmt::format("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
                                  "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\">\n",
                                  W, H, W, H);
    out += fmt::format("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out += fmt::format("<text x=\"{:.1f}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n", left + pw / 2, escape(title));

    for(std::size_t pi = 0; pi < panels.size(); ++pi) {
        const auto &p  = panels[pi];
        const double y0 = top + pi * (panel_h + gap);
        double ylo = std::numeric_limits<double>::infinity(), yhi = -ylo;
        for(const auto &s : p.series)
            for(double y : s.y)
                if(std::isfinite(y)) {
                    ylo = std::min(ylo, y);
                    yhi = std::max(yhi, y);
                }
        if(!std::isfinite(ylo)) {
            ylo = 0;
            yhi = 1;
        }
        if(yhi - ylo < 1e-12 * std::max(1.0, std::abs(yhi))) {
            ylo -= 0.5;
            yhi += 0.5;
        }
        const double pad = 0.05 * (yhi - ylo);
        ylo -= pad;
        yhi += pad;
        auto sx = [&](double x) { return left + (x - xlo) / (xhi - xlo) * pw; };
        auto sy = [&](double y) { return y0 + panel_h - (y - ylo) / (yhi - ylo) * panel_h; };

        out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" stroke=\"black\"/>\n", left, y0, pw, panel_h);
        for(double t : ticks(ylo, yhi)) {
            out += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.2f}\" x2=\"{:.1f}\" y2=\"{:.2f}\" stroke=\"#ddd\"/>\n", left, sy(t), left + pw, sy(t));
            out += fmt::format("<text x=\"{:.1f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{:g}</text>\n", left - 4,
                               sy(t) + 3, t);
        }
        for(double t : ticks(xlo, xhi)) {
            out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.1f}\" x2=\"{:.2f}\" y2=\"{:.1f}\" stroke=\"black\"/>\n", sx(t), y0 + panel_h, sx(t), y0 + panel_h + 4);
            out += fmt::format("<text x=\"{:.2f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{:g}</text>\n", sx(t),
                               y0 + panel_h + 15, t);
        }
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
                           "transform=\"rotate(-90 {:.1f} {:.1f})\">{}</text>\n",
                           left - 50, y0 + panel_h / 2, left - 50, y0 + panel_h / 2, escape(p.ylabel));
        for(double m : p.markers)
            out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.1f}\" x2=\"{0:.2f}\" y2=\"{2:.1f}\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n", sx(m), y0,
                               y0 + panel_h);
        for(std::size_t si = 0; si < p.series.size(); ++si) {
            const auto &s     = p.series[si];
            const char *color = kColors[si % std::size(kColors)];
            std::string pts;
            auto flush = [&] {
                if(!pts.empty())
                    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", color, pts);
                pts.clear();
            };
            for(std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
                if(!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                    flush();
                    continue;
                }
                pts += fmt::format("{}{:.2f},{:.2f}", pts.empty() ? "" : " ", sx(s.x[i]), sy(s.y[i]));
            }
            flush();
            const double ly = y0 + 12 + 14 * si;
            out += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"{}\" stroke-width=\"2\"/>\n", left + pw + 10, ly,
                               left + pw + 28, ly, color);
            out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n", left + pw + 32, ly + 4,
                               escape(s.label));
        }
    }
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n", left + pw / 2,
                       H - 12, escape(xlabel));
    out += "</svg>\n";
    return out;
}

std::string indicator_svg(const std::vector<SweepRecord> &records, const std::vector<double> &critical) {
    PlotSeries l1{"lambda1", {}, {}}, l2{"lambda2", {}, {}}, g{"gap", {}, {}}, chi{"dlambda1/dh", {}, {}};
    for(const auto &r : records) {
        for(auto *s : {&l1, &l2, &g, &chi}) s->x.push_back(r.h);
        l1.y.push_back(r.lambda1);
        l2.y.push_back(r.lambda2);
        g.y.push_back(r.gap);
        chi.y.push_back(r.dlambda_dh);
    }
    std::vector<PlotPanel> panels{{"|lambda| per site", {l1, l2}, critical}, {"gap", {g}, critical}, {"dlambda1/dh", {chi}, critical}};
    const std::string title = records.empty() ? "indicators" : fmt::format("Bell transfer spectrum, J = {:g}", records.front().J);
    return render_svg(title, "h", panels);
}

std::string angle_svg(const std::vector<SweepRecord> &records, const std::vector<double> &jumps) {
    std::size_t u = 0;
    for(const auto &r : records) u = std::max(u, r.settings.size());
    std::vector<PlotSeries> th, ph;
    for(std::size_t op = 0; op < 2 * u; ++op) {
        const std::string label = fmt::format("{}{}", op % 2 == 0 ? "a" : "a'", op / 2 + 1);
        PlotSeries t{"theta " + label, {}, {}}, p{"phi " + label, {}, {}};
        for(const auto &r : records) {
            t.x.push_back(r.h);
            p.x.push_back(r.h);
            if(op / 2 >= r.settings.size()) {
                t.y.push_back(kNaN);
                p.y.push_back(kNaN);
                continue;
            }
            const auto a = vector_to_angles(op % 2 == 0 ? r.settings[op / 2].a : r.settings[op / 2].a_prime);
            t.y.push_back(a.theta / kPi);
            p.y.push_back(a.phi / kPi);
        }
        th.push_back(std::move(t));
        ph.push_back(std::move(p));
    }
    return render_svg("optimal measurement angles", "h", {{"theta / pi", th, jumps}, {"phi / pi", ph, jumps}});
}

std::string geometry_report_text(const GeometryReport &geometry, const std::vector<CriticalEstimate> &estimates, const std::vector<double> &consolidated) {
    std::string out = fmt::format("geometry (tau_lock={} rad, tau_jump={} rad)\n", geometry.tau_lock, geometry.tau_jump);
    if(geometry.angles.empty()) out += "  no records violate the classical bound\n";
    for(const auto &t : geometry.angles) {
        out += fmt::format("  {:<12} {:<8} max_drift={:.6f} max_step={:.6f} samples={} jumps={}", t.name, to_string(t.verdict), t.max_drift, t.max_step,
                           t.samples, t.jumps.size());
        for(double j : t.jumps) out += fmt::format(" @{:.4f}", j);
        out += "\n";
    }
    out += "  relation switches:";
    if(geometry.relation_switches.empty()) out += " none";
    for(double h : geometry.relation_switches) out += fmt::format(" {:.4f}", h);
    out += "\ncritical points\n";
    for(const auto &e : estimates)
        out += fmt::format("  {:<15} h={:.4f} strength={:.6g}{}\n", to_string(e.method), e.h, e.strength, e.confirmed ? " confirmed" : "");
    out += "  consolidated:";
    if(consolidated.empty()) out += " none";
    for(double h : consolidated) out += fmt::format(" {:.4f}", h);
    out += "\n";
    return out;
}

std::string format_angles_pi(const MeasurementSettings &settings) {
    std::string out;
    for(std::size_t k = 0; k < settings.size(); ++k) {
        const auto a  = vector_to_angles(settings[k].a);
        const auto ap = vector_to_angles(settings[k].a_prime);
        out += fmt::format("site {}: a=(theta {:.6f} pi, phi {:.6f} pi)  a'=(theta {:.6f} pi, phi {:.6f} pi)\n", k + 1, a.theta / kPi, a.phi / kPi,
                           ap.theta / kPi, ap.phi / kPi);
    }
    return out;
}

void write_text_file(const std::filesystem::path &path, const std::string &text) {
    if(path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if(!out) throw ResourceError(fmt::format("cannot write {}", path.string()));
    out << text;
}

std::string read_text_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if(!in) throw ConfigError(fmt::format("cannot open {}", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace bellnav
