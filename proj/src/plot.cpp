#include "geophase/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "geophase/run.hpp"
#include "geophase/snapshot.hpp"
#include "geophase/units.hpp"

namespace geophase {

namespace fs = std::filesystem;

namespace {

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const {
        const auto it = std::find(columns.begin(), columns.end(), name);
        return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
    }
};

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string cell;
    while (std::getline(in, cell, ',')) out.push_back(cell);
    return out;
}

bool read_table(const fs::path& file, Table& t) {
    std::ifstream in(file);
    if (!in) return false;
    std::string line;
    if (!std::getline(in, line)) return false;
    t.columns = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        for (const auto& cell : split(line)) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                row.push_back(std::numeric_limits<double>::quiet_NaN());
            }
        }
        if (row.size() == t.columns.size()) t.rows.push_back(std::move(row));
    }
    return !t.rows.empty();
}

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
    std::vector<double> ticks;
    if (!(hi > lo)) return {lo};
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw) break;
    }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) {
        ticks.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    }
    return ticks;
}

const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

class Svg {
public:
    Svg(double width, double height) : w_(width), h_(height) {}

    void line(double x1, double y1, double x2, double y2, const std::string& color,
              double width = 1.0, const std::string& dash = "") {
        body_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2)
              << "\" y2=\"" << fmt(y2) << "\" stroke=\"" << color << "\" stroke-width=\""
              << fmt(width) << '"';
        if (!dash.empty()) body_ << " stroke-dasharray=\"" << dash << '"';
        body_ << "/>\n";
    }
    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                  double width = 1.5, const std::string& dash = "") {
        if (pts.size() < 2) return;
        body_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << fmt(width)
              << '"';
        if (!dash.empty()) body_ << " stroke-dasharray=\"" << dash << '"';
        body_ << " points=\"";
        for (const auto& [x, y] : pts) body_ << fmt(x, "%.2f") << ',' << fmt(y, "%.2f") << ' ';
        body_ << "\"/>\n";
    }
    void circle(double x, double y, double r, const std::string& color) {
        body_ << "<circle cx=\"" << fmt(x, "%.2f") << "\" cy=\"" << fmt(y, "%.2f") << "\" r=\""
              << fmt(r) << "\" fill=\"" << color << "\"/>\n";
    }
    void rect(double x, double y, double w, double h, const std::string& fill) {
        body_ << "<rect x=\"" << fmt(x, "%.2f") << "\" y=\"" << fmt(y, "%.2f") << "\" width=\""
              << fmt(w, "%.2f") << "\" height=\"" << fmt(h, "%.2f") << "\" fill=\"" << fill
              << "\"/>\n";
    }
    void text(double x, double y, const std::string& s, const std::string& anchor = "middle",
              int size = 12, double rotate = 0.0) {
        body_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-size=\"" << size
              << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << '"';
        if (rotate != 0.0) {
            body_ << " transform=\"rotate(" << fmt(rotate) << ' ' << fmt(x) << ' ' << fmt(y) << ")\"";
        }
        body_ << '>' << s << "</text>\n";
    }
    void save(const fs::path& file) const {
        std::ofstream out(file, std::ios::trunc);
        if (!out) throw PlotError("cannot write " + file.string());
        out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
            << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w_) << "\" height=\""
            << fmt(h_) << "\" viewBox=\"0 0 " << fmt(w_) << ' ' << fmt(h_) << "\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << body_.str() << "</svg>\n";
    }

private:
    double w_, h_;
    std::ostringstream body_;
};

// Data-to-pixel mapping for one rectangular panel.
struct Panel {
    double left, top, width, height;
    double x0, x1, y0, y1;
    bool log_x = false, log_y = false;

    double px(double x) const {
        const double u = log_x ? (std::log10(x) - x0) / (x1 - x0) : (x - x0) / (x1 - x0);
        return left + u * width;
    }
    double py(double y) const {
        const double u = log_y ? (std::log10(y) - y0) / (y1 - y0) : (y - y0) / (y1 - y0);
        return top + height - u * height;
    }

    void frame(Svg& svg, const std::string& xlabel, const std::string& ylabel,
               const std::string& title) const {
        svg.line(left, top + height, left + width, top + height, "black");
        svg.line(left, top, left, top + height, "black");
        for (double t : nice_ticks(x0, x1)) {
            const double x = left + (t - x0) / (x1 - x0) * width;
            svg.line(x, top + height, x, top + height + 4, "black");
            svg.text(x, top + height + 16, log_x ? "1e" + fmt(t) : fmt(t), "middle", 10);
        }
        for (double t : nice_ticks(y0, y1, 5)) {
            const double y = top + height - (t - y0) / (y1 - y0) * height;
            svg.line(left - 4, y, left, y, "black");
            svg.text(left - 6, y + 3, log_y ? "1e" + fmt(t) : fmt(t), "end", 10);
        }
        svg.text(left + width / 2, top + height + 32, xlabel);
        svg.text(left - 42, top + height / 2, ylabel, "middle", 12, -90.0);
        svg.text(left + width / 2, top - 6, title, "middle", 13);
    }

    bool inside(double x, double y) const {
        return std::isfinite(x) && std::isfinite(y) && x >= left - 1e-9 && x <= left + width + 1e-9 &&
               y >= top - 1e-9 && y <= top + height + 1e-9;
    }
};

std::pair<double, double> padded_range(double lo, double hi) {
    if (!(hi > lo)) return {lo - 1.0, hi + 1.0};
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

bool plot_phase(const Table& t, const PlotOptions& o, const fs::path& file,
                std::vector<std::string>& warnings) {
    const int c_t = t.column("time_fs"), c_id = t.column("path_id"), c_r = t.column("R_a0");
    const int c_s = t.column("gamma_over_pi_sformula"), c_m = t.column("gamma_over_pi_momentum");
    if (c_t < 0 || c_id < 0 || c_r < 0 || (c_s < 0 && c_m < 0)) {
        warnings.push_back("phase.csv lacks the expected columns; phase plot skipped");
        return false;
    }
    std::map<int, std::vector<const std::vector<double>*>> by_path;
    double t_max = 0.0;
    for (const auto& r : t.rows) {
        by_path[static_cast<int>(r[c_id])].push_back(&r);
        t_max = std::max(t_max, r[c_t]);
    }
    for (double ref : o.reference_fs) t_max = std::max(t_max, ref);

    const double panel_h = 180.0, gap = 60.0;
    Svg svg(760.0, 40.0 + by_path.size() * (panel_h + gap));
    double top = 40.0;
    for (const auto& [id, rows] : by_path) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto* r : rows) {
            for (int c : {c_s, c_m}) {
                if (c >= 0 && std::isfinite((*r)[c])) {
                    lo = std::min(lo, (*r)[c]);
                    hi = std::max(hi, (*r)[c]);
                }
            }
        }
        if (!std::isfinite(lo)) {
            warnings.push_back("path " + std::to_string(id) + " has no finite phase values; panel left empty");
            lo = -1.5;
            hi = -0.5;
        }
        auto [y0, y1] = padded_range(std::min(lo, -1.0), std::max(hi, -1.0));
        Panel p{80.0, top, 640.0, panel_h, 0.0, t_max, y0, y1};
        p.frame(svg, "time (fs)", "phase / pi",
                "loop radius " + fmt((*rows.front())[c_r]) + " a0");
        for (double ref : o.reference_fs) {
            svg.line(p.px(ref), top, p.px(ref), top + panel_h, "#d62728", 2.0);
        }
        for (double level = std::ceil(y0); level <= y1; level += 1.0) {
            svg.line(p.left, p.py(level), p.left + p.width, p.py(level), "#999999", 0.8, "4,3");
        }
        int k = 0;
        for (int c : {c_s, c_m}) {
            if (c < 0) continue;
            std::vector<std::pair<double, double>> pts;
            for (const auto* r : rows) {
                if (std::isfinite((*r)[c])) pts.emplace_back(p.px((*r)[c_t]), p.py((*r)[c]));
            }
            svg.polyline(pts, palette[k], 1.5, k == 0 ? "" : "6,3");
            ++k;
        }
        svg.text(p.left + p.width - 4, top + 14, "solid: s-formula, dashed: momentum", "end", 10);
        top += panel_h + gap;
    }
    svg.save(file);
    return true;
}

bool plot_emf(const Table& t, const fs::path& file, std::vector<std::string>& warnings) {
    const int c_t = t.column("time_fs"), c_id = t.column("path_id"), c_r = t.column("R_a0");
    const char* names[] = {"e_nbo_per_au", "e_el_per_au", "e_mag_per_au", "e_total_per_au"};
    const char* labels[] = {"NBO", "electric", "magnetic", "total"};
    const int c_fd = t.column("fd_rate_per_au");
    if (c_t < 0 || c_id < 0) {
        warnings.push_back("emf.csv lacks time or path columns; EMF plot skipped");
        return false;
    }
    std::map<int, std::vector<const std::vector<double>*>> by_path;
    for (const auto& r : t.rows) by_path[static_cast<int>(r[c_id])].push_back(&r);

    const double panel_h = 220.0, gap = 70.0;
    Svg svg(760.0, 40.0 + by_path.size() * (panel_h + gap));
    double top = 40.0;
    for (const auto& [id, rows] : by_path) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo, t_lo = lo, t_hi = -lo;
        std::vector<int> cols;
        for (const char* n : names) {
            const int c = t.column(n);
            if (c < 0) warnings.push_back(std::string("emf.csv has no ") + n + " column; series skipped");
            cols.push_back(c);
        }
        for (const auto* r : rows) {
            t_lo = std::min(t_lo, (*r)[c_t]);
            t_hi = std::max(t_hi, (*r)[c_t]);
            for (int c : cols) {
                if (c >= 0 && std::isfinite((*r)[c])) {
                    lo = std::min(lo, (*r)[c]);
                    hi = std::max(hi, (*r)[c]);
                }
            }
            if (c_fd >= 0 && std::isfinite((*r)[c_fd])) {
                lo = std::min(lo, (*r)[c_fd]);
                hi = std::max(hi, (*r)[c_fd]);
            }
        }
        if (!std::isfinite(lo)) {
            lo = -1.0;
            hi = 1.0;
        }
        auto [y0, y1] = padded_range(lo, hi);
        Panel p{80.0, top, 640.0, panel_h, t_lo, t_hi > t_lo ? t_hi : t_lo + 1.0, y0, y1};
        p.frame(svg, "time (fs)", "rate (rad / au)",
                "EMF breakdown, loop radius " + (c_r >= 0 ? fmt((*rows.front())[c_r]) : std::string("?")) + " a0");
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (cols[k] < 0) continue;
            std::vector<std::pair<double, double>> pts;
            for (const auto* r : rows) {
                if (std::isfinite((*r)[cols[k]])) pts.emplace_back(p.px((*r)[c_t]), p.py((*r)[cols[k]]));
            }
            svg.polyline(pts, k == 3 ? "black" : palette[k], k == 3 ? 2.0 : 1.2);
            svg.text(p.left + 8 + 90.0 * k, top + 14, labels[k], "start", 10);
            svg.line(p.left + 8 + 90.0 * k + 55, top + 10, p.left + 8 + 90.0 * k + 80, top + 10,
                     k == 3 ? "black" : palette[k], 2.0);
        }
        if (c_fd >= 0) {
            for (const auto* r : rows) {
                const double x = p.px((*r)[c_t]), y = p.py((*r)[c_fd]);
                if (p.inside(x, y)) svg.circle(x, y, 2.5, "#ff7f0e");
            }
            svg.text(p.left + p.width - 4, top + 14, "dots: finite-difference rate", "end", 10);
        } else {
            warnings.push_back("emf.csv has no fd_rate_per_au column; dots skipped");
        }
        top += panel_h + gap;
    }
    svg.save(file);
    return true;
}

std::string ramp(double u) {
    u = std::clamp(u, 0.0, 1.0);
    // dark blue -> teal -> yellow
    const double r = u < 0.5 ? 40 + u * 2 * (30 - 40) : 30 + (u - 0.5) * 2 * (250 - 30);
    const double g = u < 0.5 ? 20 + u * 2 * (150 - 20) : 150 + (u - 0.5) * 2 * (230 - 150);
    const double b = u < 0.5 ? 90 + u * 2 * (140 - 90) : 140 + (u - 0.5) * 2 * (40 - 140);
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(r), static_cast<int>(g),
                  static_cast<int>(b));
    return buf;
}

void plot_density(const fs::path& stem, const fs::path& file) {
    double t_au = 0.0;
    const SpinorField state = read_spinor_snapshot(stem, &t_au);
    const Grid2D& g = state.grid;
    const std::size_t cells = 128;
    const std::size_t bx = std::max<std::size_t>(1, g.n_x() / cells);
    const std::size_t by = std::max<std::size_t>(1, g.n_y() / cells);
    const std::size_t nx = g.n_x() / bx, ny = g.n_y() / by;
    std::vector<double> n(nx * ny, 0.0);
    double n_max = 0.0;
    for (std::size_t i = 0; i < nx * bx; ++i) {
        for (std::size_t j = 0; j < ny * by; ++j) {
            const std::size_t k = g.index(i, j);
            const double d = std::norm(state.psi1[k]) + std::norm(state.psi2[k]);
            n[(i / bx) * ny + j / by] += d / static_cast<double>(bx * by);
        }
    }
    for (double v : n) n_max = std::max(n_max, v);

    const double size = 480.0;
    Svg svg(size + 140.0, size + 100.0);
    Panel p{80.0, 40.0, size, size, g.point(0, 0).x, g.point(g.n_x() - 1, 0).x + g.dx(),
            g.point(0, 0).y, g.point(0, g.n_y() - 1).y + g.dy()};
    const double cw = size / static_cast<double>(nx), ch = size / static_cast<double>(ny);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            const double u = n_max > 0.0 ? n[i * ny + j] / n_max : 0.0;
            svg.rect(p.left + i * cw, p.top + size - (j + 1) * ch, cw + 0.3, ch + 0.3, ramp(u));
        }
    }
    p.frame(svg, "x (a0)", "y (a0)",
            "density at t = " + fmt(t_au * units::au_time_to_fs, "%.1f") + " fs (max " +
                fmt(n_max, "%.3g") + " a0^-2)");
    for (int k = 0; k <= 10; ++k) {
        svg.rect(p.left + size + 20, p.top + size - (k + 1) * size / 11.0, 20, size / 11.0 + 0.3,
                 ramp(k / 10.0));
    }
    svg.text(p.left + size + 30, p.top - 8, "n / max", "middle", 10);
    svg.save(file);
}

}  // namespace

PlotResult plot_run(const fs::path& run_dir, const PlotOptions& options) {
    PlotResult result;
    Table phase, emf;
    const bool has_phase = read_table(run_dir / "phase.csv", phase);
    const bool has_emf = read_table(run_dir / "emf.csv", emf);
    const auto snaps = list_snapshots(run_dir);
    if (!has_phase && !has_emf && snaps.empty()) {
        throw PlotError("nothing to plot in " + run_dir.string() +
                        ": no phase.csv, emf.csv or snapshots");
    }
    const fs::path out = options.output_dir.empty() ? run_dir / "plots" : options.output_dir;
    fs::create_directories(out);

    if (!has_phase) {
        result.warnings.push_back("phase.csv missing or empty; phase plot skipped");
    } else if (plot_phase(phase, options, out / "phase.svg", result.warnings)) {
        result.written.push_back(out / "phase.svg");
    }
    if (!has_emf) {
        result.warnings.push_back("emf.csv missing or empty; EMF plot skipped");
    } else if (plot_emf(emf, out / "emf.svg", result.warnings)) {
        result.written.push_back(out / "emf.svg");
    }
    if (snaps.empty()) {
        result.warnings.push_back("no snapshots; density heatmaps skipped");
    } else {
        std::vector<std::pair<double, fs::path>> timed;
        for (const auto& s : snaps) timed.emplace_back(read_snapshot_header(s).time_au * units::au_time_to_fs, s);
        std::vector<fs::path> done;
        for (double want : options.density_fs) {
            const auto best = std::min_element(timed.begin(), timed.end(), [&](const auto& a, const auto& b) {
                return std::abs(a.first - want) < std::abs(b.first - want);
            });
            if (std::abs(best->first - want) > 1.0) {
                result.warnings.push_back("no snapshot within 1 fs of " + fmt(want) + " fs; nearest is " +
                                          fmt(best->first, "%.2f") + " fs");
            }
            if (std::find(done.begin(), done.end(), best->second) != done.end()) continue;
            done.push_back(best->second);
            const fs::path file = out / ("density_" + fmt(best->first, "%.1f") + "fs.svg");
            plot_density(best->second, file);
            result.written.push_back(file);
        }
    }
    return result;
}

void write_precision_svg(const fs::path& file, const RoundTripReport& report, double epsilon_th) {
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo, y_lo = x_lo, y_hi = -x_lo;
    for (const auto& s : report.samples) {
        if (!(s.density > 0.0) || !(s.squared_error > 0.0)) continue;
        x_lo = std::min(x_lo, std::log10(s.density));
        x_hi = std::max(x_hi, std::log10(s.density));
        y_lo = std::min(y_lo, std::log10(s.squared_error));
        y_hi = std::max(y_hi, std::log10(s.squared_error));
    }
    if (!std::isfinite(x_lo)) {
        x_lo = -40;
        x_hi = 0;
        y_lo = -35;
        y_hi = -25;
    }
    if (epsilon_th > 0.0) {
        x_lo = std::min(x_lo, std::log10(epsilon_th));
        x_hi = std::max(x_hi, std::log10(epsilon_th));
    }
    auto [xa, xb] = padded_range(std::floor(x_lo), std::ceil(x_hi));
    auto [ya, yb] = padded_range(std::floor(y_lo), std::ceil(y_hi));
    Svg svg(760.0, 520.0);
    Panel p{90.0, 40.0, 620.0, 400.0, xa, xb, ya, yb, true, true};
    p.frame(svg, "density (a0^-2)", "squared round-trip error of s",
            "FFT round trip, " + std::to_string(report.trips) + " trip(s)");
    // Thin out dense scatters deterministically to keep files small.
    const std::size_t stride = std::max<std::size_t>(1, report.samples.size() / 20000);
    for (std::size_t i = 0; i < report.samples.size(); i += stride) {
        const auto& s = report.samples[i];
        if (!(s.density > 0.0) || !(s.squared_error > 0.0)) continue;
        svg.circle(p.px(s.density), p.py(s.squared_error), 1.2, "#1f77b4");
    }
    if (epsilon_th > 0.0) {
        const double x = p.px(epsilon_th);
        svg.line(x, p.top, x, p.top + p.height, "#d62728", 2.0, "6,3");
        svg.text(x + 4, p.top + 14, "threshold " + fmt(epsilon_th, "%.0e"), "start", 11);
    }
    svg.save(file);
}

}  // namespace geophase
