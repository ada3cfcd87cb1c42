#include "geophase/run.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "geophase/circle.hpp"
#include "geophase/emf.hpp"
#include "geophase/fields.hpp"
#include "geophase/geometry.hpp"
#include "geophase/propagator.hpp"
#include "geophase/snapshot.hpp"

#ifndef GEOPHASE_VERSION
#define GEOPHASE_VERSION "unknown"
#endif

namespace geophase {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string library_version() { return GEOPHASE_VERSION; }
std::string fftw_version_string() { return ::fftw_version; }

namespace {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double number_from(const json& j) { return j.is_null() ? nan_value : j.get<double>(); }

const char* phase_header =
    "time_au,time_fs,path_id,R_a0,gamma_over_pi_sformula,gamma_over_pi_momentum,coverage_fraction\n";
const char* emf_header =
    "time_au,time_fs,path_id,R_a0,e_nbo_per_au,e_el_per_au,e_mag_per_au,e_total_per_au,"
    "fd_rate_per_au,coverage_fraction,loop_points\n";
const char* observables_header =
    "time_au,time_fs,norm_dimless,energy_hartree,kinetic_hartree,potential_hartree,"
    "pop_lower_dimless,pop_upper_dimless,edge_density_per_a0sq\n";

struct Loop {
    int id = 0;
    double radius = 0.0;
    LoopPath path;
    bool emf = false;
};

struct PhaseSample {
    double gamma_s = nan_value;
    double gamma_m = nan_value;
    double coverage = 0.0;
};

// Appends rows and remembers byte offsets for checkpoint truncation.
class CsvFile {
public:
    void open(const fs::path& file, const char* header, bool append_from, std::uintmax_t size) {
        path_ = file;
        if (append_from) {
            if (!fs::exists(file)) throw ConfigError("resume: missing " + file.string());
            fs::resize_file(file, size);
            out_.open(file, std::ios::app | std::ios::binary);
        } else {
            out_.open(file, std::ios::trunc | std::ios::binary);
            out_ << header;
        }
        if (!out_) throw std::runtime_error("cannot write " + file.string());
    }
    std::ofstream& out() { return out_; }
    std::uintmax_t flush_size() {
        out_.flush();
        return static_cast<std::uintmax_t>(out_.tellp());
    }

private:
    fs::path path_;
    std::ofstream out_;
};

void write_manifest(const fs::path& dir, const RunConfig& c, const std::string& status,
                    std::size_t steps_done, const std::string& reason) {
    const Grid2D g = c.grid();
    json m;
    m["program"] = "geophase";
    m["library_version"] = library_version();
    m["fftw_version"] = fftw_version_string();
    m["config_hash_sha256"] = c.hash();
    m["config"] = c.canonical();
    m["grid"] = {{"n_x", g.n_x()}, {"n_y", g.n_y()}, {"length_x_a0", g.length_x()},
                 {"length_y_a0", g.length_y()}, {"dx_a0", g.dx()}, {"dy_a0", g.dy()}};
    m["constants"] = {{"hbar_au", units::hbar},
                      {"electron_masses_per_amu", units::amu_to_au},
                      {"fs_per_au_time", units::au_time_to_fs},
                      {"mass_au", c.model.mass()}};
    m["time"] = {{"dt_au", c.dt}, {"steps_total", c.n_steps()}, {"steps_completed", steps_done}};
    m["status"] = status;
    if (!reason.empty()) m["abort_reason"] = reason;
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    out << m.dump(2) << '\n';
}

void push_vec3(FieldBundle& bundle, const std::string& name, const Vec3Field& f) {
    RealField x(f.size()), y(f.size()), z(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        x[k] = f[k].x;
        y[k] = f[k].y;
        z[k] = f[k].z;
    }
    bundle[name + "_x"] = std::move(x);
    bundle[name + "_y"] = std::move(y);
    bundle[name + "_z"] = std::move(z);
}

Vec3Field pull_vec3(const FieldBundle& bundle, const std::string& name) {
    const RealField& x = bundle.at(name + "_x");
    const RealField& y = bundle.at(name + "_y");
    const RealField& z = bundle.at(name + "_z");
    Vec3Field f(x.size());
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = Vec3{x[k], y[k], z[k]};
    return f;
}

std::string snapshot_name(std::size_t step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "psi_%09zu", step);
    return buf;
}

// Largest step <= dt that divides the finite-difference span.
double fd_substep(const RunConfig& c) {
    return c.fd_span_au / std::ceil(c.fd_span_au / c.dt - 1e-9);
}

// The run loop and its bookkeeping. Every event happens at an integer step; the state
// is advanced between consecutive event steps with merged half-kinetic factors.
class Runner {
public:
    Runner(const RunConfig& c, const RunOptions& o)
        : c_(c), opt_(o), grid_(c.grid()), prop_(c.model, grid_, c.dt),
          fd_forward_(c.model, grid_, fd_substep(c)), fd_backward_(c.model, grid_, -fd_substep(c)),
          tracker_(grid_, c.model.mass(), c.epsilon_th, initial_field_seeds(c.model, grid_)),
          state_(initial_state(c.model, grid_)) {
        prop_.max_norm_drift = c.max_norm_drift;
        const auto radii = c.tracked_radii();
        for (std::size_t i = 0; i < radii.size(); ++i) {
            Loop l;
            l.id = static_cast<int>(i);
            l.radius = radii[i];
            l.path = make_circle(grid_, radii[i], c.n_points, c.sampling);
            l.emf = std::find(c.emf_radii.begin(), c.emf_radii.end(), radii[i]) != c.emf_radii.end();
            loops_.push_back(std::move(l));
        }
        for (const Loop& l : loops_) {
            if (l.emf) emf_loops_.push_back(static_cast<std::size_t>(l.id));
        }
        last_.assign(loops_.size(), PhaseSample{});
        k_phase_ = c.steps_for(c.phase_au);
        k_emf_ = c.steps_for(c.emf_au);
        k_obs_ = c.steps_for(c.observables_au);
        k_snap_ = c.steps_for(c.snapshot_au);
        k_ckpt_ = c.steps_for(c.checkpoint_au);
    }

    RunSummary run() {
        dir_ = c_.output_dir;
        fs::create_directories(dir_ / "snapshots");
        fs::create_directories(dir_ / "checkpoint");
        std::size_t step = 0;
        const bool resuming = opt_.resume && fs::exists(dir_ / "checkpoint" / "meta.json");
        if (resuming) {
            step = restore();
        } else {
            for (const auto& e : fs::directory_iterator(dir_ / "snapshots")) fs::remove(e.path());
            for (const auto& e : fs::directory_iterator(dir_ / "checkpoint")) fs::remove(e.path());
            phase_.open(dir_ / "phase.csv", phase_header, false, 0);
            emf_.open(dir_ / "emf.csv", emf_header, false, 0);
            obs_.open(dir_ / "observables.csv", observables_header, false, 0);
        }
        write_manifest(dir_, c_, "running", step, "");

        RunSummary summary;
        summary.directory = dir_;
        summary.resumed_from_step = step;
        const std::size_t n = c_.n_steps();
        try {
            bool skip_events = resuming;
            while (true) {
                if (!skip_events) events(step, n);
                skip_events = false;
                if (step >= n) break;
                const std::size_t next = next_event(step, n);
                prop_.advance(state_, next - step);
                step = next;
            }
        } catch (const NumericalAbort& e) {
            flush_all();
            write_manifest(dir_, c_, "aborted", step, e.what());
            throw;
        }
        flush_all();
        write_manifest(dir_, c_, "complete", n, "");
        summary.steps = n;
        summary.final_time_au = static_cast<double>(n) * c_.dt;
        summary.max_plus_population = max_plus_;
        summary.max_edge_density = max_edge_;
        return summary;
    }

private:
    double time_of(std::size_t step) const { return static_cast<double>(step) * c_.dt; }

    std::size_t next_event(std::size_t s, std::size_t n) const {
        std::size_t next = n;
        for (std::size_t k : {k_phase_, k_emf_, k_obs_, k_snap_, k_ckpt_}) {
            next = std::min(next, (s / k + 1) * k);
        }
        return next;
    }

    void events(std::size_t s, std::size_t n) {
        const bool at_end = s == n;
        if (s % k_phase_ == 0 || at_end) phases(s);
        if (s % k_emf_ == 0 && !emf_loops_.empty()) emf(s);
        if (s % k_obs_ == 0 || at_end) observables_row(s);
        if (s % k_snap_ == 0 || at_end) {
            write_spinor_snapshot(dir_ / "snapshots" / snapshot_name(s), state_, time_of(s),
                                  {{"step", std::to_string(s)},
                                   {"time_fs", g17(time_of(s) * units::au_time_to_fs)}});
        }
        if (s > 0 && s % k_ckpt_ == 0 && !at_end) checkpoint(s);
    }

    void phases(std::size_t s) {
        tracker_.update_polarization(sigma_and_density(state_));
        const auto& pol = tracker_.polarization();
        BlochLoopOptions bopt;
        bopt.pole_delta = c_.pole_delta;

        std::vector<std::future<PhaseSample>> jobs;
        for (const Loop& l : loops_) {
            jobs.push_back(std::async(std::launch::async, [&, path = &l.path] {
                PhaseSample p;
                try {
                    const auto rs = loop_phase_from_s(pol, grid_, *path, false, bopt);
                    p.gamma_s = rs.gamma;
                    p.coverage = rs.coverage;
                } catch (const PathError&) {
                    p.coverage = coverage(grid_, pol.valid, *path);
                }
                p.gamma_m = path_phase_from_increments(state_, pol.valid, *path).gamma;
                return p;
            }));
        }
        const double t = time_of(s);
        auto& out = phase_.out();
        for (std::size_t i = 0; i < loops_.size(); ++i) {
            PhaseSample p = jobs[i].get();
            if (std::isfinite(last_[i].gamma_s) && std::isfinite(p.gamma_s)) {
                p.gamma_s = unwrap_near(p.gamma_s, last_[i].gamma_s);
            }
            if (std::isfinite(last_[i].gamma_m) && std::isfinite(p.gamma_m)) {
                p.gamma_m = unwrap_near(p.gamma_m, last_[i].gamma_m);
            }
            if (std::isfinite(p.gamma_s)) last_[i].gamma_s = p.gamma_s;
            if (std::isfinite(p.gamma_m)) last_[i].gamma_m = p.gamma_m;
            out << g17(t) << ',' << g17(t * units::au_time_to_fs) << ',' << loops_[i].id << ','
                << g17(loops_[i].radius) << ',' << g17(p.gamma_s / std::numbers::pi) << ','
                << g17(p.gamma_m / std::numbers::pi) << ',' << g17(p.coverage) << '\n';
        }
    }

    // EMF breakdown on each EMF circle, with the phase rate from short propagations of the
    // current state by +-fd_span.
    void emf(std::size_t s) {
        const double h = c_.fd_span_au;
        const auto substeps = static_cast<std::size_t>(std::ceil(h / c_.dt - 1e-9));
        SpinorField after = state_;
        SpinorField before = state_;
        fd_forward_.advance(after, substeps);
        fd_backward_.advance(before, substeps);

        CircleEmfOptions opt;
        opt.min_points = c_.emf_points;
        opt.max_turn = c_.emf_max_turn;
        opt.form = c_.emf_form;
        opt.epsilon_th = c_.epsilon_th;
        opt.loop.pole_delta = c_.pole_delta;
        std::vector<std::future<EmfBreakdown>> jobs;
        for (std::size_t e : emf_loops_) {
            jobs.push_back(std::async(std::launch::async, [&, r = loops_[e].radius] {
                return circle_emf_balance(c_.model, prop_.ops(), before, state_, after, h, {}, r, opt);
            }));
        }
        const double t = time_of(s);
        for (std::size_t e = 0; e < emf_loops_.size(); ++e) {
            const EmfBreakdown b = jobs[e].get();
            const Loop& l = loops_[emf_loops_[e]];
            emf_.out() << g17(t) << ',' << g17(t * units::au_time_to_fs) << ',' << l.id << ','
                       << g17(l.radius) << ',' << g17(b.e_nbo) << ',' << g17(b.e_el) << ','
                       << g17(b.e_mag) << ',' << g17(b.e_total) << ',' << g17(b.fd_rate) << ','
                       << g17(b.coverage) << ',' << b.loop_points << '\n';
        }
    }

    void observables_row(std::size_t s) {
        const auto o = observables(prop_.ops(), c_.model, state_);
        const auto pops = adiabatic_populations(c_.model, state_);
        const double edge = edge_density(state_);
        max_plus_ = std::max(max_plus_, pops.plus);
        max_edge_ = std::max(max_edge_, edge);
        const double t = time_of(s);
        obs_.out() << g17(t) << ',' << g17(t * units::au_time_to_fs) << ',' << g17(o.norm) << ','
                   << g17(o.energy) << ',' << g17(o.kinetic) << ',' << g17(o.potential) << ','
                   << g17(pops.minus) << ',' << g17(pops.plus) << ',' << g17(edge) << '\n';
        if (!std::isfinite(o.norm) || !std::isfinite(o.energy)) {
            throw NumericalAbort("non-finite observables at t = " + g17(t) + " au");
        }
        if (edge > c_.max_edge_density) {
            throw NumericalAbort("box leak: edge density " + g17(edge) + " exceeds " +
                                 g17(c_.max_edge_density) + " at t = " +
                                 g17(t * units::au_time_to_fs) + " fs");
        }
    }

    void flush_all() {
        phase_.out().flush();
        emf_.out().flush();
        obs_.out().flush();
    }

    void checkpoint(std::size_t s) {
        const fs::path cp = dir_ / "checkpoint";
        write_spinor_snapshot(cp / "state", state_, time_of(s));
        FieldBundle bundle;
        push_vec3(bundle, "s", tracker_.polarization().s);
        write_field_bundle(cp / "fields", grid_, bundle, time_of(s));

        json m;
        m["step"] = s;
        m["config_hash_sha256"] = c_.hash();
        m["csv_bytes"] = {{"phase", phase_.flush_size()},
                          {"emf", emf_.flush_size()},
                          {"observables", obs_.flush_size()}};
        json last = json::array();
        for (const auto& l : last_) last.push_back({number_or_null(l.gamma_s), number_or_null(l.gamma_m)});
        m["last_gamma"] = last;
        m["max_plus_population"] = max_plus_;
        m["max_edge_density"] = max_edge_;
        // Written last: a checkpoint counts only once its metadata exists.
        const fs::path tmp = cp / "meta.json.tmp";
        {
            std::ofstream out(tmp, std::ios::trunc);
            out << m.dump(1) << '\n';
        }
        fs::rename(tmp, cp / "meta.json");
        write_manifest(dir_, c_, "running", s, "");
        if (opt_.log) {
            *opt_.log << "checkpoint t = " << g17(time_of(s) * units::au_time_to_fs)
                      << " fs, step " << s << '/' << c_.n_steps() << '\n';
        }
    }

    std::size_t restore() {
        const fs::path cp = dir_ / "checkpoint";
        json m;
        {
            std::ifstream in(cp / "meta.json");
            m = json::parse(in);
        }
        if (m.at("config_hash_sha256").get<std::string>() != c_.hash()) {
            throw ConfigError("resume: the configuration differs from the one that wrote " +
                              cp.string());
        }
        const auto s = m.at("step").get<std::size_t>();
        state_ = read_spinor_snapshot(cp / "state");
        if (!(state_.grid == grid_)) throw ConfigError("resume: checkpoint grid mismatch");
        const FieldBundle bundle = read_field_bundle(cp / "fields");
        tracker_.polarization().s = pull_vec3(bundle, "s");
        const auto& bytes = m.at("csv_bytes");
        phase_.open(dir_ / "phase.csv", phase_header, true, bytes.at("phase").get<std::uintmax_t>());
        emf_.open(dir_ / "emf.csv", emf_header, true, bytes.at("emf").get<std::uintmax_t>());
        obs_.open(dir_ / "observables.csv", observables_header, true,
                  bytes.at("observables").get<std::uintmax_t>());
        const auto& last = m.at("last_gamma");
        for (std::size_t i = 0; i < last_.size() && i < last.size(); ++i) {
            last_[i].gamma_s = number_from(last[i][0]);
            last_[i].gamma_m = number_from(last[i][1]);
        }
        max_plus_ = m.at("max_plus_population").get<double>();
        max_edge_ = m.at("max_edge_density").get<double>();
        if (opt_.log) *opt_.log << "resuming from step " << s << '\n';
        return s;
    }

    const RunConfig& c_;
    const RunOptions& opt_;
    Grid2D grid_;
    SplitOperator prop_;
    SplitOperator fd_forward_;
    SplitOperator fd_backward_;
    FieldTracker tracker_;
    SpinorField state_;
    std::vector<Loop> loops_;
    std::vector<std::size_t> emf_loops_;  // indices into loops_
    std::vector<PhaseSample> last_;
    std::size_t k_phase_ = 1, k_emf_ = 1, k_obs_ = 1, k_snap_ = 1, k_ckpt_ = 1;
    double max_plus_ = 0.0;
    double max_edge_ = 0.0;
    fs::path dir_;
    CsvFile phase_, emf_, obs_;
};

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j);
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

RunSummary run_simulation(const RunConfig& config, const RunOptions& options) {
    config.validate();
    Runner runner(config, options);
    return runner.run();
}

RunConfig config_from_run(const fs::path& run_dir) {
    std::ifstream in(run_dir / "manifest.json");
    if (!in) throw ConfigError("no manifest.json in " + run_dir.string());
    json m;
    try {
        m = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("unreadable manifest.json: " + std::string(e.what()));
    }
    std::istringstream text(m.at("config").get<std::string>());
    RunConfig c = parse_config(text);
    c.output_dir = run_dir;
    return c;
}

std::vector<fs::path> list_snapshots(const fs::path& run_dir) {
    std::vector<std::pair<double, fs::path>> found;
    const fs::path dir = run_dir / "snapshots";
    if (!fs::is_directory(dir)) return {};
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() != ".hdr") continue;
        fs::path stem = e.path();
        stem.replace_extension();
        const auto h = read_snapshot_header(stem);
        if (h.kind == "spinor") found.emplace_back(h.time_au, stem);
    }
    std::sort(found.begin(), found.end());
    std::vector<fs::path> out;
    for (auto& [t, p] : found) out.push_back(std::move(p));
    return out;
}

fs::path recompute_phases(const fs::path& run_dir, const RecomputeOptions& options) {
    const RunConfig c = config_from_run(run_dir);
    const auto snaps = list_snapshots(run_dir);
    if (snaps.empty()) throw std::runtime_error("no snapshots in " + (run_dir / "snapshots").string());
    const Grid2D grid = c.grid();
    const std::vector<double> radii = options.radii.empty() ? c.tracked_radii() : options.radii;
    const std::size_t n_points = options.n_points ? options.n_points : c.n_points;
    std::vector<LoopPath> paths;
    for (double r : radii) {
        paths.push_back(make_circle(grid, r, n_points, c.sampling));
        check_resolution(paths.back(), grid);
    }
    FieldTracker tracker(grid, c.model.mass(), c.epsilon_th, initial_field_seeds(c.model, grid));
    BlochLoopOptions bopt;
    bopt.pole_delta = c.pole_delta;

    const fs::path file = options.output.empty() ? run_dir / "phase_from_snapshots.csv" : options.output;
    std::ofstream out(file, std::ios::trunc | std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << phase_header;
    std::vector<double> last_s(paths.size(), nan_value), last_m(paths.size(), nan_value);
    for (const auto& stem : snaps) {
        double t = 0.0;
        const SpinorField state = read_spinor_snapshot(stem, &t);
        if (!(state.grid == grid)) throw std::runtime_error("snapshot grid mismatch: " + stem.string());
        tracker.update_polarization(sigma_and_density(state));
        const auto& pol = tracker.polarization();
        for (std::size_t i = 0; i < paths.size(); ++i) {
            double gs = nan_value;
            double cov = 0.0;
            try {
                const auto rs = loop_phase_from_s(pol, grid, paths[i], false, bopt);
                gs = rs.gamma;
                cov = rs.coverage;
            } catch (const PathError&) {
                cov = coverage(grid, pol.valid, paths[i]);
            }
            double gm = path_phase_from_increments(state, pol.valid, paths[i]).gamma;
            if (std::isfinite(gs) && std::isfinite(last_s[i])) gs = unwrap_near(gs, last_s[i]);
            if (std::isfinite(gm) && std::isfinite(last_m[i])) gm = unwrap_near(gm, last_m[i]);
            if (std::isfinite(gs)) last_s[i] = gs;
            if (std::isfinite(gm)) last_m[i] = gm;
            out << g17(t) << ',' << g17(t * units::au_time_to_fs) << ',' << i << ',' << g17(radii[i])
                << ',' << g17(gs / std::numbers::pi) << ',' << g17(gm / std::numbers::pi) << ','
                << g17(cov) << '\n';
        }
    }
    return file;
}

double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) return nan_value;
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    const double mean = 0.5 * static_cast<double>(a.size() - 1);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = ra[i] - mean;
        const double db = rb[i] - mean;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    return (saa > 0.0 && sbb > 0.0) ? sab / std::sqrt(saa * sbb) : nan_value;
}

PrecisionResult diagnose_precision(const RunConfig& config, const fs::path& csv, std::size_t trips) {
    const Grid2D grid = config.grid();
    const SpinorField state = initial_state(config.model, grid);
    const SpectralOps ops(grid);
    PrecisionResult r;
    r.report = fft_roundtrip_error(ops, state, config.epsilon_th, trips);
    r.csv = csv;
    std::vector<double> inv_density, err;
    inv_density.reserve(r.report.samples.size());
    err.reserve(r.report.samples.size());
    std::ofstream out(csv, std::ios::trunc | std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + csv.string());
    out << "density_per_a0sq,squared_error_dimless\n";
    for (const auto& s : r.report.samples) {
        out << g17(s.density) << ',' << g17(s.squared_error) << '\n';
        inv_density.push_back(-s.density);
        err.push_back(s.squared_error);
    }
    r.spearman = spearman_correlation(inv_density, err);
    return r;
}

}  // namespace geophase
