// geophase - command line front end
//
//   geophase run <config.ini> [--output DIR] [--resume]
//   geophase plot <run_dir> [--out DIR] [--reference-fs ...] [--density-fs ...]
//   geophase diagnose-precision <config.ini> [--csv FILE] [--svg FILE] [--trips N]
//   geophase phase <run_dir> [--radii ...] [--n-points N] [--output FILE]
//
// Exit codes: 0 ok, 2 configuration or input error, 3 numerical abort, 1 anything else.

#include <chrono>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "geophase/config.hpp"
#include "geophase/plot.hpp"
#include "geophase/propagator.hpp"
#include "geophase/run.hpp"

namespace fs = std::filesystem;
using namespace geophase;

namespace {

constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

int cmd_run(const fs::path& config_file, const fs::path& output, bool resume, bool quiet) {
    RunConfig c = load_config(config_file);
    if (!output.empty()) c.output_dir = output;
    RunOptions opt;
    opt.resume = resume;
    opt.log = quiet ? nullptr : &std::cerr;
    const auto t0 = std::chrono::steady_clock::now();
    const RunSummary s = run_simulation(c, opt);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("run complete: %s, %zu steps (%.3f fs), max upper population %.3e, "
                "max edge density %.3e, %.1f s wall\n",
                s.directory.c_str(), s.steps, s.final_time_au * units::au_time_to_fs,
                s.max_plus_population, s.max_edge_density, wall);
    return 0;
}

int cmd_plot(const fs::path& run_dir, const fs::path& out, const std::vector<double>& refs,
             const std::vector<double>& densities) {
    PlotOptions o;
    o.output_dir = out;
    if (!refs.empty()) o.reference_fs = refs;
    if (!densities.empty()) o.density_fs = densities;
    const PlotResult r = plot_run(run_dir, o);
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& f : r.written) std::printf("wrote %s\n", f.c_str());
    return 0;
}

int cmd_precision(const fs::path& config_file, fs::path csv, fs::path svg, std::size_t trips) {
    const RunConfig c = load_config(config_file);
    if (csv.empty()) csv = "precision.csv";
    if (svg.empty()) {
        svg = csv;
        svg.replace_extension(".svg");
    }
    const auto t0 = std::chrono::steady_clock::now();
    const PrecisionResult r = diagnose_precision(c, csv, trips);
    write_precision_svg(svg, r.report, c.epsilon_th);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%zu points (%zu excluded), rank correlation of error with 1/density %.4f, %.2f s\n",
                r.report.samples.size(), r.report.excluded, r.spearman, wall);
    std::printf("wrote %s\nwrote %s\n", csv.c_str(), svg.c_str());
    return 0;
}

int cmd_phase(const fs::path& run_dir, const std::vector<double>& radii, std::size_t n_points,
              const fs::path& output) {
    RecomputeOptions o;
    o.radii = radii;
    o.n_points = n_points;
    o.output = output;
    const fs::path file = recompute_phases(run_dir, o);
    std::printf("wrote %s\n", file.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geometric phase of a two-state wavepacket near a conical intersection"};
    app.require_subcommand(1);
    app.set_version_flag("--version", library_version());

    fs::path run_config, run_output;
    bool resume = false, quiet = false;
    auto* run = app.add_subcommand("run", "propagate and write phase, EMF and observable series");
    run->add_option("config", run_config, "INI configuration file")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--output", run_output, "output directory (overrides [output] directory)");
    run->add_flag("--resume", resume, "continue from the last checkpoint in the output directory");
    run->add_flag("-q,--quiet", quiet, "no progress lines");

    fs::path plot_dir, plot_out;
    std::vector<double> refs, densities;
    auto* plot = app.add_subcommand("plot", "SVG figures from a run directory");
    plot->add_option("run_dir", plot_dir, "run directory")->required();
    plot->add_option("--out", plot_out, "figure directory (default <run_dir>/plots)");
    plot->add_option("--reference-fs", refs, "vertical reference lines (fs)");
    plot->add_option("--density-fs", densities, "density snapshot times (fs)");

    fs::path prec_config, prec_csv, prec_svg;
    std::size_t trips = 1;
    auto* prec = app.add_subcommand("diagnose-precision", "FFT round-trip error against density");
    prec->add_option("config", prec_config, "INI configuration file")->required()->check(CLI::ExistingFile);
    prec->add_option("--csv", prec_csv, "scatter output (default precision.csv)");
    prec->add_option("--svg", prec_svg, "figure output (default next to the CSV)");
    prec->add_option("--trips", trips, "forward+inverse round trips")->check(CLI::PositiveNumber);

    fs::path phase_dir, phase_out;
    std::vector<double> phase_radii;
    std::size_t phase_points = 0;
    auto* phase = app.add_subcommand("phase", "recompute loop phases from stored snapshots");
    phase->add_option("run_dir", phase_dir, "run directory")->required();
    phase->add_option("--radii", phase_radii, "loop radii in a0 (default: as configured)");
    phase->add_option("--n-points", phase_points, "points per loop (default: as configured)");
    phase->add_option("-o,--output", phase_out, "CSV output (default <run_dir>/phase_from_snapshots.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        if (*run) return cmd_run(run_config, run_output, resume, quiet);
        if (*plot) return cmd_plot(plot_dir, plot_out, refs, densities);
        if (*prec) return cmd_precision(prec_config, prec_csv, prec_svg, trips);
        if (*phase) return cmd_phase(phase_dir, phase_radii, phase_points, phase_out);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return exit_config;
    } catch (const PlotError& e) {
        std::cerr << "plot: " << e.what() << '\n';
        return exit_config;
    } catch (const PathError& e) {
        std::cerr << "path error: " << e.what() << '\n';
        return exit_config;
    } catch (const NumericalAbort& e) {
        std::cerr << "numerical abort: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
