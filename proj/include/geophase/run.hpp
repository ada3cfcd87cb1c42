// run.hpp - run orchestration and the derived-output passes over a run directory
//
// A run directory holds
//   manifest.json     config hash and text, grid, constants, library versions, status
//   phase.csv         loop phases per tracked radius (s-formula and momentum circulation)
//   emf.csv           EMF breakdown on the emf radii with a central-difference phase rate
//   observables.csv   norm, energies, adiabatic populations, edge density
//   snapshots/        spinor snapshots every snapshot_au
//   checkpoint/       latest restart point (spinor, tracked fields, bookkeeping)

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "geophase/config.hpp"
#include "geophase/spectral.hpp"

namespace geophase {

std::string library_version();
std::string fftw_version_string();

struct RunOptions {
    bool resume = false;         // continue from checkpoint/ if present
    std::ostream* log = nullptr;  // progress lines
};

struct RunSummary {
    std::filesystem::path directory;
    std::size_t steps = 0;
    std::size_t resumed_from_step = 0;
    double final_time_au = 0.0;
    double max_plus_population = 0.0;
    double max_edge_density = 0.0;
};

// Throws ConfigError for invalid settings and NumericalAbort for norm drift, NaN or a
// box leak; the manifest records the abort reason before the exception propagates.
RunSummary run_simulation(const RunConfig& config, const RunOptions& options = {});

// Reads the config stored in a run manifest.
RunConfig config_from_run(const std::filesystem::path& run_dir);

// Spinor snapshot stems in a run directory ordered by time.
std::vector<std::filesystem::path> list_snapshots(const std::filesystem::path& run_dir);

struct RecomputeOptions {
    std::vector<double> radii;   // empty: the radii of the run config
    std::size_t n_points = 0;    // 0: as configured
    std::filesystem::path output; // empty: <run_dir>/phase_from_snapshots.csv
};

// Loop phases recomputed from the stored snapshots only. Values at unresolved nodes are
// frozen from the previous snapshot rather than from the run's finer phase cadence.
std::filesystem::path recompute_phases(const std::filesystem::path& run_dir,
                                       const RecomputeOptions& options = {});

struct PrecisionResult {
    RoundTripReport report;
    double spearman = 0.0;  // rank correlation of 1/density and squared error
    std::filesystem::path csv;
};

// FFT round trip on the initial state of `config`; writes density_per_a0sq,squared_error
// rows to `csv`. Nodes at or below epsilon_th are excluded (counted in the report).
PrecisionResult diagnose_precision(const RunConfig& config, const std::filesystem::path& csv,
                                   std::size_t trips = 1);

double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace geophase
