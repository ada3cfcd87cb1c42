// plot.hpp - SVG figures from a run directory
//
//   phase.svg            loop phase (units of pi) against time, one panel per radius,
//                        with vertical reference lines
//   emf.svg              EMF components, their sum and the finite-difference phase rate
//   density_<t>fs.svg    density heatmaps from the snapshots nearest the requested times

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "geophase/spectral.hpp"

namespace geophase {

class PlotError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PlotOptions {
    std::filesystem::path output_dir;  // empty: <run_dir>/plots
    std::vector<double> reference_fs{0.0, 75.0, 240.0};
    std::vector<double> density_fs{0.0, 75.0, 240.0};
};

struct PlotResult {
    std::vector<std::filesystem::path> written;
    std::vector<std::string> warnings;
};

// Missing series are skipped with a warning; throws PlotError when nothing at all can be
// drawn (no files are created in that case).
PlotResult plot_run(const std::filesystem::path& run_dir, const PlotOptions& options = {});

// Log-log scatter of squared round-trip error against density with a vertical line at
// the density threshold.
void write_precision_svg(const std::filesystem::path& file, const RoundTripReport& report,
                         double epsilon_th);

}  // namespace geophase
