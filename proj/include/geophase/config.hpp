// config.hpp - run configuration (INI-style sections of key = value)
//
//   [model]       mass_amu, omega_x, omega_y, kappa_x, kappa_y, gauge, init_kind
//   [grid]        n_x, n_y, length_x, length_y   (n and length set both axes)
//   [propagator]  dt, t_final_fs, max_norm_drift, max_edge_density
//   [paths]       radii, emf_radii, n_points, emf_points, emf_max_turn, sampling, pole_delta
//   [fields]      epsilon_th, emf_form
//   [cadence]     phase_au, emf_au, fd_span_au, observables_au, snapshot_au, checkpoint_au
//   [output]      directory
//
// Cadences are in atomic time units and must be integer multiples of dt. EMF rows compare the
// circulations with the loop phase rate from propagating the sampled state by +-fd_span_au
// (any positive span; substeps never exceed dt).

#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "geophase/emf.hpp"
#include "geophase/geometry.hpp"
#include "geophase/model.hpp"

namespace geophase {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    ModelParams model;

    std::size_t n_x = 256;
    std::size_t n_y = 256;
    double length_x = 20.0;
    double length_y = 20.0;

    double dt = 0.25;
    double t_final_fs = 120.0;
    double max_norm_drift = 1e-8;
    double max_edge_density = 1e-14;

    std::vector<double> radii{2.0, 2.5, 3.0};
    std::vector<double> emf_radii{1.0};
    std::size_t n_points = 512;
    // Minimum points on each EMF circle; the circle is evaluated exactly and resampled in
    // angle, doubling the count until neighbouring polarizations differ by <= emf_max_turn.
    std::size_t emf_points = 8192;
    double emf_max_turn = 0.05;
    Sampling sampling = Sampling::Bilinear;
    double pole_delta = 0.05;

    double epsilon_th = default_epsilon_th;
    EmfForm emf_form = EmfForm::Reduced;

    double phase_au = 1.0;
    double emf_au = 41.25;
    double fd_span_au = 1e-3;
    double observables_au = 10.0;
    double snapshot_au = 400.0;
    double checkpoint_au = 1000.0;

    std::filesystem::path output_dir = "run";

    Grid2D grid() const;
    std::size_t n_steps() const;
    // Number of steps in a cadence given in atomic units.
    std::size_t steps_for(double au) const;
    // Phase-tracked loops: radii followed by any emf_radii not already listed.
    std::vector<double> tracked_radii() const;

    // Throws ConfigError describing the first violated constraint.
    void validate() const;

    // Normalized INI text of every setting except the output directory.
    std::string canonical() const;
    // SHA-256 (hex) of canonical().
    std::string hash() const;
};

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& file);

std::string to_string(Gauge g);
std::string to_string(InitKind k);
std::string to_string(Sampling s);
std::string to_string(EmfForm f);

}  // namespace geophase
