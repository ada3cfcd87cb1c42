// snapshot.hpp - field snapshots: flat little-endian binary plus a text sidecar
//
//   <stem>.bin  row-major float64, little-endian. Spinors store psi1 then psi2,
//               each as interleaved (re, im) pairs; real fields store one value
//               per node.
//   <stem>.hdr  key = value lines: kind, n_x, n_y, length_x, length_y, time_au,
//               components, plus any extra entries supplied by the caller.

#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "geophase/grid.hpp"

namespace geophase {

struct SnapshotHeader {
    std::string kind;  // "spinor", "real" or "bundle"
    std::size_t n_x = 0;
    std::size_t n_y = 0;
    double length_x = 0.0;
    double length_y = 0.0;
    double time_au = 0.0;
    std::map<std::string, std::string> extra;
};

void write_spinor_snapshot(const std::filesystem::path& stem, const SpinorField& state,
                           double time_au, const std::map<std::string, std::string>& extra = {});
SpinorField read_spinor_snapshot(const std::filesystem::path& stem, double* time_au = nullptr);

void write_real_snapshot(const std::filesystem::path& stem, const Grid2D& grid,
                         const RealField& values, double time_au);
RealField read_real_snapshot(const std::filesystem::path& stem, Grid2D* grid = nullptr,
                             double* time_au = nullptr);

// Several named real fields of one grid in a single file ("bundle" kind); the header
// lists the names in storage order.
using FieldBundle = std::map<std::string, RealField>;
void write_field_bundle(const std::filesystem::path& stem, const Grid2D& grid,
                        const FieldBundle& fields, double time_au);
FieldBundle read_field_bundle(const std::filesystem::path& stem, double* time_au = nullptr);

SnapshotHeader read_snapshot_header(const std::filesystem::path& stem);

// x, y, re1, im1, re2, im2, density; intended for small grids.
void write_spinor_csv(const std::filesystem::path& file, const SpinorField& state);

}  // namespace geophase
