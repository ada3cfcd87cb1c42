// units.hpp - physical constants and unit conversions (atomic units, hbar = 1)

#pragma once

namespace geophase::units {

inline constexpr double hbar = 1.0;

// CODATA electron masses per unified atomic mass unit.
inline constexpr double amu_to_au = 1822.888486;

// 1 a.u. of time in femtoseconds.
inline constexpr double au_time_to_fs = 0.02418884;

// 1000 cm^-1 expressed in hartree (used for the default vibrational frequency).
inline constexpr double wavenumber_1000_in_au = 4.5563359e-3;

constexpr double fs_to_au(double t_fs) { return t_fs / au_time_to_fs; }
constexpr double au_to_fs(double t_au) { return t_au * au_time_to_fs; }

}  // namespace geophase::units
