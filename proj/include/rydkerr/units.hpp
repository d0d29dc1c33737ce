#pragma once

// Internal conventions: energies in eV, intensities in mW/mm^2, crystal
// lengths in um, wavelengths in nm. SI appears only inside the field
// conversion and the n2 normalisation.

namespace rydkerr::units {

inline constexpr double hbar_c_eV_nm = 197.3269804;
inline constexpr double h_c_eV_nm = 1239.841984;
inline constexpr double speed_of_light = 299792458.0;       // m/s
inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F/m
inline constexpr double pi = 3.14159265358979323846;

// 1 mW/mm^2 = 1e3 W/m^2
inline constexpr double w_m2_per_mw_mm2 = 1e3;
inline constexpr double micro_eV = 1e-6;

/// Vacuum wave number in 1/um for a photon energy in eV.
constexpr double wavenumber_per_um(double energy_eV) {
  return energy_eV / hbar_c_eV_nm * 1e3;
}

constexpr double wavelength_nm(double energy_eV) { return h_c_eV_nm / energy_eV; }

}  // namespace rydkerr::units
