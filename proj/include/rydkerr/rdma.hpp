#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

#include "rydkerr/blockade.hpp"
#include "rydkerr/config.hpp"

// Closed-form RDMA optical response of the P exciton series.
//
// chi1(E)  = eps_b sum_n f_n1 Delta_LT / (E_Tn - E - i Gamma_n)
// chi3(E)  = -chi3_0 Es^2 sum_{n n'} F_{nn'} Gamma_n' E_Tn
//              / ([(E_Tn' - E)^2 + Gamma_n'^2] [E_Tn^2 - E^2 - 2i E Gamma_n])
// F_{nn'}  = (n'^2 - 1)(n^2 - 1) / n'^5 * (A / n^gamma + B / n^beta)
//
// Es is ExcitonSeriesConfig::chi3_energy_unit(); it makes the line-shape
// fraction dimensionless so chi3 carries the units of chi3_0. Both sums run
// over [n_min, n_max]; n is the index carrying the dispersive denominator,
// n' the index carrying the Lorentzian.

namespace rydkerr {

using complex = std::complex<double>;

double oscillator_strength(int n, const ExcitonSeriesConfig& cfg);
double coupling_strength(int n, int n_prime, const ExcitonSeriesConfig& cfg);

complex chi1(double energy, const ExcitonSeriesConfig& cfg);
complex chi1(double energy, const ExcitonSeriesConfig& cfg, const ResonanceState& lines);

complex chi3(double energy, const ExcitonSeriesConfig& cfg);
complex chi3(double energy, const ExcitonSeriesConfig& cfg, const ResonanceState& lines);

/// |E_prop|^2 [V^2/m^2] for an intensity in W/m^2.
double propagating_field_squared(double intensity_w_m2, const ExcitonSeriesConfig& cfg);

/// alpha3 [1/um] at in-crystal intensity `intensity` [mW/mm^2].
double nonlinear_absorption(double energy, double intensity, const ExcitonSeriesConfig& cfg,
                            const BlockadeMode& mode = {});
double linear_absorption(double energy, const ExcitonSeriesConfig& cfg);
/// exp(-alpha L) at vanishing intensity.
double transmission(double energy, const ExcitonSeriesConfig& cfg);

/// Incident intensity averaged over the crystal under linear absorption:
/// I (1 - exp(-L/z0)) z0 / L with z0 = 1/alpha.
double average_intensity(double energy, double incident, const ExcitonSeriesConfig& cfg);

enum class IntensityReference {
  incident,        // intensity at the crystal entrance; averaged internally
  crystal_average  // intensity already averaged over the crystal
};

/// Complex refractive index sqrt(eps_b + chi1 + |E_prop|^2 chi3), principal
/// branch. Blockade factors are evaluated at the incident intensity; the
/// field amplitude uses the crystal-averaged one.
complex total_index(double energy, double intensity, const ExcitonSeriesConfig& cfg,
                    const BlockadeMode& mode = {},
                    IntensityReference reference = IntensityReference::incident);

/// (omega L / c) Re[n(I) - n(0)] in rad.
double phase_shift(double energy, double intensity, const ExcitonSeriesConfig& cfg,
                   const BlockadeMode& mode = {},
                   IntensityReference reference = IntensityReference::incident);

/// Low-intensity Kerr coefficient [mm^2/mW] such that
/// phase_shift ~ k L n2 I for a crystal-averaged intensity I.
double kerr_coefficient(double energy, const ExcitonSeriesConfig& cfg);

struct SusceptibilitySpectrum {
  SpectralGrid grid;
  std::vector<complex> chi1;
  std::vector<complex> chi3;
};

SusceptibilitySpectrum susceptibility_spectrum(const SpectralGrid& grid,
                                               const ExcitonSeriesConfig& cfg);

struct KerrResponse {
  SpectralGrid grid;
  std::vector<double> n2;      // mm^2/mW
  std::vector<double> alpha3;  // 1/um at `absorption_intensity`
  double absorption_intensity = 0.0;
  std::vector<double> intensities;  // mW/mm^2
  std::vector<double> phase;        // rad, row-major [grid][intensity]

  double phase_shift(std::size_t energy_index, std::size_t intensity_index) const {
    return phase[energy_index * intensities.size() + intensity_index];
  }
};

KerrResponse n2_spectrum(const SpectralGrid& grid, const ExcitonSeriesConfig& cfg,
                         const std::vector<double>& intensities = {},
                         const BlockadeMode& mode = {}, double absorption_intensity = 0.0);

/// energy_eV,re_chi1,im_chi1,re_chi3,im_chi3,n2_mm2_per_mW,alpha3_per_um
void write_spectrum_csv(std::ostream& out, const SusceptibilitySpectrum& chi,
                        const KerrResponse& kerr);

}  // namespace rydkerr
