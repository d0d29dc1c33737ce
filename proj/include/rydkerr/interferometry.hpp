#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>

#include "rydkerr/curve.hpp"
#include "rydkerr/field_map.hpp"

namespace rydkerr {

struct BeamMap {
  ScalarFieldMap intensity;  // mW/mm^2
  double peak = 0.0;         // P / (2 pi sigma^2)
  bool grid_too_small = false;
};

/// Gaussian intensity profile P/(2 pi s^2) exp(-r^2 / 2 s^2) centred on pixel (w/2, h/2).
/// Power in mW, sigma in um. Flags grids narrower than 2 sigma.
BeamMap gaussian_beam(double power_mW, double sigma_um, const GridSpec& grid);

/// sqrt(intensity) exp(i phase), pixelwise.
ComplexFieldMap make_field(const ScalarFieldMap& amplitude_squared, const ScalarFieldMap& phase);

/// Fringe wave vector in rad/pixel.
struct Carrier {
  double kx = 0.0;
  double ky = 0.0;
};

/// Carrier of `period` pixels at `angle` rad from the x axis.
Carrier carrier_from_period(double period_px, double angle_rad = 0.0);

/// Distance of the carrier from DC in FFT bins on `grid`.
double carrier_bins(const Carrier& carrier, const GridSpec& grid);

/// |S exp(i k.r) + a exp(i c rho^2)|^2 with rho measured from the grid centre.
/// Throws SignalProcessingError if the carrier sits closer than 4 bins to DC.
ScalarFieldMap synthesize_interferogram(const ComplexFieldMap& signal, double ref_amplitude,
                                        const Carrier& carrier, double ref_curvature = 0.0);

struct NoiseModel {
  double intensity_jitter = 0.01;  // relative std of a global frame multiplier
  double read_noise = 0.0;         // absolute std per pixel
  double photons_per_unit = 0.0;   // > 0 enables shot noise at this photon scale
};

/// Adds noise in place; values are clipped at zero.
void add_noise(ScalarFieldMap& image, const NoiseModel& noise, std::mt19937_64& rng);

/// |FFT| with DC moved to pixel (w/2, h/2).
ScalarFieldMap spectrum_magnitude(const ScalarFieldMap& image);

/// Peak position in signed FFT bins relative to DC.
struct FrequencyBin {
  int fx = 0;
  int fy = 0;
  friend bool operator==(const FrequencyBin&, const FrequencyBin&) = default;
};

struct CarrierPeaks {
  FrequencyBin dc;
  FrequencyBin plus;   // fx > 0, or fx == 0 and fy > 0
  FrequencyBin minus;
  double threshold = 0.0;  // fraction of the global maximum at detection
  int steps = 0;
};

/// Lowers a binarisation threshold by 0.9 per step from the global maximum
/// until exactly three 8-connected components (DC and a conjugate pair) remain.
/// Input is a centred magnitude spectrum as returned by spectrum_magnitude.
CarrierPeaks locate_carrier_peaks(const ScalarFieldMap& magnitude);

struct DemodulationOptions {
  double window_radius = 0.0;  // bins; 0 means half the DC-to-sideband distance
  double edge_width = 4.0;     // raised-cosine taper in bins
  bool use_minus = false;      // demodulate from the conjugate sideband
  std::optional<CarrierPeaks> peaks;  // skip detection when given
};

struct Demodulated {
  ComplexFieldMap field;
  ScalarFieldMap phase;  // wrapped to (-pi, pi]
  CarrierPeaks peaks;
};

Demodulated demodulate(const ScalarFieldMap& interferogram, const DemodulationOptions& options = {});
ScalarFieldMap demodulate_phase(const ScalarFieldMap& interferogram, double window_radius = 0.0);

struct UnwrapResult {
  ScalarFieldMap phase;
  std::size_t residual_jumps = 0;  // adjacent pairs still differing by more than pi
};

/// Itoh unwrapping along each row from the centre column outwards, then the
/// rows are stitched through the centre column.
UnwrapResult unwrap_phase(const ScalarFieldMap& wrapped);

/// high - low.
ScalarFieldMap subtract_reference(const ScalarFieldMap& high, const ScalarFieldMap& low);

/// high - low, shifted so that the mean over pixels with intensity at most
/// zero_fraction * I_max is zero.
ScalarFieldMap subtract_reference(const ScalarFieldMap& high, const ScalarFieldMap& low,
                                  const ScalarFieldMap& intensity, double zero_fraction = 0.02);

struct BinningOptions {
  std::size_t n_bins = 40;
  double tolerance = 0.01;  // half-width of each mask as a fraction of I_max
  std::size_t border = 0;   // pixels excluded at every edge
  bool anchor = true;       // shift so the curve extrapolates to 0 at I = 0
};

/// Groups pixels of equal intensity (within the tolerance) around n_bins
/// evenly spaced centres on [0, I_max] and averages the phase in each group.
PhaseShiftCurve bin_by_intensity(const ScalarFieldMap& phase, const ScalarFieldMap& intensity,
                                 const BinningOptions& options = {});

struct ExtractionOptions {
  DemodulationOptions demodulation;
  BinningOptions binning;
};

struct Extraction {
  ScalarFieldMap phase;  // anchored high - low phase map
  PhaseShiftCurve curve;
  CarrierPeaks peaks;
  std::size_t residual_jumps = 0;
};

/// Demodulates both images with the carrier found on `low`, unwraps,
/// subtracts and bins against `intensity`.
Extraction extract_phase_curve(const ScalarFieldMap& high, const ScalarFieldMap& low,
                               const ScalarFieldMap& intensity,
                               const ExtractionOptions& options = {});

}  // namespace rydkerr
