#pragma once

#include <map>
#include <string_view>
#include <vector>

namespace rydkerr {

struct ExcitonSeriesConfig;

enum class BlockadeVariant { none, broadening, saturable, combined };

// Where the saturable factor enters chi3: as a global factor on chi3_0
// with the saturation intensity of the resonance nearest to the photon
// energy, or on every F_{nn'} term with the I_sat of its absorbing state n'.
enum class SaturationTarget { chi0, oscillator_strength };

BlockadeVariant parse_blockade_variant(std::string_view name);
std::string_view to_string(BlockadeVariant variant);
SaturationTarget parse_saturation_target(std::string_view name);
std::string_view to_string(SaturationTarget target);

struct BlockadeMode {
  BlockadeVariant variant = BlockadeVariant::none;
  // Linewidth growth in ueV per (mW/mm^2), multiplied by n^4.
  double broadening_constant = 2.1e-2;
  // I_sat(n) = isat_amplitude * (n - delta)^isat_exponent, in mW/mm^2.
  // The default puts I_sat(5) at 100 mW/mm^2.
  double isat_amplitude = 4.772010788316106e6;
  double isat_exponent = -7.0;
  std::map<int, double> isat_overrides;
  SaturationTarget saturation_target = SaturationTarget::chi0;

  bool broadens() const {
    return variant == BlockadeVariant::broadening || variant == BlockadeVariant::combined;
  }
  bool saturates() const {
    return variant == BlockadeVariant::saturable || variant == BlockadeVariant::combined;
  }
  /// Saturation intensity of state n [mW/mm^2]; per-n overrides win over the law.
  double saturation_intensity(int n, double quantum_defect) const;

  void validate() const;
  friend bool operator==(const BlockadeMode&, const BlockadeMode&) = default;
};

/// Gamma_n + c n^4 I, with c in ueV per (mW/mm^2). Result in eV.
double broadened_linewidth(int n, double linewidth_eV, double intensity, const BlockadeMode& mode);

/// 1 / (1 + I / I_sat).
double saturable_scale(double intensity, double isat);

/// amplitude * (n - delta)^exponent.
double predict_isat(int n, double amplitude, double quantum_defect, double exponent = -7.0);

/// Per-resonance linewidths and chi3 weights for one (energy, intensity) point.
struct ResonanceState {
  int n_min = 2;
  std::vector<double> linewidths;    // eV, index n - n_min
  std::vector<double> column_scale;  // multiplies every term with this n'
  double chi3_scale = 1.0;           // multiplies the whole chi3 sum

  double linewidth(int n) const { return linewidths[static_cast<std::size_t>(n - n_min)]; }
  double column(int n) const { return column_scale[static_cast<std::size_t>(n - n_min)]; }
};

ResonanceState unmodified_resonances(const ExcitonSeriesConfig& cfg);

/// Principal quantum number whose exciton energy is closest to `energy`.
int nearest_resonance(double energy, const ExcitonSeriesConfig& cfg);

/// Applies the blockade transform selected by `mode` at photon energy
/// `energy` and incident intensity `intensity` [mW/mm^2].
ResonanceState apply_blockade(double energy, double intensity, const ExcitonSeriesConfig& cfg,
                              const BlockadeMode& mode);

}  // namespace rydkerr
