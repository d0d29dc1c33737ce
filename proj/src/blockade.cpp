#include "rydkerr/blockade.hpp"

#include <cmath>
#include <string>

#include "rydkerr/config.hpp"
#include "rydkerr/errors.hpp"
#include "rydkerr/units.hpp"

namespace rydkerr {

BlockadeVariant parse_blockade_variant(std::string_view name) {
  if (name == "none") return BlockadeVariant::none;
  if (name == "broadening") return BlockadeVariant::broadening;
  if (name == "saturable") return BlockadeVariant::saturable;
  if (name == "combined") return BlockadeVariant::combined;
  throw ConfigError("unknown blockade mode '" + std::string(name) +
                    "' (expected none, broadening, saturable or combined)");
}

std::string_view to_string(BlockadeVariant variant) {
  switch (variant) {
    case BlockadeVariant::none: return "none";
    case BlockadeVariant::broadening: return "broadening";
    case BlockadeVariant::saturable: return "saturable";
    case BlockadeVariant::combined: return "combined";
  }
  return "none";
}

SaturationTarget parse_saturation_target(std::string_view name) {
  if (name == "chi0") return SaturationTarget::chi0;
  if (name == "oscillator_strength") return SaturationTarget::oscillator_strength;
  throw ConfigError("unknown saturation target '" + std::string(name) +
                    "' (expected chi0 or oscillator_strength)");
}

std::string_view to_string(SaturationTarget target) {
  return target == SaturationTarget::chi0 ? "chi0" : "oscillator_strength";
}

double BlockadeMode::saturation_intensity(int n, double quantum_defect) const {
  if (auto it = isat_overrides.find(n); it != isat_overrides.end()) return it->second;
  return predict_isat(n, isat_amplitude, quantum_defect, isat_exponent);
}

void BlockadeMode::validate() const {
  if (!(broadening_constant >= 0.0) || !std::isfinite(broadening_constant))
    throw ConfigError("config field 'blockade.broadening_constant' must be finite and non-negative");
  if (!(isat_amplitude > 0.0) || !std::isfinite(isat_amplitude))
    throw ConfigError("config field 'blockade.isat_amplitude' must be finite and positive");
  if (!std::isfinite(isat_exponent))
    throw ConfigError("config field 'blockade.isat_exponent' must be finite");
  for (const auto& [n, v] : isat_overrides)
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError("config field 'blockade.isat_overrides." + std::to_string(n) +
                        "' must be finite and positive");
}

double broadened_linewidth(int n, double linewidth_eV, double intensity, const BlockadeMode& mode) {
  if (!(intensity >= 0.0)) throw DomainError("intensity must be non-negative");
  const double n4 = std::pow(static_cast<double>(n), 4);
  return linewidth_eV + mode.broadening_constant * n4 * intensity * units::micro_eV;
}

double saturable_scale(double intensity, double isat) {
  if (!(isat > 0.0)) throw DomainError("saturation intensity must be positive");
  if (!(intensity >= 0.0)) throw DomainError("intensity must be non-negative");
  if (std::isinf(intensity)) return 0.0;
  return 1.0 / (1.0 + intensity / isat);
}

double predict_isat(int n, double amplitude, double quantum_defect, double exponent) {
  const double neff = n - quantum_defect;
  if (!(neff > 0.0)) throw DomainError("n - quantum_defect must be positive");
  if (!(amplitude > 0.0)) throw DomainError("saturation amplitude must be positive");
  return amplitude * std::pow(neff, exponent);
}

ResonanceState unmodified_resonances(const ExcitonSeriesConfig& cfg) {
  ResonanceState s;
  s.n_min = cfg.n_min;
  const auto count = static_cast<std::size_t>(cfg.n_max - cfg.n_min + 1);
  s.linewidths.resize(count);
  s.column_scale.assign(count, 1.0);
  for (int n = cfg.n_min; n <= cfg.n_max; ++n)
    s.linewidths[static_cast<std::size_t>(n - cfg.n_min)] = cfg.linewidth(n);
  return s;
}

int nearest_resonance(double energy, const ExcitonSeriesConfig& cfg) {
  int best = cfg.n_min;
  double best_distance = std::abs(energy - exciton_energy(cfg.n_min, cfg));
  for (int n = cfg.n_min + 1; n <= cfg.n_max; ++n) {
    const double d = std::abs(energy - exciton_energy(n, cfg));
    if (d < best_distance) {
      best = n;
      best_distance = d;
    }
  }
  return best;
}

ResonanceState apply_blockade(double energy, double intensity, const ExcitonSeriesConfig& cfg,
                              const BlockadeMode& mode) {
  if (!(intensity >= 0.0)) throw DomainError("intensity must be non-negative");
  ResonanceState s = unmodified_resonances(cfg);
  if (mode.broadens()) {
    for (int n = cfg.n_min; n <= cfg.n_max; ++n) {
      auto& g = s.linewidths[static_cast<std::size_t>(n - cfg.n_min)];
      g = broadened_linewidth(n, g, intensity, mode);
    }
  }
  if (mode.saturates()) {
    if (mode.saturation_target == SaturationTarget::chi0) {
      const int n_star = nearest_resonance(energy, cfg);
      s.chi3_scale = saturable_scale(intensity, mode.saturation_intensity(n_star, cfg.quantum_defect));
    } else {
      for (int n = cfg.n_min; n <= cfg.n_max; ++n)
        s.column_scale[static_cast<std::size_t>(n - cfg.n_min)] =
            saturable_scale(intensity, mode.saturation_intensity(n, cfg.quantum_defect));
    }
  }
  return s;
}

}  // namespace rydkerr
