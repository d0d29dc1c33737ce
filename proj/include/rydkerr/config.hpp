#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rydkerr/blockade.hpp"

namespace rydkerr {

/// Physical parameters of the P exciton series and the sample.
///
/// Units: energies eV, lengths nm except `crystal_length` (um), impedance
/// Ohm, chi3_0 m^2/V^2. Sample-specific fields without a default are optional and
/// must come from a configuration file; accessors throw ConfigError naming
/// the missing field.
struct ExcitonSeriesConfig {
  double gap_energy = 2.1721;
  std::optional<double> rydberg_energy;
  double quantum_defect = 0.34;
  double bohr_radius = 1.1;
  std::optional<double> coherence_radius;
  std::optional<double> epsilon_b;
  std::optional<double> delta_lt;
  // Gamma_n = linewidth_scale * n^-3 unless overridden in base_linewidths.
  std::optional<double> linewidth_scale;
  std::map<int, double> base_linewidths;
  double extra_broadening = 21e-6;
  int n_min = 2;
  int n_max = 14;
  double chi3_0 = 0.6e-11;
  double a_t = 4.53;
  double b_t = 3.41;
  double gamma_exp = 1.8;
  double beta_exp = 1.62;
  double crystal_length = 50.0;
  std::optional<double> wavelength;
  double vacuum_impedance = 376.73;
  // Energy unit of the chi3 line-shape fraction; the Rydberg energy if unset.
  std::optional<double> chi3_energy_scale;
  BlockadeMode blockade;

  double rydberg() const;
  double coherence() const;
  double background_permittivity() const;
  double lt_splitting() const;
  double chi3_energy_unit() const;

  /// Gamma_n without the constant extra broadening.
  double base_linewidth(int n) const;
  /// Gamma_n including the extra broadening.
  double linewidth(int n) const;

  /// Throws ConfigError on the first violated invariant.
  void validate() const;

  friend bool operator==(const ExcitonSeriesConfig&, const ExcitonSeriesConfig&) = default;
};

/// Standard Cu2O values; sample-specific fields left unset.
ExcitonSeriesConfig default_config();

struct LoadedConfig {
  ExcitonSeriesConfig config;
  std::vector<std::string> warnings;  // e.g. ignored unknown fields
};

/// Parses a JSON document over default_config() and validates it.
LoadedConfig parse_config(std::string_view json_text);
LoadedConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExcitonSeriesConfig& cfg);

/// E_Tn = E_gap - Ry / (n - delta)^2.
double exciton_energy(int n, const ExcitonSeriesConfig& cfg);

/// Strictly increasing list of photon energies [eV].
class SpectralGrid {
 public:
  explicit SpectralGrid(std::vector<double> energies);

  /// lo, lo + step, ... up to and including hi (within step/2).
  static SpectralGrid uniform(double lo, double hi, double step);
  /// Grid over binding energies E_b = E_gap - E given in meV, step in ueV.
  static SpectralGrid from_binding_energy(const ExcitonSeriesConfig& cfg, double eb_min_meV,
                                          double eb_max_meV, double step_ueV);

  const std::vector<double>& energies() const { return energies_; }
  std::size_t size() const { return energies_.size(); }
  double operator[](std::size_t i) const { return energies_[i]; }

 private:
  std::vector<double> energies_;
};

}  // namespace rydkerr
