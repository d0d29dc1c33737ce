#include "rydkerr/rdma.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>

#include "rydkerr/errors.hpp"
#include "text.hpp"
#include "rydkerr/units.hpp"

namespace rydkerr {

namespace {

using detail::format_number;

// Energy-independent pieces of the susceptibilities, tabulated once per config.
struct SeriesTables {
  int n_min = 2;
  std::size_t count = 0;
  std::vector<double> energy;      // E_Tn
  std::vector<double> strength;    // eps_b f_n1 Delta_LT
  std::vector<double> coupling;    // F_{nn'} at [i * count + j], i <-> n, j <-> n'
  double chi3_prefactor = 0.0;     // -chi3_0 Es^2

  explicit SeriesTables(const ExcitonSeriesConfig& cfg, bool need_chi1 = true, bool need_chi3 = true)
      : n_min(cfg.n_min), count(static_cast<std::size_t>(cfg.n_max - cfg.n_min + 1)) {
    energy.resize(count);
    for (std::size_t i = 0; i < count; ++i) energy[i] = exciton_energy(n_min + static_cast<int>(i), cfg);
    if (need_chi1) {
      const double scale = cfg.background_permittivity() * cfg.lt_splitting();
      strength.resize(count);
      for (std::size_t i = 0; i < count; ++i)
        strength[i] = scale * oscillator_strength(n_min + static_cast<int>(i), cfg);
    }
    if (need_chi3) {
      coupling.resize(count * count);
      for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < count; ++j)
          coupling[i * count + j] =
              coupling_strength(n_min + static_cast<int>(i), n_min + static_cast<int>(j), cfg);
      const double es = cfg.chi3_0 == 0.0 ? 0.0 : cfg.chi3_energy_unit();
      chi3_prefactor = -cfg.chi3_0 * es * es;
    }
  }

  complex chi1(double e, const ResonanceState& s) const {
    complex sum = 0.0;
    for (std::size_t i = 0; i < count; ++i)
      sum += strength[i] / complex(energy[i] - e, -s.linewidths[i]);
    return sum;
  }

  complex chi3(double e, const ResonanceState& s) const {
    if (chi3_prefactor == 0.0) return 0.0;
    // Lorentzian weight of the absorbing state n'.
    std::vector<double> lorentz(count);
    for (std::size_t j = 0; j < count; ++j) {
      const double g = s.linewidths[j];
      const double d = energy[j] - e;
      lorentz[j] = s.column_scale[j] * g / (d * d + g * g);
    }
    complex sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      double inner = 0.0;
      for (std::size_t j = 0; j < count; ++j) inner += coupling[i * count + j] * lorentz[j];
      const double et = energy[i];
      sum += inner * et / complex(et * et - e * e, -2.0 * e * s.linewidths[i]);
    }
    return chi3_prefactor * s.chi3_scale * sum;
  }
};

double field_factor(const ExcitonSeriesConfig& cfg) {
  const double t = 2.0 / (1.0 + std::sqrt(cfg.background_permittivity()));
  return 2.0 * t * t * cfg.vacuum_impedance;
}

double absorption_from(double energy, complex chi1v, complex chi3v, double field2,
                       const ExcitonSeriesConfig& cfg) {
  return units::wavenumber_per_um(energy) / std::sqrt(cfg.background_permittivity()) *
         (chi1v.imag() + field2 * chi3v.imag());
}

void check_energy(double energy) {
  if (!(energy > 0.0) || !std::isfinite(energy)) throw DomainError("photon energy must be positive");
}

void check_intensity(double intensity) {
  if (!(intensity >= 0.0)) throw DomainError("intensity must be non-negative");
}

double average_from_alpha(double alpha_per_um, double incident, double length_um) {
  const double od = alpha_per_um * length_um;
  if (od <= 0.0) return incident;
  return incident * -std::expm1(-od) / od;
}

double index_shift(double energy, double intensity, const ExcitonSeriesConfig& cfg,
                   const SeriesTables& tables, const BlockadeMode& mode, IntensityReference reference) {
  check_energy(energy);
  check_intensity(intensity);
  if (intensity == 0.0) return 0.0;
  const double eps = cfg.background_permittivity();
  const ResonanceState base = unmodified_resonances(cfg);
  const complex chi1_0 = tables.chi1(energy, base);
  const complex n0 = std::sqrt(eps + chi1_0);

  double kerr_intensity = intensity;
  if (reference == IntensityReference::incident) {
    const double alpha = absorption_from(energy, chi1_0, 0.0, 0.0, cfg);
    kerr_intensity = average_from_alpha(alpha, intensity, cfg.crystal_length);
  }
  const ResonanceState state = apply_blockade(energy, intensity, cfg, mode);
  const complex chi1_i = mode.broadens() ? tables.chi1(energy, state) : chi1_0;
  const double field2 = field_factor(cfg) * kerr_intensity * units::w_m2_per_mw_mm2;
  const complex n = std::sqrt(eps + chi1_i + field2 * tables.chi3(energy, state));
  return n.real() - n0.real();
}

}  // namespace

double oscillator_strength(int n, const ExcitonSeriesConfig& cfg) {
  if (n < 1) throw DomainError("oscillator strength needs n >= 1");
  const double nd = n;
  const double r0 = cfg.coherence();
  const double a = cfg.bohr_radius;
  const double ratio = nd * (r0 + 2.0 * a) / (2.0 * (r0 + nd * a));
  return 32.0 * (nd * nd - 1.0) / (3.0 * std::pow(nd, 5)) * std::pow(ratio, 6);
}

double coupling_strength(int n, int n_prime, const ExcitonSeriesConfig& cfg) {
  if (n < 1 || n_prime < 1) throw DomainError("coupling strength needs n, n' >= 1");
  const double nd = n;
  const double np = n_prime;
  return (np * np - 1.0) * (nd * nd - 1.0) / std::pow(np, 5) *
         (cfg.a_t / std::pow(nd, cfg.gamma_exp) + cfg.b_t / std::pow(nd, cfg.beta_exp));
}

complex chi1(double energy, const ExcitonSeriesConfig& cfg) {
  return chi1(energy, cfg, unmodified_resonances(cfg));
}

complex chi1(double energy, const ExcitonSeriesConfig& cfg, const ResonanceState& lines) {
  check_energy(energy);
  return SeriesTables(cfg, true, false).chi1(energy, lines);
}

complex chi3(double energy, const ExcitonSeriesConfig& cfg) {
  return chi3(energy, cfg, unmodified_resonances(cfg));
}

complex chi3(double energy, const ExcitonSeriesConfig& cfg, const ResonanceState& lines) {
  check_energy(energy);
  return SeriesTables(cfg, false, true).chi3(energy, lines);
}

double propagating_field_squared(double intensity_w_m2, const ExcitonSeriesConfig& cfg) {
  check_intensity(intensity_w_m2);
  return field_factor(cfg) * intensity_w_m2;
}

double nonlinear_absorption(double energy, double intensity, const ExcitonSeriesConfig& cfg,
                            const BlockadeMode& mode) {
  check_energy(energy);
  check_intensity(intensity);
  const SeriesTables tables(cfg);
  const ResonanceState state = apply_blockade(energy, intensity, cfg, mode);
  const complex c1 = tables.chi1(energy, state);
  if (intensity == 0.0) return absorption_from(energy, c1, 0.0, 0.0, cfg);
  const double field2 = field_factor(cfg) * intensity * units::w_m2_per_mw_mm2;
  return absorption_from(energy, c1, tables.chi3(energy, state), field2, cfg);
}

double linear_absorption(double energy, const ExcitonSeriesConfig& cfg) {
  return absorption_from(energy, chi1(energy, cfg), 0.0, 0.0, cfg);
}

double transmission(double energy, const ExcitonSeriesConfig& cfg) {
  return std::exp(-linear_absorption(energy, cfg) * cfg.crystal_length);
}

double average_intensity(double energy, double incident, const ExcitonSeriesConfig& cfg) {
  check_intensity(incident);
  return average_from_alpha(linear_absorption(energy, cfg), incident, cfg.crystal_length);
}

complex total_index(double energy, double intensity, const ExcitonSeriesConfig& cfg,
                    const BlockadeMode& mode, IntensityReference reference) {
  check_energy(energy);
  check_intensity(intensity);
  const SeriesTables tables(cfg);
  const double eps = cfg.background_permittivity();
  const ResonanceState base = unmodified_resonances(cfg);
  const complex chi1_0 = tables.chi1(energy, base);
  if (intensity == 0.0) return std::sqrt(eps + chi1_0);
  double kerr_intensity = intensity;
  if (reference == IntensityReference::incident)
    kerr_intensity = average_from_alpha(absorption_from(energy, chi1_0, 0.0, 0.0, cfg), intensity,
                                        cfg.crystal_length);
  const ResonanceState state = apply_blockade(energy, intensity, cfg, mode);
  const complex c1 = mode.broadens() ? tables.chi1(energy, state) : chi1_0;
  const double field2 = field_factor(cfg) * kerr_intensity * units::w_m2_per_mw_mm2;
  return std::sqrt(eps + c1 + field2 * tables.chi3(energy, state));
}

double phase_shift(double energy, double intensity, const ExcitonSeriesConfig& cfg,
                   const BlockadeMode& mode, IntensityReference reference) {
  const SeriesTables tables(cfg);
  const double dn = index_shift(energy, intensity, cfg, tables, mode, reference);
  const double phase = units::wavenumber_per_um(energy) * cfg.crystal_length * dn;
  if (!std::isfinite(phase)) throw NumericError("phase shift is not finite");
  return phase;
}

double kerr_coefficient(double energy, const ExcitonSeriesConfig& cfg) {
  check_energy(energy);
  const SeriesTables tables(cfg);
  const ResonanceState base = unmodified_resonances(cfg);
  const complex n0 = std::sqrt(cfg.background_permittivity() + tables.chi1(energy, base));
  // d n / d I = |E_prop|^2/I * chi3 / (2 n0), per mW/mm^2.
  const double per_intensity = field_factor(cfg) * units::w_m2_per_mw_mm2;
  return (per_intensity * tables.chi3(energy, base) / (2.0 * n0)).real();
}

SusceptibilitySpectrum susceptibility_spectrum(const SpectralGrid& grid,
                                               const ExcitonSeriesConfig& cfg) {
  const SeriesTables tables(cfg);
  const ResonanceState base = unmodified_resonances(cfg);
  SusceptibilitySpectrum out{grid, {}, {}};
  out.chi1.reserve(grid.size());
  out.chi3.reserve(grid.size());
  for (double e : grid.energies()) {
    check_energy(e);
    out.chi1.push_back(tables.chi1(e, base));
    out.chi3.push_back(tables.chi3(e, base));
    if (!std::isfinite(std::abs(out.chi1.back())) || !std::isfinite(std::abs(out.chi3.back())))
      throw NumericError("susceptibility is not finite at E=" + format_number(e) + " eV");
  }
  return out;
}

KerrResponse n2_spectrum(const SpectralGrid& grid, const ExcitonSeriesConfig& cfg,
                         const std::vector<double>& intensities, const BlockadeMode& mode,
                         double absorption_intensity) {
  for (double i : intensities) check_intensity(i);
  check_intensity(absorption_intensity);
  const SeriesTables tables(cfg);
  const ResonanceState base = unmodified_resonances(cfg);
  const double eps = cfg.background_permittivity();
  const double per_intensity = field_factor(cfg) * units::w_m2_per_mw_mm2;

  KerrResponse out{grid, {}, {}, absorption_intensity, intensities, {}};
  out.n2.reserve(grid.size());
  out.alpha3.reserve(grid.size());
  out.phase.reserve(grid.size() * intensities.size());
  for (double e : grid.energies()) {
    check_energy(e);
    const complex c1 = tables.chi1(e, base);
    const complex c3 = tables.chi3(e, base);
    const complex n0 = std::sqrt(eps + c1);
    out.n2.push_back((per_intensity * c3 / (2.0 * n0)).real());
    if (absorption_intensity == 0.0) {
      out.alpha3.push_back(absorption_from(e, c1, 0.0, 0.0, cfg));
    } else {
      const ResonanceState s = apply_blockade(e, absorption_intensity, cfg, mode);
      out.alpha3.push_back(absorption_from(e, tables.chi1(e, s), tables.chi3(e, s),
                                           per_intensity * absorption_intensity, cfg));
    }
    const double k_l = units::wavenumber_per_um(e) * cfg.crystal_length;
    for (double i : intensities)
      out.phase.push_back(k_l * index_shift(e, i, cfg, tables, mode, IntensityReference::incident));
    if (!std::isfinite(out.n2.back()) || !std::isfinite(out.alpha3.back()))
      throw NumericError("Kerr response is not finite at E=" + format_number(e) + " eV");
  }
  return out;
}

void write_spectrum_csv(std::ostream& out, const SusceptibilitySpectrum& chi, const KerrResponse& kerr) {
  if (chi.chi1.size() != chi.grid.size() || kerr.n2.size() != chi.grid.size() ||
      kerr.alpha3.size() != chi.grid.size())
    throw DomainError("spectrum arrays do not match the grid");
  out << "energy_eV,re_chi1,im_chi1,re_chi3,im_chi3,n2_mm2_per_mW,alpha3_per_um\n";
  for (std::size_t i = 0; i < chi.grid.size(); ++i) {
    out << format_number(chi.grid[i]) << ',' << format_number(chi.chi1[i].real()) << ','
        << format_number(chi.chi1[i].imag()) << ',' << format_number(chi.chi3[i].real()) << ','
        << format_number(chi.chi3[i].imag()) << ',' << format_number(kerr.n2[i]) << ','
        << format_number(kerr.alpha3[i]) << '\n';
  }
}

}  // namespace rydkerr
