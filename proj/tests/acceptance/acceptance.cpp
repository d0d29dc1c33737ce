// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// hard criterion fails. Tolerances are fixed here.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "rydkerr/config.hpp"
#include "rydkerr/errors.hpp"
#include "rydkerr/fitting.hpp"
#include "rydkerr/interferometry.hpp"
#include "rydkerr/random.hpp"
#include "rydkerr/rdma.hpp"
#include "rydkerr/units.hpp"

using namespace rydkerr;

namespace {

constexpr double pi = units::pi;

// Round trip
constexpr double kBumpPhase = 0.30;       // rad
constexpr double kRoundTripRms = 0.01;    // rad
constexpr std::size_t kRoundTripBorder = 16;
constexpr double kRoundTripSeconds = 5.0;
// Demodulation oracle
constexpr double kOracleRms = 1e-3;  // rad
// Saturable fit
constexpr double kNoiselessRel = 1e-6;
constexpr double kNoisyRel = 0.05;
constexpr double kMultiplicativeNoise = 0.01;
constexpr int kSeeds = 100;
constexpr std::size_t kBins = 20;
// Scaling closure
constexpr double kExponent = -7.0;
constexpr double kExponentTol = 0.1;
constexpr double kReportedExponent = -6.9;
constexpr double kReportedSigma = 0.2;
// Order of magnitude and blockade
constexpr double kN2Target = 1e-3;  // mm^2/mW
constexpr double kN2Factor = 10.0;
constexpr double kBlockadeLo = 1.5, kBlockadeHi = 3.0;
constexpr double kProbeIntensity = 1.0;  // mW/mm^2
constexpr double kLobeTarget = 0.25, kSwingTarget = 0.5, kSaturatedFactor = 3.0;
constexpr double kSaturatingIntensity = 1e7;  // mW/mm^2, far above every I_sat

int hard_failures = 0;

void report(const char* id, bool pass, const std::string& detail, bool hard = true) {
  std::printf("criterion %-3s %s  %s%s\n", id, pass ? "PASS" : "FAIL", detail.c_str(),
              hard ? "" : " (diagnostic only)");
  std::fflush(stdout);
  if (!pass && hard) ++hard_failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}
std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}
std::string fmt(const char* f, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

ExcitonSeriesConfig calibrated() {
  return load_config(std::string(RYDKERR_SOURCE_DIR) + "/configs/cu2o_4k.json").config;
}

ExcitonSeriesConfig unblockaded(ExcitonSeriesConfig c) {
  c.blockade.variant = BlockadeVariant::none;
  return c;
}

// Resonance interval bounded by the midpoints to the neighbouring lines.
std::pair<double, double> resonance_interval(int n, const ExcitonSeriesConfig& c, double lo, double hi) {
  const double et = exciton_energy(n, c);
  return {n > c.n_min ? 0.5 * (exciton_energy(n - 1, c) + et) : lo,
          n < c.n_max ? 0.5 * (exciton_energy(n + 1, c) + et) : hi};
}

// Piecewise-linear table of phi(I) on [0, imax].
std::function<double(double)> tabulate(const std::function<double(double)>& f, double imax) {
  constexpr std::size_t m = 4097;
  std::vector<double> t(m);
  for (std::size_t i = 0; i < m; ++i) t[i] = f(imax * static_cast<double>(i) / (m - 1));
  return [t, imax](double i) {
    const double u = std::clamp(i / imax, 0.0, 1.0) * (m - 1);
    const auto k = std::min(static_cast<std::size_t>(u), m - 2);
    const double w = u - static_cast<double>(k);
    return (1.0 - w) * t[k] + w * t[k + 1];
  };
}

struct Measurement {
  ScalarFieldMap high, low, intensity, injected;
};

// Gaussian beam pair through a shared aberration; the low set runs at
// 1/low_ratio of the power with proportionally weaker reference and exposure.
Measurement measure(const GridSpec& grid, double peak, double sigma_um, const std::function<double(double)>& phase,
                    double aberration, const NoiseModel* noise, std::uint64_t seed, const std::string& tag,
                    double period_px = 10.0, double low_ratio = 50.0) {
  const double sigma_mm = sigma_um * 1e-3;
  const double power = peak * 2.0 * pi * sigma_mm * sigma_mm;
  const BeamMap beam = gaussian_beam(power, sigma_um, grid);
  const BeamMap weak = gaussian_beam(power / low_ratio, sigma_um, grid);
  ScalarFieldMap ph(grid), pl(grid), inj(grid);
  for (std::size_t y = 0; y < grid.height; ++y)
    for (std::size_t x = 0; x < grid.width; ++x) {
      const double dx = static_cast<double>(x) - grid.width / 2.0, dy = static_cast<double>(y) - grid.height / 2.0;
      const double ab = aberration * (dx * dx + 0.5 * dy * dy);
      const double hi = phase(beam.intensity.at(x, y));
      const double lo = phase(weak.intensity.at(x, y));
      ph.at(x, y) = ab + hi;
      pl.at(x, y) = ab + lo;
      inj.at(x, y) = hi - lo;
    }
  const Carrier k = carrier_from_period(period_px, 0.3);
  Measurement m{synthesize_interferogram(make_field(beam.intensity, ph), std::sqrt(beam.peak), k),
                synthesize_interferogram(make_field(weak.intensity, pl), std::sqrt(weak.peak), k), beam.intensity,
                inj};
  if (noise) {
    NoiseModel nh = *noise, nl = *noise;
    nh.read_noise *= beam.peak;
    nl.read_noise *= weak.peak;
    auto rh = substream(seed, tag + "/high");
    auto rl = substream(seed, tag + "/low");
    add_noise(m.high, nh, rh);
    add_noise(m.low, nl, rl);
  }
  return m;
}

void criterion_round_trip() {
  const auto t0 = std::chrono::steady_clock::now();
  const GridSpec grid{512, 512, 2.5};
  const double peak = 10.0;
  const NoiseModel noise{0.01, 1e-3, 0.0};
  const auto m = measure(grid, peak, 200.0, [&](double i) { return kBumpPhase * i / peak; }, 2e-4, &noise, 1,
                         "round_trip");
  ExtractionOptions opt;
  opt.binning.border = kRoundTripBorder;
  const Extraction ex = extract_phase_curve(m.high, m.low, m.intensity, opt);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t y = kRoundTripBorder; y < grid.height - kRoundTripBorder; ++y)
    for (std::size_t x = kRoundTripBorder; x < grid.width - kRoundTripBorder; ++x) {
      const double d = ex.phase.at(x, y) - m.injected.at(x, y);
      s += d * d;
      ++n;
    }
  const double rms = std::sqrt(s / static_cast<double>(n));
  report("1", rms <= kRoundTripRms && seconds < kRoundTripSeconds,
         fmt("phase round trip 512x512: rms %.2e rad (limit %.0e), %.2f s", rms, kRoundTripRms, seconds));
}

void criterion_oracle() {
  const std::size_t n = 32;
  const GridSpec grid{n, n, 2.5};
  const double kx = 2 * pi * 12 / 32.0;
  ComplexFieldMap sig(grid);
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x)
      sig.at(x, y) = std::polar(1.0, 0.7 + 0.2 * std::cos(2 * pi * static_cast<double>(y) / 32.0));
  const auto img = synthesize_interferogram(sig, 1.0, Carrier{kx, 0.0});
  const auto fft_phase = demodulate(img).phase;

  // a + b cos(kx) + c sin(kx) fitted over 8 pixels of each row; phi = atan2(-c, b).
  std::vector<double> diff;
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) {
      double m[3][3] = {}, r[3] = {};
      for (std::size_t j = 0; j < 8; ++j) {
        const std::size_t xx = (x + j) % n;
        const double basis[3] = {1.0, std::cos(kx * xx), std::sin(kx * xx)};
        for (int a = 0; a < 3; ++a) {
          r[a] += basis[a] * img.at(xx, y);
          for (int b = 0; b < 3; ++b) m[a][b] += basis[a] * basis[b];
        }
      }
      auto det = [](double q[3][3]) {
        return q[0][0] * (q[1][1] * q[2][2] - q[1][2] * q[2][1]) - q[0][1] * (q[1][0] * q[2][2] - q[1][2] * q[2][0]) +
               q[0][2] * (q[1][0] * q[2][1] - q[1][1] * q[2][0]);
      };
      const double d = det(m);
      double sol[3];
      for (int col = 0; col < 3; ++col) {
        double q[3][3];
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) q[a][b] = b == col ? r[a] : m[a][b];
        sol[col] = det(q) / d;
      }
      diff.push_back(std::remainder(fft_phase.at(x, y) - std::atan2(-sol[2], sol[1]), 2 * pi));
    }
  double mean = 0.0;
  for (double d : diff) mean += d;
  mean /= static_cast<double>(diff.size());
  double s = 0.0;
  for (double d : diff) s += (d - mean) * (d - mean);
  const double rms = std::sqrt(s / static_cast<double>(diff.size()));
  report("2", rms <= kOracleRms, fmt("FFT vs local sinusoid fit on 32x32: rms %.2e rad (limit %.0e)", rms, kOracleRms));
}

PhaseShiftCurve model_curve(double alpha, double isat, double imax) {
  PhaseShiftCurve c;
  for (std::size_t k = 0; k < kBins; ++k) {
    const double i = imax * static_cast<double>(k) / (kBins - 1);
    c.intensities.push_back(i);
    c.mean_phase.push_back(saturable_model(i, alpha, isat));
    c.std_phase.push_back(0.0);
    c.pixel_counts.push_back(100);
  }
  return c;
}

void criterion_saturable_fit() {
  const double alpha = 2.0, isat = 5.0;
  const auto clean = fit_saturable(model_curve(alpha, isat, 4.0 * isat));
  const double e_alpha = std::abs(clean.param("alpha") / alpha - 1.0);
  const double e_isat = std::abs(clean.param("isat") / isat - 1.0);
  int within = 0;
  double worst = 0.0;
  for (int seed = 0; seed < kSeeds; ++seed) {
    auto rng = substream(static_cast<std::uint64_t>(seed), "acceptance/saturable");
    std::normal_distribution<double> noise(0.0, kMultiplicativeNoise);
    auto c = model_curve(alpha, isat, 4.0 * isat);
    // Each bin carries its own 1% uncertainty.
    for (std::size_t k = 0; k < c.size(); ++k) {
      c.mean_phase[k] *= 1.0 + noise(rng);
      c.std_phase[k] = std::max(kMultiplicativeNoise * std::abs(c.mean_phase[k]), 1e-12);
    }
    const auto f = fit_saturable(c, Weighting::inverse_variance);
    const double e = std::max(std::abs(f.param("alpha") / alpha - 1.0), std::abs(f.param("isat") / isat - 1.0));
    worst = std::max(worst, std::isfinite(e) ? e : std::numeric_limits<double>::infinity());
    if (e <= kNoisyRel) ++within;
  }
  const bool pass = e_alpha <= kNoiselessRel && e_isat <= kNoiselessRel && within == kSeeds;
  report("3", pass,
         fmt("noiseless rel. error %.1e / %.1e; ", e_alpha, e_isat) +
             fmt("1%% noise: %.0f/100 seeds within 5%%, worst %.3f", within, worst));
}

struct Closure {
  double b = 0.0, sigma = 0.0;
  std::vector<double> isat;
};

// I_sat(n) from extracted phase curves at every energy inside the FWHM of
// each absorption line, then the log-log slope. Lobes reach tens of radians
// at n = 5, so the beam spans 120 px and the fringes 4 px to keep the local
// phase gradient inside the sideband window.
Closure scaling_closure(const ExcitonSeriesConfig& cfg, const NoiseModel* noise, std::uint64_t seed) {
  const GridSpec grid{768, 768, 2.5};
  const double sigma_um = 300.0;
  const double period_px = 4.0;
  std::vector<int> ns;
  Closure out;
  for (int n = 5; n <= 10; ++n) {
    const auto [lo, hi] = resonance_interval(n, cfg, 0.0, 0.0);
    const SpectralGrid spec = SpectralGrid::uniform(lo, hi, cfg.linewidth(n) / 4.0);
    std::vector<double> absorption, isat(spec.size(), std::numeric_limits<double>::quiet_NaN()), isat_sigma = isat;
    for (double e : spec.energies()) absorption.push_back(linear_absorption(e, cfg));
    const double peak = 10.0 * cfg.blockade.saturation_intensity(n, cfg.quantum_defect);
    for (std::size_t i : fwhm_window(spec, absorption, n, cfg)) {
      const double e = spec[i];
      const auto phase = tabulate([&](double in) { return phase_shift(e, in, cfg, cfg.blockade); }, 1.001 * peak);
      const auto m = measure(grid, peak, sigma_um, phase, 1e-5, noise, seed,
                             "acceptance/closure/" + std::to_string(n) + "/" + std::to_string(i), period_px);
      ExtractionOptions opt;
      opt.binning.n_bins = kBins;
      opt.binning.border = 8;
      const Extraction ex = extract_phase_curve(m.high, m.low, m.intensity, opt);
      // Bin spreads track the slope across each bin rather than noise.
      const FitResult fit = fit_saturable(ex.curve, Weighting::unweighted);
      isat[i] = fit.param("isat");
      isat_sigma[i] = fit.sigma("isat");
    }
    ns.push_back(n);
    out.isat.push_back(isat_near_resonance(spec, isat, absorption, n, cfg, isat_sigma));
  }
  const FitResult law = fit_powerlaw(ns, out.isat, cfg.quantum_defect);
  out.b = law.param("b");
  out.sigma = law.sigma("b");
  return out;
}

void criterion_scaling(const ExcitonSeriesConfig& cfg) {
  const Closure clean = scaling_closure(cfg, nullptr, 0);
  for (std::size_t k = 0; k < clean.isat.size(); ++k)
    std::printf("    n=%zu  I_sat %.4g mW/mm^2\n", k + 5, clean.isat[k]);
  const NoiseModel realistic{0.01, 5e-3, 0.0};
  const Closure noisy = scaling_closure(cfg, &realistic, 7);
  // The noisy interval b +/- 2 sigma has to overlap the reported -6.9 +/- 0.2.
  const bool clean_ok = std::abs(clean.b - kExponent) <= kExponentTol;
  const bool noisy_ok = std::abs(noisy.b - kReportedExponent) <= 2.0 * noisy.sigma + kReportedSigma;
  report("4", clean_ok && noisy_ok,
         fmt("I_sat(n), n=5..10: exponent %.3f (target -7.0 +/- 0.1); ", clean.b) +
             fmt("with noise %.3f +/- %.3f vs -6.9 +/- 0.2", noisy.b, 2.0 * noisy.sigma));
}

void criterion_spectrum(const ExcitonSeriesConfig& cfg) {
  const SpectralGrid grid = SpectralGrid::from_binding_energy(cfg, -2.0, 35.0, 1.0);
  const auto& e = grid.energies();
  const double step = e[1] - e[0];
  std::vector<double> od(grid.size()), n2(grid.size());
  const ExcitonSeriesConfig linear = unblockaded(cfg);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    od[i] = linear_absorption(e[i], linear) * linear.crystal_length;
    n2[i] = kerr_coefficient(e[i], linear);
  }
  auto index_range = [&](int n) {
    const auto [lo, hi] = resonance_interval(n, cfg, e.front(), e.back());
    const auto a = static_cast<std::size_t>(std::lower_bound(e.begin(), e.end(), lo) - e.begin());
    const auto b = static_cast<std::size_t>(std::upper_bound(e.begin(), e.end(), hi) - e.begin());
    return std::pair{a, b};
  };

  // Peaks: a strict interior maximum of the optical density between the
  // midpoints to the neighbouring lines.
  int resolved = 0, highest = 0;
  bool all_up_to_13 = true;
  for (int n = cfg.n_min; n <= cfg.n_max; ++n) {
    const auto [a, b] = index_range(n);
    std::size_t p = a;
    for (std::size_t i = a; i < b; ++i)
      if (od[i] > od[p]) p = i;
    const bool ok = b > a + 2 && p > a && p + 1 < b && od[p] > od[p - 1] && od[p] > od[p + 1];
    if (ok) {
      ++resolved;
      highest = n;
    }
    if (n <= 13 && !ok) all_up_to_13 = false;
  }
  report("5a", all_up_to_13,
         fmt("optical density: %.0f resolved peaks, highest n = %.0f (required: every n up to 13)", resolved, highest));

  // Zero crossings: the sign change of n2 closest to each line.
  int within = 0, total = 0;
  std::string offsets;
  for (int n = cfg.n_min; n <= cfg.n_max; ++n) {
    const double et = exciton_energy(n, cfg);
    const auto [a, b] = index_range(n);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = std::max<std::size_t>(a, 1); i < b; ++i)
      if ((n2[i - 1] < 0.0) != (n2[i] < 0.0)) {
        const double z = e[i - 1] + (e[i] - e[i - 1]) * n2[i - 1] / (n2[i - 1] - n2[i]);
        if (std::abs(z - et) < std::abs(best)) best = z - et;
      }
    ++total;
    if (std::abs(best) <= step) ++within;
    offsets += " " + std::to_string(n) + ":" +
               (std::isfinite(best) ? fmt("%+.1f", best * 1e6) : std::string("none"));
  }
  report("5b", within == total,
         fmt("n2 zero crossings within one grid step (%.1f ueV) of E_Tn: %.0f", step * 1e6, within) +
             fmt(" of %.0f; offsets [ueV]", total) + offsets);
}

// Largest |n2| near the n = 10 line, and the energies of both lobes.
struct Lobes {
  double e_pos = 0.0, e_neg = 0.0, n2_max = 0.0;
};

Lobes n10_lobes(const ExcitonSeriesConfig& cfg) {
  const auto [lo, hi] = resonance_interval(10, cfg, 0.0, 0.0);
  const SpectralGrid grid = SpectralGrid::uniform(lo, hi, 1e-7);
  Lobes l;
  double best_pos = -1.0, best_neg = 1.0;
  for (double e : grid.energies()) {
    const double v = kerr_coefficient(e, cfg);
    if (v > best_pos) best_pos = v, l.e_pos = e;
    if (v < best_neg) best_neg = v, l.e_neg = e;
  }
  l.n2_max = std::max(std::abs(best_pos), std::abs(best_neg));
  return l;
}

void criterion_magnitude(const ExcitonSeriesConfig& cfg, const Lobes& l) {
  const bool pass = l.n2_max >= kN2Target / kN2Factor && l.n2_max <= kN2Target * kN2Factor;
  report("6", pass, fmt("peak |n2| near n=10: %.3e mm^2/mW (band %.0e .. %.0e)", l.n2_max, kN2Target / kN2Factor,
                        kN2Target * kN2Factor),
         false);
  (void)cfg;
}

void criterion_blockade(const ExcitonSeriesConfig& cfg, const Lobes& l) {
  const ExcitonSeriesConfig none = unblockaded(cfg);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double e : {l.e_pos, l.e_neg}) {
    const double ratio = phase_shift(e, kProbeIntensity, none, none.blockade) /
                         phase_shift(e, kProbeIntensity, cfg, cfg.blockade);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  report("7", lo >= kBlockadeLo && hi <= kBlockadeHi,
         fmt("unblockaded / saturable phase at %.0f mW/mm^2 near n=10: %.3f .. %.3f", kProbeIntensity, lo, hi) +
             fmt(" (band %.1f .. %.1f)", kBlockadeLo, kBlockadeHi));
}

void criterion_saturated(const ExcitonSeriesConfig& cfg) {
  const auto [lo, hi] = resonance_interval(10, cfg, 0.0, 0.0);
  const SpectralGrid grid = SpectralGrid::uniform(lo, hi, 1e-7);
  double pos = 0.0, neg = 0.0;
  for (double e : grid.energies()) {
    const double p = phase_shift(e, kSaturatingIntensity, cfg, cfg.blockade);
    pos = std::max(pos, p);
    neg = std::min(neg, p);
  }
  auto within = [](double v, double target) {
    return v >= target / kSaturatedFactor && v <= target * kSaturatedFactor;
  };
  const double swing = pos - neg;
  report("8", within(pos, kLobeTarget) && within(-neg, kLobeTarget) && within(swing, kSwingTarget),
         fmt("saturated lobes near n=10: %+.3f / %+.3f rad, swing %.3f rad", pos, neg, swing));
}

template <typename F>
void guarded(const char* id, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(id, false, std::string("error: ") + e.what());
  }
}

}  // namespace

int main() {
  ExcitonSeriesConfig cfg;
  try {
    cfg = calibrated();
  } catch (const std::exception& e) {
    std::printf("cannot load the calibrated configuration: %s\n", e.what());
    return 2;
  }
  guarded("1", criterion_round_trip);
  guarded("2", criterion_oracle);
  guarded("3", criterion_saturable_fit);
  guarded("4", [&] { criterion_scaling(cfg); });
  guarded("5", [&] { criterion_spectrum(cfg); });
  Lobes lobes;
  guarded("6", [&] {
    lobes = n10_lobes(unblockaded(cfg));
    criterion_magnitude(cfg, lobes);
  });
  guarded("7", [&] { criterion_blockade(cfg, lobes); });
  guarded("8", [&] { criterion_saturated(cfg); });
  std::printf("%s: %d hard criteria failed\n", hard_failures ? "FAIL" : "PASS", hard_failures);
  return hard_failures ? 1 : 0;
}
