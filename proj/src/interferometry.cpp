#include "rydkerr/interferometry.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>

#include "fft.hpp"
#include "rydkerr/errors.hpp"
#include "rydkerr/units.hpp"

namespace rydkerr {

namespace {

using cplx = std::complex<double>;
constexpr double two_pi = 2.0 * units::pi;

double wrap_to_pi(double a) {
  double w = std::remainder(a, two_pi);  // [-pi, pi]
  if (w <= -units::pi) w += two_pi;
  return w;
}

int signed_frequency(std::size_t index, std::size_t n) {
  const auto i = static_cast<long long>(index);
  const auto nn = static_cast<long long>(n);
  return static_cast<int>(i < (nn + 1) / 2 ? i : i - nn);
}

std::size_t wrap_index(long long i, std::size_t n) {
  const auto nn = static_cast<long long>(n);
  return static_cast<std::size_t>(((i % nn) + nn) % nn);
}

void require_nonempty(const GridSpec& g, const char* what) {
  if (g.width == 0 || g.height == 0) throw SignalProcessingError(std::string(what) + ": empty image");
}

// Connected components (8-neighbourhood) of pixels at or above `threshold`.
struct Component {
  FrequencyBin peak;
  double peak_value = 0.0;
  bool contains_centre = false;
};

std::vector<Component> label_components(const ScalarFieldMap& mag, double threshold) {
  const std::size_t w = mag.width(), h = mag.height();
  const std::size_t cx = w / 2, cy = h / 2;
  std::vector<int> label(w * h, -1);
  std::vector<Component> comps;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < w * h; ++start) {
    if (label[start] >= 0 || mag.values[start] < threshold) continue;
    const int id = static_cast<int>(comps.size());
    comps.push_back({});
    Component& c = comps.back();
    c.peak_value = -1.0;
    label[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const std::size_t x = p % w, y = p / w;
      if (mag.values[p] > c.peak_value) {
        c.peak_value = mag.values[p];
        c.peak = {static_cast<int>(x) - static_cast<int>(cx), static_cast<int>(y) - static_cast<int>(cy)};
      }
      if (x == cx && y == cy) c.contains_centre = true;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const long long nx = static_cast<long long>(x) + dx, ny = static_cast<long long>(y) + dy;
          if (nx < 0 || ny < 0 || nx >= static_cast<long long>(w) || ny >= static_cast<long long>(h)) continue;
          const std::size_t q = static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx);
          if (label[q] >= 0 || mag.values[q] < threshold) continue;
          label[q] = id;
          stack.push_back(q);
        }
    }
  }
  return comps;
}

}  // namespace

BeamMap gaussian_beam(double power_mW, double sigma_um, const GridSpec& grid) {
  if (!(power_mW >= 0.0)) throw DomainError("beam power must be non-negative");
  if (!(sigma_um > 0.0)) throw DomainError("beam sigma must be positive");
  require_nonempty(grid, "gaussian_beam");
  const double sigma_mm = sigma_um * 1e-3;
  BeamMap beam;
  beam.peak = power_mW / (two_pi * sigma_mm * sigma_mm);
  beam.intensity = ScalarFieldMap(grid);
  const double cx = static_cast<double>(grid.width / 2), cy = static_cast<double>(grid.height / 2);
  for (std::size_t y = 0; y < grid.height; ++y)
    for (std::size_t x = 0; x < grid.width; ++x) {
      const double dx = (static_cast<double>(x) - cx) * grid.pixel_pitch;
      const double dy = (static_cast<double>(y) - cy) * grid.pixel_pitch;
      beam.intensity.at(x, y) = beam.peak * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma_um * sigma_um));
    }
  const double extent = static_cast<double>(std::min(grid.width, grid.height)) * grid.pixel_pitch;
  beam.grid_too_small = extent < 2.0 * sigma_um;
  return beam;
}

ComplexFieldMap make_field(const ScalarFieldMap& amplitude_squared, const ScalarFieldMap& phase) {
  require_same_grid(amplitude_squared.grid, phase.grid, "make_field");
  ComplexFieldMap f(amplitude_squared.grid);
  for (std::size_t i = 0; i < f.values.size(); ++i)
    f.values[i] = std::polar(std::sqrt(std::max(amplitude_squared.values[i], 0.0)), phase.values[i]);
  return f;
}

Carrier carrier_from_period(double period_px, double angle_rad) {
  if (!(period_px > 0.0)) throw DomainError("fringe period must be positive");
  const double k = two_pi / period_px;
  return {k * std::cos(angle_rad), k * std::sin(angle_rad)};
}

double carrier_bins(const Carrier& carrier, const GridSpec& grid) {
  const double fx = carrier.kx * static_cast<double>(grid.width) / two_pi;
  const double fy = carrier.ky * static_cast<double>(grid.height) / two_pi;
  return std::hypot(fx, fy);
}

ScalarFieldMap synthesize_interferogram(const ComplexFieldMap& signal, double ref_amplitude,
                                        const Carrier& carrier, double ref_curvature) {
  require_nonempty(signal.grid, "synthesize_interferogram");
  const double bins = carrier_bins(carrier, signal.grid);
  if (bins < 4.0) {
    std::ostringstream msg;
    msg << "carrier sits " << bins << " FFT bins from DC; at least 4 are needed to separate the "
        << "sideband, increase the fringe angle (shorter fringe period)";
    throw SignalProcessingError(msg.str());
  }
  const double fx = carrier.kx * static_cast<double>(signal.width()) / two_pi;
  const double fy = carrier.ky * static_cast<double>(signal.height()) / two_pi;
  if (std::abs(fx) >= static_cast<double>(signal.width()) / 2.0 ||
      std::abs(fy) >= static_cast<double>(signal.height()) / 2.0)
    throw SignalProcessingError("carrier exceeds the Nyquist limit; decrease the fringe angle");

  ScalarFieldMap out(signal.grid);
  const double cx = static_cast<double>(signal.width() / 2), cy = static_cast<double>(signal.height() / 2);
  for (std::size_t y = 0; y < signal.height(); ++y)
    for (std::size_t x = 0; x < signal.width(); ++x) {
      const double xd = static_cast<double>(x), yd = static_cast<double>(y);
      const double rho2 = (xd - cx) * (xd - cx) + (yd - cy) * (yd - cy);
      const cplx s = signal.at(x, y) * std::polar(1.0, carrier.kx * xd + carrier.ky * yd);
      const cplx r = std::polar(ref_amplitude, ref_curvature * rho2);
      out.at(x, y) = std::norm(s + r);
    }
  return out;
}

void add_noise(ScalarFieldMap& image, const NoiseModel& noise, std::mt19937_64& rng) {
  if (noise.intensity_jitter < 0.0 || noise.read_noise < 0.0 || noise.photons_per_unit < 0.0)
    throw DomainError("noise parameters must be non-negative");
  std::normal_distribution<double> normal(0.0, 1.0);
  const double gain = 1.0 + noise.intensity_jitter * normal(rng);
  for (double& v : image.values) {
    v *= gain;
    if (noise.photons_per_unit > 0.0) v += std::sqrt(std::max(v, 0.0) / noise.photons_per_unit) * normal(rng);
    if (noise.read_noise > 0.0) v += noise.read_noise * normal(rng);
    v = std::max(v, 0.0);
  }
}

ScalarFieldMap spectrum_magnitude(const ScalarFieldMap& image) {
  require_nonempty(image.grid, "spectrum_magnitude");
  const std::size_t w = image.width(), h = image.height();
  std::vector<cplx> buf(image.values.begin(), image.values.end());
  detail::fft2d(buf, w, h, false);
  ScalarFieldMap mag(image.grid);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      mag.at((x + w / 2) % w, (y + h / 2) % h) = std::abs(buf[y * w + x]);
  return mag;
}

CarrierPeaks locate_carrier_peaks(const ScalarFieldMap& magnitude) {
  require_nonempty(magnitude.grid, "locate_carrier_peaks");
  const double peak = *std::max_element(magnitude.values.begin(), magnitude.values.end());
  if (!(peak > 0.0) || !std::isfinite(peak))
    throw SignalProcessingError("carrier detection failed: spectrum is empty");
  const double floor = 1e-9 * peak;
  double threshold = peak;
  std::size_t last_count = 1;
  for (int step = 1; threshold > floor; ++step) {
    threshold *= 0.9;
    const auto comps = label_components(magnitude, threshold);
    last_count = comps.size();
    if (comps.size() != 3) continue;
    const auto dc = std::find_if(comps.begin(), comps.end(), [](const Component& c) { return c.contains_centre; });
    if (dc == comps.end()) continue;
    std::vector<FrequencyBin> side;
    for (auto it = comps.begin(); it != comps.end(); ++it)
      if (it != dc) side.push_back(it->peak);
    const FrequencyBin& a = side[0];
    const FrequencyBin& b = side[1];
    if (std::abs(a.fx + b.fx) > 1 || std::abs(a.fy + b.fy) > 1) continue;
    const bool a_plus = a.fx > 0 || (a.fx == 0 && a.fy > 0);
    CarrierPeaks out;
    out.dc = dc->peak;
    out.plus = a_plus ? a : b;
    out.minus = a_plus ? b : a;
    out.threshold = threshold / peak;
    out.steps = step;
    return out;
  }
  throw SignalProcessingError("carrier detection failed: no threshold isolates DC and one sideband pair (" +
                              std::to_string(last_count) + " components at the floor); fringes missing or ambiguous");
}

Demodulated demodulate(const ScalarFieldMap& interferogram, const DemodulationOptions& options) {
  require_nonempty(interferogram.grid, "demodulate");
  const std::size_t w = interferogram.width(), h = interferogram.height();
  std::vector<cplx> spec(interferogram.values.begin(), interferogram.values.end());
  detail::fft2d(spec, w, h, false);

  CarrierPeaks peaks;
  if (options.peaks) {
    peaks = *options.peaks;
  } else {
    ScalarFieldMap mag(interferogram.grid);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) mag.at((x + w / 2) % w, (y + h / 2) % h) = std::abs(spec[y * w + x]);
    peaks = locate_carrier_peaks(mag);
  }
  const FrequencyBin p = options.use_minus ? peaks.minus : peaks.plus;
  const double separation = std::hypot(p.fx - peaks.dc.fx, p.fy - peaks.dc.fy);
  const double radius = options.window_radius > 0.0 ? options.window_radius : 0.5 * separation;
  if (!(radius > 0.0)) throw SignalProcessingError("sideband coincides with DC");
  const double edge = std::clamp(options.edge_width, 0.0, radius);
  const double inner = radius - edge;

  std::vector<cplx> shifted(w * h, cplx(0.0, 0.0));
  for (std::size_t v = 0; v < h; ++v)
    for (std::size_t u = 0; u < w; ++u) {
      // Offset of this bin from the chosen peak, wrapped onto the periodic spectrum.
      const int du = signed_frequency(wrap_index(static_cast<long long>(u) - p.fx, w), w);
      const int dv = signed_frequency(wrap_index(static_cast<long long>(v) - p.fy, h), h);
      const double d = std::hypot(du, dv);
      double weight = 0.0;
      if (d <= inner) weight = 1.0;
      else if (d < radius) weight = 0.5 * (1.0 + std::cos(units::pi * (d - inner) / edge));
      if (weight == 0.0) continue;
      shifted[wrap_index(dv, h) * w + wrap_index(du, w)] = weight * spec[v * w + u];
    }
  detail::fft2d(shifted, w, h, true);

  Demodulated out;
  out.peaks = peaks;
  out.field = ComplexFieldMap(interferogram.grid);
  out.phase = ScalarFieldMap(interferogram.grid);
  for (std::size_t i = 0; i < w * h; ++i) {
    out.field.values[i] = shifted[i];
    double a = std::arg(shifted[i]);
    if (a <= -units::pi) a = units::pi;
    out.phase.values[i] = a;
  }
  return out;
}

ScalarFieldMap demodulate_phase(const ScalarFieldMap& interferogram, double window_radius) {
  DemodulationOptions opt;
  opt.window_radius = window_radius;
  return demodulate(interferogram, opt).phase;
}

UnwrapResult unwrap_phase(const ScalarFieldMap& wrapped) {
  require_nonempty(wrapped.grid, "unwrap_phase");
  const std::size_t w = wrapped.width(), h = wrapped.height();
  const std::size_t cx = w / 2, cy = h / 2;
  UnwrapResult r;
  r.phase = ScalarFieldMap(wrapped.grid);
  ScalarFieldMap& out = r.phase;

  out.at(cx, cy) = wrapped.at(cx, cy);
  for (std::size_t y = cy + 1; y < h; ++y)
    out.at(cx, y) = out.at(cx, y - 1) + wrap_to_pi(wrapped.at(cx, y) - wrapped.at(cx, y - 1));
  for (std::size_t y = cy; y-- > 0;)
    out.at(cx, y) = out.at(cx, y + 1) + wrap_to_pi(wrapped.at(cx, y) - wrapped.at(cx, y + 1));

  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = cx + 1; x < w; ++x)
      out.at(x, y) = out.at(x - 1, y) + wrap_to_pi(wrapped.at(x, y) - wrapped.at(x - 1, y));
    for (std::size_t x = cx; x-- > 0;)
      out.at(x, y) = out.at(x + 1, y) + wrap_to_pi(wrapped.at(x, y) - wrapped.at(x + 1, y));
  }

  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      if (x + 1 < w && std::abs(out.at(x + 1, y) - out.at(x, y)) > units::pi) ++r.residual_jumps;
      if (y + 1 < h && std::abs(out.at(x, y + 1) - out.at(x, y)) > units::pi) ++r.residual_jumps;
    }
  return r;
}

ScalarFieldMap subtract_reference(const ScalarFieldMap& high, const ScalarFieldMap& low) {
  require_same_grid(high.grid, low.grid, "subtract_reference");
  ScalarFieldMap out(high.grid);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = high.values[i] - low.values[i];
  return out;
}

ScalarFieldMap subtract_reference(const ScalarFieldMap& high, const ScalarFieldMap& low,
                                  const ScalarFieldMap& intensity, double zero_fraction) {
  require_same_grid(high.grid, intensity.grid, "subtract_reference");
  if (!(zero_fraction > 0.0)) throw DomainError("zero_fraction must be positive");
  ScalarFieldMap out = subtract_reference(high, low);
  const double imax = *std::max_element(intensity.values.begin(), intensity.values.end());
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    if (intensity.values[i] <= zero_fraction * imax) {
      sum += out.values[i];
      ++count;
    }
  if (count == 0) throw SignalProcessingError("no low-intensity pixels to anchor the phase difference");
  const double offset = sum / static_cast<double>(count);
  for (double& v : out.values) v -= offset;
  return out;
}

PhaseShiftCurve bin_by_intensity(const ScalarFieldMap& phase, const ScalarFieldMap& intensity,
                                 const BinningOptions& options) {
  require_same_grid(phase.grid, intensity.grid, "bin_by_intensity");
  if (options.n_bins < 2) throw DomainError("bin_by_intensity needs at least 2 bins");
  if (!(options.tolerance > 0.0)) throw DomainError("bin tolerance must be positive");
  const std::size_t w = phase.width(), h = phase.height(), b = options.border;
  if (2 * b >= w || 2 * b >= h)
    throw SignalProcessingError("bin_by_intensity: border leaves no pixels");

  double imax = 0.0;
  for (std::size_t y = b; y < h - b; ++y)
    for (std::size_t x = b; x < w - b; ++x) imax = std::max(imax, intensity.at(x, y));
  if (!(imax > 0.0)) throw SignalProcessingError("bin_by_intensity: intensity map has no positive pixels");

  const std::size_t nb = options.n_bins;
  const double spacing = imax / static_cast<double>(nb - 1);
  const double half = options.tolerance * imax;
  std::vector<double> sum_i(nb, 0.0), sum_p(nb, 0.0), sum_sq(nb, 0.0);
  std::vector<std::size_t> count(nb, 0);

  auto bin_range = [&](double v) {
    const double lo = std::ceil((v - half) / spacing - 1e-12);
    const double hi = std::floor((v + half) / spacing + 1e-12);
    return std::pair<long long, long long>{std::max(0LL, static_cast<long long>(lo)),
                                           std::min(static_cast<long long>(nb) - 1, static_cast<long long>(hi))};
  };
  auto for_each_member = [&](auto&& fn) {
    for (std::size_t y = b; y < h - b; ++y)
      for (std::size_t x = b; x < w - b; ++x) {
        const double v = intensity.at(x, y);
        const auto [lo, hi] = bin_range(v);
        for (long long j = lo; j <= hi; ++j)
          if (std::abs(v - static_cast<double>(j) * spacing) <= half) fn(static_cast<std::size_t>(j), v, phase.at(x, y));
      }
  };
  for_each_member([&](std::size_t j, double v, double p) {
    sum_i[j] += v;
    sum_p[j] += p;
    ++count[j];
  });
  std::vector<double> mean_p(nb, 0.0);
  for (std::size_t j = 0; j < nb; ++j)
    if (count[j]) mean_p[j] = sum_p[j] / static_cast<double>(count[j]);
  for_each_member([&](std::size_t j, double, double p) { sum_sq[j] += (p - mean_p[j]) * (p - mean_p[j]); });

  PhaseShiftCurve curve;
  for (std::size_t j = 0; j < nb; ++j) {
    if (!count[j]) continue;
    const double n = static_cast<double>(count[j]);
    curve.intensities.push_back(sum_i[j] / n);
    curve.mean_phase.push_back(mean_p[j]);
    curve.std_phase.push_back(std::sqrt(sum_sq[j] / n));
    curve.pixel_counts.push_back(count[j]);
  }
  if (curve.size() == 0) throw SignalProcessingError("bin_by_intensity: no pixel falls in any bin");

  if (options.anchor) {
    double offset = curve.mean_phase[0];
    if (curve.size() >= 2) {
      const double slope = (curve.mean_phase[1] - curve.mean_phase[0]) / (curve.intensities[1] - curve.intensities[0]);
      offset = curve.mean_phase[0] - slope * curve.intensities[0];
    }
    for (double& p : curve.mean_phase) p -= offset;
  }
  curve.validate();
  return curve;
}

Extraction extract_phase_curve(const ScalarFieldMap& high, const ScalarFieldMap& low,
                               const ScalarFieldMap& intensity, const ExtractionOptions& options) {
  require_same_grid(high.grid, low.grid, "extract_phase_curve (high vs low)");
  require_same_grid(high.grid, intensity.grid, "extract_phase_curve (images vs intensity)");
  DemodulationOptions demod = options.demodulation;
  const Demodulated lo = demodulate(low, demod);
  demod.peaks = lo.peaks;
  const Demodulated hi = demodulate(high, demod);
  const UnwrapResult uh = unwrap_phase(hi.phase);
  const UnwrapResult ul = unwrap_phase(lo.phase);

  Extraction out;
  out.phase = subtract_reference(uh.phase, ul.phase, intensity);
  out.curve = bin_by_intensity(out.phase, intensity, options.binning);
  out.peaks = lo.peaks;
  out.residual_jumps = uh.residual_jumps + ul.residual_jumps;
  return out;
}

}  // namespace rydkerr
