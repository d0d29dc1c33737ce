#include "rydkerr/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rydkerr/config.hpp"
#include "rydkerr/curve.hpp"
#include "rydkerr/errors.hpp"
#include "rydkerr/fitting.hpp"
#include "rydkerr/interferometry.hpp"
#include "rydkerr/manifest.hpp"
#include "rydkerr/random.hpp"
#include "rydkerr/rdma.hpp"
#include "rydkerr/units.hpp"
#include "text.hpp"

namespace rydkerr {

namespace fs = std::filesystem;
using detail::format_number;
using nlohmann::json;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  std::string blockade;
};

struct SpectrumOptions {
  double eb_min = -2.0;  // meV
  double eb_max = 35.0;  // meV
  double step = 1.0;     // ueV
  std::optional<int> n_min, n_max;
  double intensity = 0.0;
  bool chi3_only = false;
  std::optional<double> chi3_0;
  std::string output = "spectrum.csv";
};

struct SynthOptions {
  std::size_t size = 512;
  double pitch = 2.5;
  std::optional<double> power;           // mW
  std::optional<double> peak_intensity;  // mW/mm^2
  double sigma = 200.0;
  std::string profile = "gaussian";
  double kerr_peak = 0.3;
  double alpha = 0.0;
  double isat = 1.0;
  std::optional<double> energy;
  double low_ratio = 50.0;
  double fringe_period = 10.0;
  double fringe_angle = 0.0;  // degrees
  double ref_ratio = 1.0;
  double ref_curvature = 0.0;
  double jitter = 0.01;
  double read_noise = 0.0;
  double photons = 0.0;
};

struct ExtractOptions {
  std::string high, low, intensity;
  std::size_t bins = 40;
  double tolerance = 0.01;
  std::size_t border = 16;
  double window_radius = 0.0;
  std::optional<double> energy;
  std::string output = "curve.csv";
};

struct FitOptions {
  std::vector<std::string> inputs;
  bool unweighted = false;
  std::optional<double> transmission;
  std::optional<double> wavelength;
  bool scaling = false;
  std::string summary = "fit_summary.csv";
};

struct PipelineOptions {
  std::string manifest;
};

struct Context {
  GlobalOptions global;
  std::ostream& out;
  std::ostream& err;

  ExcitonSeriesConfig config() const {
    LoadedConfig loaded;
    if (global.config_path.empty()) {
      loaded.config = default_config();
    } else {
      loaded = load_config(global.config_path);
    }
    for (const auto& w : loaded.warnings) err << "warning: " << w << '\n';
    if (!global.blockade.empty()) loaded.config.blockade.variant = parse_blockade_variant(global.blockade);
    return loaded.config;
  }
  fs::path out_path(const std::string& name) const {
    const fs::path p(name);
    return p.is_absolute() ? p : fs::path(global.out_dir) / p;
  }
  Metadata header() const {
    Metadata m{{"seed", std::to_string(global.seed)}};
    if (!global.config_path.empty()) m.emplace_back("config", global.config_path);
    return m;
  }
};

std::string comment_block(const Metadata& meta) {
  std::string s;
  for (const auto& [k, v] : meta) s += "# " + k + "=" + v + "\n";
  return s;
}

std::string rkf_bytes(const ScalarFieldMap& map) {
  std::ostringstream ss(std::ios::binary);
  write_rkf(ss, map);
  return ss.str();
}

double wavelength_for(double energy, const ExcitonSeriesConfig& cfg, const std::optional<double>& override_nm) {
  if (override_nm) return *override_nm;
  if (cfg.wavelength) return *cfg.wavelength;
  return units::wavelength_nm(energy);
}

int cmd_spectrum(const Context& ctx, const SpectrumOptions& o) {
  ExcitonSeriesConfig cfg = ctx.config();
  if (o.n_min) cfg.n_min = *o.n_min;
  if (o.n_max) cfg.n_max = *o.n_max;
  if (o.chi3_0) cfg.chi3_0 = *o.chi3_0;
  cfg.validate();
  if (!(o.step > 0.0)) throw ConfigError("--step must be positive");
  if (!(o.eb_min > -10.0)) throw ConfigError("grid must stay below gap + 10 meV (--eb-min > -10)");
  if (!(o.eb_max < cfg.gap_energy * 1e3)) throw ConfigError("grid must stay at positive photon energy");
  if (!(o.eb_max >= o.eb_min)) throw ConfigError("--eb-max must not be below --eb-min");
  const SpectralGrid grid = SpectralGrid::from_binding_energy(cfg, o.eb_min, o.eb_max, o.step);

  Metadata meta = ctx.header();
  meta.emplace_back("blockade", std::string(to_string(cfg.blockade.variant)));
  std::ostringstream csv;
  csv << comment_block(meta);
  if (o.chi3_only) {
    csv << "energy_eV,re_chi3,im_chi3\n";
    for (double e : grid.energies()) {
      const complex c3 = chi3(e, cfg);
      if (!std::isfinite(std::abs(c3))) throw NumericError("chi3 is not finite");
      csv << format_number(e) << ',' << format_number(c3.real()) << ',' << format_number(c3.imag()) << '\n';
    }
  } else {
    const auto chi = susceptibility_spectrum(grid, cfg);
    const auto kerr = n2_spectrum(grid, cfg, {}, cfg.blockade, o.intensity);
    write_spectrum_csv(csv, chi, kerr);
  }
  const fs::path path = ctx.out_path(o.output);
  write_file_atomic(path, csv.str());
  ctx.out << "wrote " << path.string() << " (" << grid.size() << " energies)\n";
  return exit_ok;
}

// Kerr phase as a function of local intensity for the chosen profile.
std::function<double(double)> phase_profile(const SynthOptions& o, const ExcitonSeriesConfig* cfg, double imax) {
  if (o.profile == "gaussian") {
    const double scale = imax > 0.0 ? o.kerr_peak / imax : 0.0;
    return [scale](double i) { return scale * i; };
  }
  if (o.profile == "saturable") {
    if (!(o.isat > 0.0)) throw ConfigError("--isat must be positive");
    const double a = o.alpha, s = o.isat;
    return [a, s](double i) { return saturable_model(i, a, s); };
  }
  if (o.profile == "model") {
    if (!o.energy) throw ConfigError("--profile model needs --energy");
    // Tabulate once; the model is smooth in I so linear interpolation on a
    // fine table is far below the phase resolution.
    constexpr std::size_t table = 4097;
    std::vector<double> values(table);
    for (std::size_t k = 0; k < table; ++k)
      values[k] = phase_shift(*o.energy, imax * static_cast<double>(k) / (table - 1), *cfg, cfg->blockade);
    return [values, imax](double i) {
      if (imax <= 0.0) return 0.0;
      const double u = std::clamp(i / imax, 0.0, 1.0) * (table - 1);
      const auto k = std::min(static_cast<std::size_t>(u), table - 2);
      const double f = u - static_cast<double>(k);
      return values[k] * (1.0 - f) + values[k + 1] * f;
    };
  }
  throw ConfigError("unknown --profile '" + o.profile + "' (expected gaussian, saturable or model)");
}

int cmd_synth(const Context& ctx, const SynthOptions& o) {
  std::optional<ExcitonSeriesConfig> cfg;
  if (o.profile == "model") cfg = ctx.config();
  if (o.size < 8) throw ConfigError("--size must be at least 8");
  if (!(o.low_ratio >= 1.0)) throw ConfigError("--low-ratio must be at least 1");
  if (!(o.sigma > 0.0) || !(o.pitch > 0.0)) throw ConfigError("--sigma and --pitch must be positive");
  const GridSpec grid{o.size, o.size, o.pitch};
  const double sigma_mm = o.sigma * 1e-3;
  double power = 1.0;
  if (o.peak_intensity) power = *o.peak_intensity * 2.0 * units::pi * sigma_mm * sigma_mm;
  else if (o.power) power = *o.power;

  const BeamMap high_beam = gaussian_beam(power, o.sigma, grid);
  const BeamMap low_beam = gaussian_beam(power / o.low_ratio, o.sigma, grid);
  if (high_beam.grid_too_small) ctx.err << "warning: grid is narrower than 2 sigma\n";
  const auto profile = phase_profile(o, cfg ? &*cfg : nullptr, high_beam.peak);

  ScalarFieldMap phase_high(grid), phase_low(grid), kerr(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    phase_high.values[i] = profile(high_beam.intensity.values[i]);
    phase_low.values[i] = profile(low_beam.intensity.values[i]);
    kerr.values[i] = phase_high.values[i] - phase_low.values[i];
  }
  const Carrier carrier = carrier_from_period(o.fringe_period, o.fringe_angle * units::pi / 180.0);
  const double ref_high = o.ref_ratio * std::sqrt(high_beam.peak);
  const double ref_low = ref_high / std::sqrt(o.low_ratio);
  ScalarFieldMap high = synthesize_interferogram(make_field(high_beam.intensity, phase_high), ref_high, carrier,
                                                 o.ref_curvature);
  ScalarFieldMap low = synthesize_interferogram(make_field(low_beam.intensity, phase_low), ref_low, carrier,
                                                o.ref_curvature);
  const NoiseModel noise{o.jitter, o.read_noise, o.photons};
  auto rng_high = substream(ctx.global.seed, "synth/high");
  auto rng_low = substream(ctx.global.seed, "synth/low");
  add_noise(high, noise, rng_high);
  add_noise(low, noise, rng_low);

  write_file_atomic(ctx.out_path("high.rkf"), rkf_bytes(high));
  write_file_atomic(ctx.out_path("low.rkf"), rkf_bytes(low));
  write_file_atomic(ctx.out_path("intensity.rkf"), rkf_bytes(high_beam.intensity));
  write_file_atomic(ctx.out_path("kerr_phase.rkf"), rkf_bytes(kerr));

  json meta;
  meta["seed"] = ctx.global.seed;
  meta["size"] = o.size;
  meta["pixel_pitch_um"] = o.pitch;
  meta["power_mW"] = power;
  meta["sigma_um"] = o.sigma;
  meta["peak_intensity_mW_mm2"] = high_beam.peak;
  meta["profile"] = o.profile;
  if (o.energy) meta["energy_eV"] = *o.energy;
  meta["low_ratio"] = o.low_ratio;
  meta["fringe_period_px"] = o.fringe_period;
  meta["fringe_angle_deg"] = o.fringe_angle;
  meta["carrier_bins"] = carrier_bins(carrier, grid);
  meta["max_kerr_phase_rad"] = *std::max_element(kerr.values.begin(), kerr.values.end());
  meta["min_kerr_phase_rad"] = *std::min_element(kerr.values.begin(), kerr.values.end());
  meta["noise"] = {{"intensity_jitter", o.jitter}, {"read_noise", o.read_noise}, {"photons_per_unit", o.photons}};
  meta["grid_too_small"] = high_beam.grid_too_small;
  write_file_atomic(ctx.out_path("synth.json"), meta.dump(2) + "\n");
  ctx.out << "wrote high.rkf, low.rkf, intensity.rkf, kerr_phase.rkf, synth.json to " << ctx.global.out_dir << '\n';
  return exit_ok;
}

ScalarFieldMap load_named(const std::string& path, const char* role) {
  try {
    return read_image(path);
  } catch (const Error& e) {
    throw SignalProcessingError(std::string("cannot load ") + role + " image: " + e.what());
  }
}

int cmd_extract(const Context& ctx, const ExtractOptions& o) {
  const ScalarFieldMap high = load_named(o.high, "high-power");
  const ScalarFieldMap low = load_named(o.low, "low-power");
  const ScalarFieldMap intensity = load_named(o.intensity, "intensity");
  require_same_grid(high.grid, low.grid, ("extract: " + o.high + " vs " + o.low).c_str());
  require_same_grid(high.grid, intensity.grid, ("extract: " + o.high + " vs " + o.intensity).c_str());

  ExtractionOptions opt;
  opt.demodulation.window_radius = o.window_radius;
  opt.binning.n_bins = o.bins;
  opt.binning.tolerance = o.tolerance;
  opt.binning.border = o.border;
  DemodulationOptions demod = opt.demodulation;
  try {
    demod.peaks = demodulate(low, demod).peaks;
  } catch (const SignalProcessingError& e) {
    throw SignalProcessingError("demodulation failed for " + o.low + ": " + e.what());
  }
  opt.demodulation = demod;
  Extraction ex;
  try {
    ex = extract_phase_curve(high, low, intensity, opt);
  } catch (const SignalProcessingError& e) {
    throw SignalProcessingError("extraction failed for " + o.high + ": " + e.what());
  }
  if (ex.residual_jumps > 0)
    ctx.err << "warning: " << ex.residual_jumps << " unwrapping discontinuities remain\n";

  Metadata meta = ctx.header();
  meta.emplace_back("high", o.high);
  meta.emplace_back("low", o.low);
  meta.emplace_back("carrier_fx", std::to_string(ex.peaks.plus.fx));
  meta.emplace_back("carrier_fy", std::to_string(ex.peaks.plus.fy));
  meta.emplace_back("residual_jumps", std::to_string(ex.residual_jumps));
  if (o.energy) meta.emplace_back("energy_eV", format_number(*o.energy));
  std::ostringstream csv;
  write_curve_csv(csv, ex.curve, meta);
  const fs::path path = ctx.out_path(o.output);
  write_file_atomic(path, csv.str());
  ctx.out << "wrote " << path.string() << " (" << ex.curve.size() << " bins)\n";
  return exit_ok;
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ".csv" && e.path().filename() != "fit_summary.csv")
          found.push_back(e.path());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(p);
    }
  }
  return files;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return exit_config;
  if (dynamic_cast<const SignalProcessingError*>(&e)) return exit_signal;
  return exit_numeric;
}

int cmd_fit(const Context& ctx, const FitOptions& o) {
  std::optional<ExcitonSeriesConfig> cfg;
  if (!ctx.global.config_path.empty()) cfg = ctx.config();
  const auto files = expand_inputs(o.inputs);
  if (files.empty()) throw ConfigError("fit: no curve files given");
  const Weighting weighting = o.unweighted ? Weighting::unweighted : Weighting::automatic;

  struct Row {
    std::string file;
    double energy = NAN;
    FitResult fit;
    double n2 = NAN;
  };
  std::vector<Row> rows;
  int status = exit_ok;
  for (const auto& file : files) {
    try {
      const CurveFile cf = read_curve_csv(file);
      Row row;
      row.file = file.filename().string();
      if (const auto* e = find_meta(cf.meta, "energy_eV")) row.energy = std::stod(*e);
      row.fit = fit_saturable(cf.curve, weighting);
      json report = json::parse(fit_report_json(row.fit));
      report["seed"] = ctx.global.seed;
      report["source"] = file.string();
      std::optional<double> t = o.transmission;
      if (!t && cfg && std::isfinite(row.energy)) t = transmission(row.energy, *cfg);
      if (t) {
        const double length = cfg ? cfg->crystal_length : 50.0;
        double lambda = o.wavelength.value_or(NAN);
        if (!o.wavelength) {
          if (std::isfinite(row.energy)) lambda = wavelength_for(row.energy, cfg.value_or(default_config()), {});
          else if (cfg && cfg->wavelength) lambda = *cfg->wavelength;
        }
        if (std::isfinite(lambda)) {
          const N2Estimate est = extract_n2(row.fit.param("alpha"), *t, length, lambda);
          row.n2 = est.n2;
          report["n2_mm2_per_mW"] = est.n2;
          report["z0_um"] = est.z0_um;
          report["transmission"] = *t;
          for (const auto& w : est.warnings) report["warnings"].push_back(w);
        }
      }
      if (std::isfinite(row.energy)) report["energy_eV"] = row.energy;
      fs::path name = file.filename();
      name.replace_extension(".fit.json");
      write_file_atomic(ctx.out_path(name.string()), report.dump(2) + "\n");
      rows.push_back(std::move(row));
    } catch (const std::exception& e) {
      ctx.err << "error: " << file.string() << ": " << e.what() << '\n';
      if (status == exit_ok) status = exit_code_for(e);
    }
  }

  std::ostringstream csv;
  csv << comment_block(ctx.header());
  csv << "file,energy_eV,alpha,alpha_sigma,isat,isat_sigma,n2_mm2_per_mW,converged\n";
  auto num = [](double v) { return std::isfinite(v) ? format_number(v) : std::string(std::isnan(v) ? "nan" : "inf"); };
  for (const auto& r : rows)
    csv << r.file << ',' << num(r.energy) << ',' << num(r.fit.param("alpha")) << ',' << num(r.fit.sigma("alpha"))
        << ',' << num(r.fit.param("isat")) << ',' << num(r.fit.sigma("isat")) << ',' << num(r.n2) << ','
        << (r.fit.converged ? 1 : 0) << '\n';
  write_file_atomic(ctx.out_path(o.summary), csv.str());

  if (o.scaling) {
    if (!cfg) throw ConfigError("fit --scaling needs --config for the resonance energies");
    std::vector<std::tuple<double, double, double>> pts;
    for (const auto& r : rows)
      if (std::isfinite(r.energy)) pts.emplace_back(r.energy, r.fit.param("isat"), r.fit.sigma("isat"));
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](auto& a, auto& b) { return std::get<0>(a) == std::get<0>(b); }),
              pts.end());
    if (pts.size() < 3) throw InsufficientDataError("fit --scaling needs curves tagged with energy_eV");
    std::vector<double> energies, isat, isat_sigma, absorption;
    for (const auto& [e, s, ds] : pts) {
      energies.push_back(e);
      isat.push_back(s);
      isat_sigma.push_back(ds);
      absorption.push_back(linear_absorption(e, *cfg));
    }
    const SpectralGrid grid(energies);
    std::vector<int> ns;
    std::vector<double> values;
    json per_n = json::object();
    std::set<int> candidates;
    for (double e : energies) candidates.insert(nearest_resonance(e, *cfg));
    for (int n : candidates) {
      try {
        const double v = isat_near_resonance(grid, isat, absorption, n, *cfg, isat_sigma);
        ns.push_back(n);
        values.push_back(v);
        per_n[std::to_string(n)] = v;
      } catch (const DomainError& e) {
        ctx.err << "warning: skipping n=" << n << ": " << e.what() << '\n';
      }
    }
    const FitResult law = fit_powerlaw(ns, values, cfg->quantum_defect);
    json report = json::parse(fit_report_json(law));
    report["seed"] = ctx.global.seed;
    report["isat_by_n"] = per_n;
    write_file_atomic(ctx.out_path("scaling.json"), report.dump(2) + "\n");
    ctx.out << "scaling exponent b = " << format_number(law.param("b")) << " +/- " << format_number(law.sigma("b"))
            << '\n';
  }
  ctx.out << "fitted " << rows.size() << " of " << files.size() << " curves\n";
  return status;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_pipeline(const Context& ctx, const PipelineOptions& o) {
  const PipelineManifest m = load_manifest(o.manifest);
  fs::create_directories(m.output_dir);
  const fs::path state_path = m.output_dir / ".rydkerr_state.json";
  json state = json::object();
  if (fs::exists(state_path)) {
    try {
      std::ifstream in(state_path);
      state = json::parse(in);
    } catch (const std::exception&) {
      ctx.err << "warning: ignoring unreadable pipeline state\n";
      state = json::object();
    }
  }
  const std::string config_hash = file_sha256(m.config_path);
  auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : m.output_dir / path;
  };
  auto expand = [&](std::string arg) {
    const std::map<std::string, std::string> vars = {{"${out}", m.output_dir.string()},
                                                     {"${config}", m.config_path.string()}};
    for (const auto& [k, v] : vars)
      for (auto pos = arg.find(k); pos != std::string::npos; pos = arg.find(k, pos + v.size()))
        arg.replace(pos, k.size(), v);
    return arg;
  };

  for (std::size_t idx : schedule(m)) {
    const PipelineStep& step = m.steps[idx];
    json key;
    key["command"] = step.command;
    key["args"] = step.args;
    key["config"] = config_hash;
    key["seed"] = m.seed;
    for (const auto& in : step.inputs) key["inputs"][in] = file_sha256(resolve(in));
    const std::string key_hash = sha256_hex(key.dump());

    bool fresh = state.contains(step.name) && state[step.name].value("key", "") == key_hash;
    if (fresh)
      for (const auto& o2 : step.outputs) {
        const fs::path p = resolve(o2);
        fresh = fresh && fs::exists(p) && state[step.name]["outputs"].value(o2, "") == file_sha256(p);
      }
    if (fresh) {
      ctx.out << "[skip] " << step.name << '\n';
      continue;
    }
    std::vector<std::string> argv = {"--config", m.config_path.string(), "--out", m.output_dir.string(),
                                     "--seed", std::to_string(m.seed)};
    if (!ctx.global.blockade.empty()) {
      argv.push_back("--blockade");
      argv.push_back(ctx.global.blockade);
    }
    argv.push_back(step.command);
    for (const auto& a : step.args) argv.push_back(expand(a));
    ctx.out << "[run] " << step.name << '\n';
    const int code = dispatch(argv, ctx.out, ctx.err);
    if (code != exit_ok) {
      ctx.err << "error: pipeline step '" << step.name << "' failed with exit code " << code << '\n';
      return code;
    }
    json entry;
    entry["key"] = key_hash;
    entry["outputs"] = json::object();
    for (const auto& o2 : step.outputs) {
      const fs::path p = resolve(o2);
      if (!fs::exists(p)) {
        ctx.err << "error: pipeline step '" << step.name << "' did not produce " << o2 << '\n';
        return exit_config;
      }
      entry["outputs"][o2] = file_sha256(p);
    }
    state[step.name] = entry;
    write_file_atomic(state_path, state.dump(2) + "\n");
  }
  return exit_ok;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kerr nonlinearity of Rydberg excitons: forward model and interferometric analysis", "rydkerr"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--config", g.config_path, "JSON configuration file");
  app.add_option("--out", g.out_dir, "Output directory")->capture_default_str();
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--blockade", g.blockade, "Blockade mode")
      ->check(CLI::IsMember({"none", "broadening", "saturable", "combined"}));

  SpectrumOptions sp;
  auto* spectrum = app.add_subcommand("spectrum", "Susceptibility, n2 and absorption spectra as CSV");
  spectrum->add_option("--eb-min", sp.eb_min, "Lowest binding energy [meV]")->capture_default_str();
  spectrum->add_option("--eb-max", sp.eb_max, "Highest binding energy [meV]")->capture_default_str();
  spectrum->add_option("--step", sp.step, "Grid step [ueV]")->capture_default_str();
  spectrum->add_option("--nmin", sp.n_min, "Lowest principal quantum number");
  spectrum->add_option("--nmax", sp.n_max, "Highest principal quantum number");
  spectrum->add_option("--intensity", sp.intensity, "Intensity for alpha3 [mW/mm^2]")->capture_default_str();
  spectrum->add_flag("--chi3-only", sp.chi3_only, "Write only the chi3 columns");
  spectrum->add_option("--chi3-0", sp.chi3_0, "Override chi3_0 [m^2/V^2]");
  spectrum->add_option("--output", sp.output, "File name")->capture_default_str();

  SynthOptions sy;
  auto* synth = app.add_subcommand("synth", "Synthesize a high/low power interferogram pair");
  synth->add_option("--size", sy.size, "Image side [px]")->capture_default_str();
  synth->add_option("--pitch", sy.pitch, "Pixel pitch [um]")->capture_default_str();
  auto* power_opt = synth->add_option("--power", sy.power, "Beam power [mW]");
  synth->add_option("--peak-intensity", sy.peak_intensity, "Peak intensity [mW/mm^2]")->excludes(power_opt);
  synth->add_option("--sigma", sy.sigma, "Beam sigma [um]")->capture_default_str();
  synth->add_option("--profile", sy.profile, "gaussian | saturable | model")->capture_default_str();
  synth->add_option("--kerr-peak", sy.kerr_peak, "Peak phase of the gaussian profile [rad]")->capture_default_str();
  synth->add_option("--alpha", sy.alpha, "Saturable profile slope [rad mm^2/mW]");
  synth->add_option("--isat", sy.isat, "Saturable profile I_sat [mW/mm^2]");
  synth->add_option("--energy", sy.energy, "Photon energy for the model profile [eV]");
  synth->add_option("--low-ratio", sy.low_ratio, "Power ratio of the high and low sets")->capture_default_str();
  synth->add_option("--fringe-period", sy.fringe_period, "Fringe period [px]")->capture_default_str();
  synth->add_option("--fringe-angle", sy.fringe_angle, "Fringe angle [deg]")->capture_default_str();
  synth->add_option("--ref-ratio", sy.ref_ratio, "Reference amplitude relative to the signal peak")
      ->capture_default_str();
  synth->add_option("--ref-curvature", sy.ref_curvature, "Reference wavefront curvature [rad/px^2]");
  synth->add_option("--jitter", sy.jitter, "Relative frame intensity jitter")->capture_default_str();
  synth->add_option("--read-noise", sy.read_noise, "Additive pixel noise std");
  synth->add_option("--photons", sy.photons, "Photons per intensity unit (0 disables shot noise)");

  ExtractOptions ex;
  auto* extract = app.add_subcommand("extract", "Extract the phase-shift curve from an image pair");
  extract->add_option("--high", ex.high, "High-power interferogram")->required();
  extract->add_option("--low", ex.low, "Low-power interferogram")->required();
  extract->add_option("--intensity", ex.intensity, "Intensity image [mW/mm^2]")->required();
  extract->add_option("--bins", ex.bins, "Number of intensity bins")->capture_default_str();
  extract->add_option("--tolerance", ex.tolerance, "Mask half-width as a fraction of I_max")->capture_default_str();
  extract->add_option("--border", ex.border, "Excluded frame [px]")->capture_default_str();
  extract->add_option("--window-radius", ex.window_radius, "Sideband window radius [bins]");
  extract->add_option("--energy", ex.energy, "Photon energy recorded with the curve [eV]");
  extract->add_option("--output", ex.output, "File name")->capture_default_str();

  FitOptions fi;
  auto* fit = app.add_subcommand("fit", "Fit saturable curves, extract n2 and the I_sat scaling");
  fit->add_option("inputs", fi.inputs, "Curve CSV files or directories")->required();
  fit->add_flag("--unweighted", fi.unweighted, "Ignore per-bin standard deviations");
  fit->add_option("--transmission", fi.transmission, "Linear transmission for n2");
  fit->add_option("--wavelength", fi.wavelength, "Vacuum wavelength [nm]");
  fit->add_flag("--scaling", fi.scaling, "Fit the I_sat(n) power law");
  fit->add_option("--summary", fi.summary, "Summary file name")->capture_default_str();

  PipelineOptions pi;
  auto* pipeline = app.add_subcommand("pipeline", "Run a manifest of steps, skipping up-to-date ones");
  pipeline->add_option("manifest", pi.manifest, "Manifest JSON")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }

  const Context ctx{g, out, err};
  try {
    if (!g.out_dir.empty()) fs::create_directories(g.out_dir);
    if (spectrum->parsed()) return cmd_spectrum(ctx, sp);
    if (synth->parsed()) return cmd_synth(ctx, sy);
    if (extract->parsed()) return cmd_extract(ctx, ex);
    if (fit->parsed()) return cmd_fit(ctx, fi);
    if (pipeline->parsed()) return cmd_pipeline(ctx, pi);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const SignalProcessingError& e) {
    err << "signal-processing error: " << e.what() << '\n';
    return exit_signal;
  } catch (const Error& e) {
    err << "numeric error: " << e.what() << '\n';
    return exit_numeric;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }
  return exit_usage;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return dispatch(args, out, err);
}

}  // namespace rydkerr
