#include "rydkerr/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rydkerr/errors.hpp"

namespace rydkerr {

using nlohmann::json;

namespace {

double require(const std::optional<double>& value, const char* field) {
  if (!value) throw ConfigError(std::string("missing required config field '") + field + "'");
  return *value;
}

void require_positive(double value, const std::string& field) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw ConfigError("config field '" + field + "' must be finite and positive");
}

void require_positive(const std::optional<double>& value, const std::string& field) {
  if (value) require_positive(*value, field);
}

double get_number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError("config field '" + key + "' must be a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ConfigError("config field '" + key + "' must be an integer");
  return j.get<int>();
}

std::map<int, double> get_level_map(const json& j, const std::string& key) {
  if (!j.is_object()) throw ConfigError("config field '" + key + "' must be an object keyed by n");
  std::map<int, double> out;
  for (const auto& [k, v] : j.items()) {
    int n = 0;
    std::size_t used = 0;
    try {
      n = std::stoi(k, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != k.size()) throw ConfigError("config field '" + key + "' has non-integer key '" + k + "'");
    out[n] = get_number(v, key + "." + k);
  }
  return out;
}

json level_map_to_json(const std::map<int, double>& m) {
  json out = json::object();
  for (const auto& [n, v] : m) out[std::to_string(n)] = v;
  return out;
}

void parse_blockade(const json& j, BlockadeMode& mode, std::vector<std::string>& unknown) {
  if (!j.is_object()) throw ConfigError("config field 'blockade' must be an object");
  for (const auto& [key, value] : j.items()) {
    const std::string path = "blockade." + key;
    if (key == "mode" || key == "variant") {
      if (!value.is_string()) throw ConfigError("config field '" + path + "' must be a string");
      mode.variant = parse_blockade_variant(value.get<std::string>());
    } else if (key == "broadening_constant") {
      mode.broadening_constant = get_number(value, path);
    } else if (key == "isat_amplitude") {
      mode.isat_amplitude = get_number(value, path);
    } else if (key == "isat_exponent") {
      mode.isat_exponent = get_number(value, path);
    } else if (key == "isat_overrides") {
      mode.isat_overrides = get_level_map(value, path);
    } else if (key == "saturation_target") {
      if (!value.is_string()) throw ConfigError("config field '" + path + "' must be a string");
      mode.saturation_target = parse_saturation_target(value.get<std::string>());
    } else {
      unknown.push_back(path);
    }
  }
}

}  // namespace

double ExcitonSeriesConfig::rydberg() const { return require(rydberg_energy, "rydberg_energy"); }
double ExcitonSeriesConfig::coherence() const { return require(coherence_radius, "coherence_radius"); }
double ExcitonSeriesConfig::background_permittivity() const { return require(epsilon_b, "epsilon_b"); }
double ExcitonSeriesConfig::lt_splitting() const { return require(delta_lt, "delta_lt"); }

double ExcitonSeriesConfig::chi3_energy_unit() const {
  return chi3_energy_scale ? *chi3_energy_scale : rydberg();
}

double ExcitonSeriesConfig::base_linewidth(int n) const {
  if (auto it = base_linewidths.find(n); it != base_linewidths.end()) return it->second;
  if (!linewidth_scale)
    throw ConfigError("missing required config field 'linewidth_scale' (no base linewidth for n=" +
                      std::to_string(n) + ")");
  return *linewidth_scale / (static_cast<double>(n) * n * n);
}

double ExcitonSeriesConfig::linewidth(int n) const { return base_linewidth(n) + extra_broadening; }

void ExcitonSeriesConfig::validate() const {
  require_positive(gap_energy, "gap_energy");
  require_positive(rydberg_energy, "rydberg_energy");
  if (!(quantum_defect >= 0.0 && quantum_defect < 1.0))
    throw ConfigError("config field 'quantum_defect' must lie in [0, 1)");
  require_positive(bohr_radius, "bohr_radius");
  require_positive(coherence_radius, "coherence_radius");
  require_positive(epsilon_b, "epsilon_b");
  require_positive(delta_lt, "delta_lt");
  require_positive(linewidth_scale, "linewidth_scale");
  for (const auto& [n, g] : base_linewidths) require_positive(g, "base_linewidths." + std::to_string(n));
  if (!(extra_broadening >= 0.0) || !std::isfinite(extra_broadening))
    throw ConfigError("config field 'extra_broadening' must be finite and non-negative");
  if (n_min < 2) throw ConfigError("config field 'n_min' must be at least 2");
  if (n_max < n_min) throw ConfigError("config field 'n_max' must not be below n_min");
  // A partial table without a scale would fail later; an absent one is
  // reported by the accessor when a linewidth is first needed.
  if (!linewidth_scale && !base_linewidths.empty()) {
    for (int n = n_min; n <= n_max; ++n)
      if (!base_linewidths.count(n))
        throw ConfigError("config field 'base_linewidths' lacks n=" + std::to_string(n) +
                          " and 'linewidth_scale' is unset");
  }
  if (!std::isfinite(chi3_0) || chi3_0 < 0.0)
    throw ConfigError("config field 'chi3_0' must be finite and non-negative");
  for (auto [v, name] : {std::pair{a_t, "A_T"}, {b_t, "B_T"}, {gamma_exp, "gamma_exp"},
                         {beta_exp, "beta_exp"}})
    if (!std::isfinite(v)) throw ConfigError(std::string("config field '") + name + "' must be finite");
  require_positive(crystal_length, "crystal_length");
  require_positive(wavelength, "wavelength");
  require_positive(vacuum_impedance, "vacuum_impedance");
  require_positive(chi3_energy_scale, "chi3_energy_scale");
  blockade.validate();
}

ExcitonSeriesConfig default_config() { return ExcitonSeriesConfig{}; }

LoadedConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  LoadedConfig result;
  ExcitonSeriesConfig& c = result.config;
  std::vector<std::string> unknown;
  for (const auto& [key, value] : doc.items()) {
    if (key == "gap_energy") c.gap_energy = get_number(value, key);
    else if (key == "rydberg_energy") c.rydberg_energy = get_number(value, key);
    else if (key == "quantum_defect") c.quantum_defect = get_number(value, key);
    else if (key == "bohr_radius") c.bohr_radius = get_number(value, key);
    else if (key == "coherence_radius") c.coherence_radius = get_number(value, key);
    else if (key == "epsilon_b") c.epsilon_b = get_number(value, key);
    else if (key == "delta_lt") c.delta_lt = get_number(value, key);
    else if (key == "linewidth_scale") c.linewidth_scale = get_number(value, key);
    else if (key == "base_linewidths") c.base_linewidths = get_level_map(value, key);
    else if (key == "extra_broadening") c.extra_broadening = get_number(value, key);
    else if (key == "n_min") c.n_min = get_int(value, key);
    else if (key == "n_max") c.n_max = get_int(value, key);
    else if (key == "chi3_0") c.chi3_0 = get_number(value, key);
    else if (key == "A_T") c.a_t = get_number(value, key);
    else if (key == "B_T") c.b_t = get_number(value, key);
    else if (key == "gamma_exp") c.gamma_exp = get_number(value, key);
    else if (key == "beta_exp") c.beta_exp = get_number(value, key);
    else if (key == "crystal_length") c.crystal_length = get_number(value, key);
    else if (key == "wavelength") c.wavelength = get_number(value, key);
    else if (key == "vacuum_impedance") c.vacuum_impedance = get_number(value, key);
    else if (key == "chi3_energy_scale") c.chi3_energy_scale = get_number(value, key);
    else if (key == "blockade") parse_blockade(value, c.blockade, unknown);
    else unknown.push_back(key);
  }
  if (!unknown.empty()) {
    std::string msg = "ignored unknown config fields:";
    for (const auto& k : unknown) msg += " " + k;
    result.warnings.push_back(msg);
  }
  c.validate();
  return result;
}

LoadedConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExcitonSeriesConfig& c) {
  json j;
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
  };
  j["gap_energy"] = c.gap_energy;
  put("rydberg_energy", c.rydberg_energy);
  j["quantum_defect"] = c.quantum_defect;
  j["bohr_radius"] = c.bohr_radius;
  put("coherence_radius", c.coherence_radius);
  put("epsilon_b", c.epsilon_b);
  put("delta_lt", c.delta_lt);
  put("linewidth_scale", c.linewidth_scale);
  if (!c.base_linewidths.empty()) j["base_linewidths"] = level_map_to_json(c.base_linewidths);
  j["extra_broadening"] = c.extra_broadening;
  j["n_min"] = c.n_min;
  j["n_max"] = c.n_max;
  j["chi3_0"] = c.chi3_0;
  j["A_T"] = c.a_t;
  j["B_T"] = c.b_t;
  j["gamma_exp"] = c.gamma_exp;
  j["beta_exp"] = c.beta_exp;
  j["crystal_length"] = c.crystal_length;
  put("wavelength", c.wavelength);
  j["vacuum_impedance"] = c.vacuum_impedance;
  put("chi3_energy_scale", c.chi3_energy_scale);

  json b;
  b["mode"] = std::string(to_string(c.blockade.variant));
  b["broadening_constant"] = c.blockade.broadening_constant;
  b["isat_amplitude"] = c.blockade.isat_amplitude;
  b["isat_exponent"] = c.blockade.isat_exponent;
  if (!c.blockade.isat_overrides.empty()) b["isat_overrides"] = level_map_to_json(c.blockade.isat_overrides);
  b["saturation_target"] = std::string(to_string(c.blockade.saturation_target));
  j["blockade"] = b;
  return j.dump(2) + "\n";
}

double exciton_energy(int n, const ExcitonSeriesConfig& cfg) {
  if (n < cfg.n_min)
    throw DomainError("principal quantum number " + std::to_string(n) + " is below n_min=" +
                      std::to_string(cfg.n_min));
  const double neff = n - cfg.quantum_defect;
  if (!(neff > 0.0)) throw DomainError("n - quantum_defect must be positive");
  return cfg.gap_energy - cfg.rydberg() / (neff * neff);
}

SpectralGrid::SpectralGrid(std::vector<double> energies) : energies_(std::move(energies)) {
  if (energies_.empty()) throw DomainError("spectral grid is empty");
  for (std::size_t i = 0; i < energies_.size(); ++i) {
    if (!std::isfinite(energies_[i])) throw DomainError("spectral grid contains a non-finite energy");
    if (i > 0 && !(energies_[i] > energies_[i - 1]))
      throw DomainError("spectral grid must be strictly increasing");
  }
}

SpectralGrid SpectralGrid::uniform(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw DomainError("uniform grid needs step > 0 and hi >= lo");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5)) + 1;
  std::vector<double> e(count);
  for (std::size_t i = 0; i < count; ++i) e[i] = lo + static_cast<double>(i) * step;
  return SpectralGrid(std::move(e));
}

SpectralGrid SpectralGrid::from_binding_energy(const ExcitonSeriesConfig& cfg, double eb_min_meV,
                                               double eb_max_meV, double step_ueV) {
  if (!(eb_max_meV >= eb_min_meV)) throw DomainError("binding-energy range is empty");
  return uniform(cfg.gap_energy - eb_max_meV * 1e-3, cfg.gap_energy - eb_min_meV * 1e-3,
                 step_ueV * 1e-6);
}

}  // namespace rydkerr
