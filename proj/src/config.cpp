#include "bqpm/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "bqpm/errors.hpp"

namespace bqpm {

using nlohmann::json;

namespace {

// Wraps one JSON object for strict field-by-field consumption: every key
// that is never asked for is an unknown key and fails finish().
class ObjReader {
 public:
  ObjReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object())
      throw ConfigError("config: '" + path_ + "' must be an object");
  }

  std::string qual(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key) {
    require(key);
    return as_number(key);
  }

  std::optional<double> opt_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return as_number(key);
  }

  int integer(const std::string& key) {
    require(key);
    if (!j_.at(key).is_number_integer())
      throw ConfigError("config: '" + qual(key) + "' must be an integer");
    return j_.at(key).get<int>();
  }

  std::uint64_t opt_u64(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_number_unsigned() && !j_.at(key).is_number_integer())
      throw ConfigError("config: '" + qual(key) +
                        "' must be a non-negative integer");
    if (j_.at(key).is_number_integer() && j_.at(key).get<long long>() < 0)
      throw ConfigError("config: '" + qual(key) +
                        "' must be a non-negative integer");
    return j_.at(key).get<std::uint64_t>();
  }

  bool opt_bool(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_boolean())
      throw ConfigError("config: '" + qual(key) + "' must be a boolean");
    return j_.at(key).get<bool>();
  }

  std::string opt_string(const std::string& key, std::string fallback) {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_string())
      throw ConfigError("config: '" + qual(key) + "' must be a string");
    return j_.at(key).get<std::string>();
  }

  void finish() {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key()))
        throw ConfigError("config: unknown key '" + qual(item.key()) + "'");
  }

 private:
  void require(const std::string& key) {
    if (!has(key))
      throw ConfigError("config: missing required key '" + qual(key) + "'");
  }

  double as_number(const std::string& key) {
    if (!j_.at(key).is_number())
      throw ConfigError("config: '" + qual(key) + "' must be a number");
    const double v = j_.at(key).get<double>();
    if (!std::isfinite(v))
      throw ConfigError("config: '" + qual(key) + "' must be finite");
    return v;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void check_positive(double v, const std::string& path) {
  if (!(v > 0.0))
    throw ConfigError("config: '" + path + "' must be positive");
}

void check_fraction(double v, const std::string& path) {
  if (!(v > 0.0) || v > 1.0)
    throw ConfigError("config: '" + path + "' must lie in (0, 1]");
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig cfg;
  ObjReader root(j, "");

  {
    ObjReader crystal(root.raw("crystal"), "crystal");
    cfg.poling_period_um = crystal.opt_number("poling_period_um");
    if (cfg.poling_period_um) check_positive(*cfg.poling_period_um, "crystal.poling_period_um");
    cfg.qpm_order = crystal.integer("qpm_order");
    if (cfg.qpm_order < 1)
      throw ConfigError("config: 'crystal.qpm_order' must be >= 1");
    cfg.length_mm = crystal.number("length_mm");
    check_positive(cfg.length_mm, "crystal.length_mm");
    cfg.temperature_c = crystal.number("temperature_c");
    crystal.finish();
  }
  {
    ObjReader pump(root.raw("pump"), "pump");
    cfg.pump_wavelength_nm = pump.number("wavelength_nm");
    check_positive(cfg.pump_wavelength_nm, "pump.wavelength_nm");
    if (auto power = pump.opt_number("power_mw")) {
      if (*power < 0.0)
        throw ConfigError("config: 'pump.power_mw' must be >= 0");
      cfg.pump_power_mw = *power;
    }
    cfg.pump_polarization = pump.opt_string("polarization", "z");
    if (cfg.pump_polarization != "z")
      throw ConfigError("config: 'pump.polarization' must be \"z\" (only a "
                        "z-polarised pump is modelled)");
    pump.finish();
  }
  if (root.has("source")) {
    ObjReader source(root.raw("source"), "source");
    if (auto r = source.opt_number("amplitude_ratio")) {
      check_positive(*r, "source.amplitude_ratio");
      cfg.amplitude_ratio = *r;
    }
    source.finish();
  }
  if (root.has("compensator")) {
    ObjReader comp(root.raw("compensator"), "compensator");
    CompensatorConfig c;
    c.length_mm = comp.number("length_mm");
    if (c.length_mm < 0.0)
      throw ConfigError("config: 'compensator.length_mm' must be >= 0");
    c.temperature_c = comp.number("temperature_c");
    comp.finish();
    cfg.compensator = c;
  }
  // Brewster defaults: ideal H window, V transmission chosen to level the
  // source's amplitude imbalance (per photon: intensity 1/sqrt(R)).
  cfg.brewster.t_h = 1.0;
  cfg.brewster.t_v = 1.0 / std::sqrt(cfg.amplitude_ratio);
  if (root.has("brewster")) {
    ObjReader brewster(root.raw("brewster"), "brewster");
    cfg.brewster.enabled = brewster.opt_bool("enabled", true);
    if (auto th = brewster.opt_number("t_h")) {
      check_fraction(*th, "brewster.t_h");
      cfg.brewster.t_h = *th;
    }
    if (auto tv = brewster.opt_number("t_v")) {
      check_fraction(*tv, "brewster.t_v");
      cfg.brewster.t_v = *tv;
    }
    brewster.finish();
  }
  if (root.has("detection")) {
    ObjReader det(root.raw("detection"), "detection");
    if (auto v = det.opt_number("eta_signal")) {
      check_fraction(*v, "detection.eta_signal");
      cfg.detection.eta_signal = *v;
    }
    if (auto v = det.opt_number("eta_idler")) {
      check_fraction(*v, "detection.eta_idler");
      cfg.detection.eta_idler = *v;
    }
    if (auto v = det.opt_number("coincidence_window_ns")) {
      if (*v < 0.0)
        throw ConfigError(
            "config: 'detection.coincidence_window_ns' must be >= 0");
      cfg.detection.coincidence_window_ns = *v;
    }
    det.finish();
  }
  if (root.has("simulation")) {
    ObjReader sim(root.raw("simulation"), "simulation");
    if (auto v = sim.opt_number("duration_s")) {
      check_positive(*v, "simulation.duration_s");
      cfg.simulation.duration_s = *v;
    }
    cfg.simulation.seed = sim.opt_u64("seed", 0);
    cfg.simulation.pair_rate_per_s = sim.opt_number("pair_rate_per_s");
    if (cfg.simulation.pair_rate_per_s &&
        !(*cfg.simulation.pair_rate_per_s >= 0.0))
      throw ConfigError("config: 'simulation.pair_rate_per_s' must be >= 0");
    cfg.simulation.derive_from_brightness =
        sim.opt_bool("derive_from_brightness", false);
    cfg.simulation.spectral_brightness_per_s_mw_nm =
        sim.opt_number("spectral_brightness_per_s_mw_nm");
    if (cfg.simulation.spectral_brightness_per_s_mw_nm)
      check_positive(*cfg.simulation.spectral_brightness_per_s_mw_nm,
                     "simulation.spectral_brightness_per_s_mw_nm");
    sim.finish();
  }
  if (cfg.simulation.derive_from_brightness) {
    if (!cfg.simulation.spectral_brightness_per_s_mw_nm)
      throw ConfigError(
          "config: 'simulation.derive_from_brightness' needs "
          "'simulation.spectral_brightness_per_s_mw_nm'");
    if (cfg.simulation.pair_rate_per_s)
      throw ConfigError(
          "config: give either 'simulation.pair_rate_per_s' or "
          "'simulation.derive_from_brightness', not both");
  }
  if (root.has("paths")) {
    ObjReader paths(root.raw("paths"), "paths");
    std::string dir = paths.opt_string("output_dir", "");
    if (!dir.empty()) cfg.output_dir = dir;
    paths.finish();
  }
  root.finish();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  return from_json(j);
}

CrystalSpec ExperimentConfig::crystal(const DispersionSet& disp) const {
  CrystalSpec spec = solved_crystal(disp);
  if (poling_period_um) spec.poling_period_um = *poling_period_um;
  return spec;
}

CrystalSpec ExperimentConfig::solved_crystal(const DispersionSet& disp) const {
  CrystalSpec spec;
  spec.qpm_order = qpm_order;
  spec.length_mm = length_mm;
  spec.temperature_c = temperature_c;
  spec.poling_period_um =
      solve_poling_period(disp, pump_um(), qpm_order, temperature_c);
  return spec;
}

nlohmann::json ExperimentConfig::canonical_json() const {
  json j;
  j["crystal"]["qpm_order"] = qpm_order;
  j["crystal"]["length_mm"] = length_mm;
  j["crystal"]["temperature_c"] = temperature_c;
  if (poling_period_um) j["crystal"]["poling_period_um"] = *poling_period_um;
  j["pump"]["wavelength_nm"] = pump_wavelength_nm;
  j["pump"]["power_mw"] = pump_power_mw;
  j["pump"]["polarization"] = pump_polarization;
  j["source"]["amplitude_ratio"] = amplitude_ratio;
  if (compensator) {
    j["compensator"]["length_mm"] = compensator->length_mm;
    j["compensator"]["temperature_c"] = compensator->temperature_c;
  }
  j["brewster"]["enabled"] = brewster.enabled;
  j["brewster"]["t_h"] = brewster.t_h;
  j["brewster"]["t_v"] = brewster.t_v;
  j["detection"]["eta_signal"] = detection.eta_signal;
  j["detection"]["eta_idler"] = detection.eta_idler;
  j["detection"]["coincidence_window_ns"] = detection.coincidence_window_ns;
  j["simulation"]["duration_s"] = simulation.duration_s;
  j["simulation"]["seed"] = simulation.seed;
  if (simulation.pair_rate_per_s)
    j["simulation"]["pair_rate_per_s"] = *simulation.pair_rate_per_s;
  j["simulation"]["derive_from_brightness"] = simulation.derive_from_brightness;
  if (simulation.spectral_brightness_per_s_mw_nm)
    j["simulation"]["spectral_brightness_per_s_mw_nm"] =
        *simulation.spectral_brightness_per_s_mw_nm;
  if (output_dir) j["paths"]["output_dir"] = *output_dir;
  return j;
}

std::uint64_t ExperimentConfig::config_hash() const {
  const std::string dump = canonical_json().dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace bqpm
