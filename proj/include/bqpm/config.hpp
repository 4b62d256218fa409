#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "bqpm/phasematch.hpp"
#include "bqpm/simulate.hpp"

namespace bqpm {

// Compensation crystal: same cut as the source crystal, oriented to remove
// birefringent phase.
struct CompensatorConfig {
  double length_mm = 0.0;
  double temperature_c = 25.0;
};

// Brewster-window polarizing filter in each collection arm.  Transmissions
// are per-photon intensity transmissions; t_v defaults to 1/sqrt(R) so that
// the window pair levels the source's VV:HH amplitude imbalance.
struct BrewsterConfig {
  bool enabled = false;
  double t_h = 1.0;
  double t_v = 1.0;
};

struct SimulationConfig {
  double duration_s = 1.0;
  std::uint64_t seed = 0;
  std::optional<double> pair_rate_per_s;
  bool derive_from_brightness = false;
  std::optional<double> spectral_brightness_per_s_mw_nm;
};

// Declarative description of one experimental configuration.  Parsed
// strictly: unknown keys and malformed values fail with a path-qualified
// ConfigError before any computation starts.
struct ExperimentConfig {
  // crystal
  std::optional<double> poling_period_um;  // empty: solve for degeneracy
  int qpm_order = 1;
  double length_mm = 0.0;
  double temperature_c = 25.0;
  // pump
  double pump_wavelength_nm = 0.0;
  double pump_power_mw = 1.0;
  std::string pump_polarization = "z";
  // source
  double amplitude_ratio = 14.83;  // VV:HH intensity ratio R = d33^2/d32^2
  // optional elements
  std::optional<CompensatorConfig> compensator;
  BrewsterConfig brewster;
  // detection + simulation
  DetectionChain detection;
  SimulationConfig simulation;
  // paths
  std::optional<std::string> output_dir;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);

  // Pump wavelength in the internal unit (um).
  double pump_um() const { return pump_wavelength_nm * 1e-3; }

  // Crystal with the configured period, or the degeneracy-solved one if the
  // config leaves the period out.
  CrystalSpec crystal(const DispersionSet& disp) const;

  // Crystal re-solved for exact degeneracy regardless of the configured
  // period (spectral quantities are quoted at the matched point).
  CrystalSpec solved_crystal(const DispersionSet& disp) const;

  // Fully resolved config (defaults filled in), keys sorted; the input to
  // the provenance hash.
  nlohmann::json canonical_json() const;

  // FNV-1a (64 bit) over the canonical serialization.
  std::uint64_t config_hash() const;
};

}  // namespace bqpm
