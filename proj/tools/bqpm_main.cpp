// bqpm: design and analysis tool for backward quasi-phase-matched
// photon-pair sources.  Subcommands orchestrate the library modules; all
// structured output goes through ResultBundle so identical (config, seed)
// runs are byte-identical.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bqpm/analyze.hpp"
#include "bqpm/biphoton.hpp"
#include "bqpm/config.hpp"
#include "bqpm/constants.hpp"
#include "bqpm/dispersion.hpp"
#include "bqpm/errors.hpp"
#include "bqpm/io.hpp"
#include "bqpm/phasematch.hpp"
#include "bqpm/rng.hpp"
#include "bqpm/simulate.hpp"

namespace {

using bqpm::ArmSetting;
using bqpm::ChshAngles;
using bqpm::CountRecord;
using bqpm::CrystalSpec;
using bqpm::CurvePoint;
using bqpm::DispersionSet;
using bqpm::ExperimentConfig;
using bqpm::Mat4;
using bqpm::MeasurementSetting;
using bqpm::PmType;
using bqpm::ResultBundle;
using bqpm::TwoPhotonState;
using nlohmann::json;

struct GlobalOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string format = "structured";
};

ExperimentConfig require_config(const GlobalOpts& opts) {
  if (opts.config_path.empty())
    throw bqpm::InputError("this subcommand needs --config <path>");
  return ExperimentConfig::from_file(opts.config_path);
}

std::uint64_t resolve_seed(const ExperimentConfig& cfg,
                           const GlobalOpts& opts) {
  return opts.seed.value_or(cfg.simulation.seed);
}

std::string resolve_out_dir(const ExperimentConfig* cfg,
                            const GlobalOpts& opts) {
  if (!opts.out_dir.empty()) return opts.out_dir;
  if (cfg && cfg->output_dir) return *cfg->output_dir;
  return {};
}

// Named side artifact (CSV) written next to the bundle when --out is given.
struct SideFile {
  std::string name;
  std::string content;
};

void emit(const ResultBundle& bundle, const std::string& text_summary,
          const GlobalOpts& opts, const std::string& out_dir,
          const std::vector<SideFile>& files = {}) {
  if (opts.format == "text")
    std::cout << text_summary;
  else
    std::cout << bundle.serialize();
  if (!out_dir.empty()) {
    bqpm::write_text_file(out_dir + "/" + bundle.command + ".json",
                          bundle.serialize());
    for (const SideFile& f : files)
      bqpm::write_text_file(out_dir + "/" + f.name, f.content);
  }
}

// ---------------------------------------------------------------------------
// Shared state pipeline: source emission -> compensator -> Brewster windows
// ---------------------------------------------------------------------------

struct Pipeline {
  double theta_source = 0.0;
  double theta_compensator = 0.0;
  double theta_net = 0.0;
  TwoPhotonState state = TwoPhotonState::bell_phi(0.0);
};

Pipeline build_state(const ExperimentConfig& cfg, const DispersionSet& disp) {
  Pipeline p;
  const double lambda_deg_um = 2.0 * cfg.pump_um();
  p.theta_source = bqpm::birefringent_phase(disp, lambda_deg_um, cfg.length_mm,
                                            cfg.temperature_c);
  if (cfg.compensator && cfg.compensator->length_mm > 0.0)
    p.theta_compensator = bqpm::birefringent_phase(
        disp, lambda_deg_um, cfg.compensator->length_mm,
        cfg.compensator->temperature_c);
  p.theta_net = bqpm::wrap_phase(p.theta_source - p.theta_compensator);
  p.state = TwoPhotonState::source(cfg.amplitude_ratio, p.theta_net);
  if (cfg.brewster.enabled) {
    const bqpm::Element window =
        bqpm::Element::brewster_window(cfg.brewster.t_h, cfg.brewster.t_v);
    p.state = bqpm::apply(p.state, window, bqpm::Arm::Signal);
    p.state = bqpm::apply(p.state, window, bqpm::Arm::Idler);
  }
  return p;
}

// Pair generation rate feeding the counting model, before the state
// pipeline's own success probability is applied.
double resolve_pair_rate(const ExperimentConfig& cfg,
                         const DispersionSet& disp) {
  if (cfg.simulation.pair_rate_per_s) return *cfg.simulation.pair_rate_per_s;
  if (cfg.simulation.derive_from_brightness) {
    const CrystalSpec solved = cfg.solved_crystal(disp);
    const double bw_ghz =
        bqpm::bandwidth_fwhm(disp, solved, PmType::Type0, cfg.pump_um());
    const bqpm::RateEstimate est = bqpm::rate_estimate(
        *cfg.simulation.spectral_brightness_per_s_mw_nm, bw_ghz,
        2.0 * cfg.pump_um(), cfg.pump_power_mw, cfg.detection);
    return est.generated_per_s;
  }
  throw bqpm::InputError(
      "no pair rate configured: set 'simulation.pair_rate_per_s' or "
      "'simulation.derive_from_brightness'");
}

double herald_angle_deg(bqpm::Herald herald) {
  switch (herald) {
    case bqpm::Herald::H: return 0.0;
    case bqpm::Herald::V: return 90.0;
    case bqpm::Herald::D: return 45.0;
    case bqpm::Herald::A: return -45.0;
  }
  return 0.0;
}

json amplitudes_to_json(const TwoPhotonState& state) {
  json real = json::array();
  json imag = json::array();
  for (int i = 0; i < 4; ++i) {
    real.push_back(state.amplitudes()(i).real());
    imag.push_back(state.amplitudes()(i).imag());
  }
  json j;
  j["basis"] = json::array({"HH", "HV", "VH", "VV"});
  j["real"] = std::move(real);
  j["imag"] = std::move(imag);
  return j;
}

// ---------------------------------------------------------------------------
// design
// ---------------------------------------------------------------------------

void cmd_design(const GlobalOpts& opts) {
  const ExperimentConfig cfg = require_config(opts);
  const DispersionSet& disp = DispersionSet::ktp();
  const CrystalSpec solved = cfg.solved_crystal(disp);
  const CrystalSpec used = cfg.crystal(disp);
  const double pump_um = cfg.pump_um();

  json payload;
  payload["pump_wavelength_nm"] = cfg.pump_wavelength_nm;
  payload["temperature_c"] = cfg.temperature_c;
  payload["qpm_order"] = cfg.qpm_order;
  payload["degenerate_signal_um"] = 2.0 * pump_um;
  payload["poling_period_um"] = solved.poling_period_um;
  if (cfg.poling_period_um) {
    payload["configured_period_um"] = *cfg.poling_period_um;
    payload["configured_period_relative_deviation"] =
        (*cfg.poling_period_um - solved.poling_period_um) /
        solved.poling_period_um;
  }
  payload["grating_vector_rad_per_um"] =
      bqpm::grating_vector(used.poling_period_um, used.qpm_order);
  payload["pump_index_z"] =
      disp.model(bqpm::Axis::Z).index(pump_um, cfg.temperature_c);

  for (PmType type : {PmType::Type0, PmType::TypeI}) {
    const char* key = type == PmType::Type0 ? "type0" : "typeI";
    const std::vector<double> roots =
        bqpm::solve_signal_wavelength(disp, used, type, pump_um);
    payload["signal_roots_um"][key] = roots;
    // Spectral widths are quoted at the exactly matched period; a configured
    // period keeps its small detuning out of the width definition.
    const double bw = bqpm::bandwidth_fwhm(disp, solved, type, pump_um);
    payload["bandwidth_ghz"][key] = bw;
    payload["bandwidth_nm"][key] = (2.0 * pump_um * 1e3) *
                                   (2.0 * pump_um * 1e3) * bw /
                                   bqpm::kSpeedOfLight_nm_ghz;
  }

  ResultBundle bundle{cfg.config_hash(), resolve_seed(cfg, opts), "design",
                      payload};
  std::ostringstream text;
  text << "poling period (solved): " << solved.poling_period_um << " um\n";
  if (cfg.poling_period_um)
    text << "poling period (configured): " << *cfg.poling_period_um << " um\n";
  text << "degenerate signal wavelength: " << 2.0 * pump_um * 1e3 << " nm\n"
       << "grating vector: " << payload["grating_vector_rad_per_um"].get<double>()
       << " rad/um\n"
       << "bandwidth type-0: " << payload["bandwidth_ghz"]["type0"].get<double>()
       << " GHz, type-I: " << payload["bandwidth_ghz"]["typeI"].get<double>()
       << " GHz\n";
  emit(bundle, text.str(), opts, resolve_out_dir(&cfg, opts));
}

// ---------------------------------------------------------------------------
// state
// ---------------------------------------------------------------------------

void cmd_state(const GlobalOpts& opts) {
  const ExperimentConfig cfg = require_config(opts);
  const DispersionSet& disp = DispersionSet::ktp();
  const Pipeline p = build_state(cfg, disp);
  const TwoPhotonState shown = p.state.canonical();
  const Mat4 rho = shown.density();

  json payload;
  payload["amplitude_ratio"] = cfg.amplitude_ratio;
  payload["theta_source_rad"] = p.theta_source;
  payload["theta_compensator_rad"] = p.theta_compensator;
  payload["theta_net_rad"] = p.theta_net;
  payload["brewster_enabled"] = cfg.brewster.enabled;
  if (cfg.brewster.enabled) {
    payload["brewster_t_h"] = cfg.brewster.t_h;
    payload["brewster_t_v"] = cfg.brewster.t_v;
  }
  payload["amplitudes"] = amplitudes_to_json(shown);
  payload["success_probability"] = shown.success_probability();
  payload["concurrence"] = bqpm::concurrence(rho);
  payload["purity"] = bqpm::purity(rho);
  payload["pure_state_chsh_max"] = bqpm::pure_state_chsh_max(shown);
  payload["fidelity_phi_plus"] =
      bqpm::fidelity(rho, TwoPhotonState::bell_phi(0.0));
  payload["fidelity_phi_minus"] =
      bqpm::fidelity(rho, TwoPhotonState::bell_phi(bqpm::kPi));

  ResultBundle bundle{cfg.config_hash(), resolve_seed(cfg, opts), "state",
                      payload};
  std::ostringstream text;
  text << "net phase theta: " << p.theta_net << " rad\n"
       << "success probability: " << shown.success_probability() << "\n"
       << "concurrence: " << payload["concurrence"].get<double>() << "\n"
       << "max CHSH S (pure): " << payload["pure_state_chsh_max"].get<double>()
       << "\n";
  emit(bundle, text.str(), opts, resolve_out_dir(&cfg, opts));
}

// ---------------------------------------------------------------------------
// curve
// ---------------------------------------------------------------------------

struct CurveOpts {
  std::string kind;
  std::string herald = "D";
  int points = 73;
  double tau_max_ps = 60.0;
  double v0 = 1.0;
  bool counts = false;
};

void cmd_curve(const GlobalOpts& opts, const CurveOpts& cvopts) {
  const ExperimentConfig cfg = require_config(opts);
  const DispersionSet& disp = DispersionSet::ktp();
  if (cvopts.points < 2)
    throw bqpm::InputError("curve: need at least 2 points");

  json payload;
  std::vector<SideFile> files;
  std::vector<CurvePoint> external;  // x in external units for CSV
  std::string x_name, y_name;

  if (cvopts.kind == "polinterf") {
    const Pipeline p = build_state(cfg, disp);
    const bqpm::Herald herald = bqpm::herald_from_name(cvopts.herald);
    std::vector<double> angles_rad(cvopts.points);
    for (int i = 0; i < cvopts.points; ++i)
      angles_rad[i] = bqpm::deg_to_rad(360.0 * i / (cvopts.points - 1));
    const std::vector<CurvePoint> curve =
        bqpm::interference_curve(p.state, herald, angles_rad);
    external.reserve(curve.size());
    for (const CurvePoint& pt : curve)
      external.push_back({bqpm::rad_to_deg(pt.x), pt.y});
    x_name = "theta_deg";
    y_name = "coincidence_probability";
    payload["kind"] = "polinterf";
    payload["herald"] = cvopts.herald;
    payload["theta_net_rad"] = p.theta_net;
    payload["success_probability"] = p.state.success_probability();

    if (cvopts.counts) {
      const double pair_rate = resolve_pair_rate(cfg, disp) *
                               p.state.success_probability();
      std::vector<MeasurementSetting> settings;
      settings.reserve(external.size());
      for (std::size_t i = 0; i < external.size(); ++i) {
        std::ostringstream label;
        label << external[i].x;
        settings.push_back({static_cast<int>(i + 1), label.str(),
                            bqpm::linear_setting(external[i].x),
                            bqpm::linear_setting(herald_angle_deg(herald))});
      }
      const std::vector<CountRecord> records = bqpm::simulate_counts(
          p.state.density(), settings, pair_rate, cfg.detection,
          cfg.simulation.duration_s, resolve_seed(cfg, opts));
      json rows = json::array();
      for (const CountRecord& r : records)
        rows.push_back({r.setting_id, r.label, r.singles_s, r.singles_i,
                        r.coincidences, r.duration_s});
      payload["counts"] = std::move(rows);
      files.push_back({"polinterf_counts.csv", bqpm::counts_csv_text(records)});
      payload["pair_rate_per_s"] = pair_rate;
    }
  } else if (cvopts.kind == "hom") {
    if (cvopts.counts)
      throw bqpm::InputError("curve: --counts is only available for polinterf");
    const CrystalSpec solved = cfg.solved_crystal(disp);
    std::vector<double> delays(cvopts.points);
    for (int i = 0; i < cvopts.points; ++i)
      delays[i] = -cvopts.tau_max_ps +
                  2.0 * cvopts.tau_max_ps * i / (cvopts.points - 1);
    external = bqpm::hom_curve(disp, solved, PmType::Type0, cfg.pump_um(),
                               delays, cvopts.v0);
    x_name = "delay_ps";
    y_name = "coincidence_rate_norm";
    payload["kind"] = "hom";
    payload["v0"] = cvopts.v0;
    payload["poling_period_um"] = solved.poling_period_um;
  } else {
    throw bqpm::InputError("curve: --kind must be 'polinterf' or 'hom'");
  }

  {
    json rows = json::array();
    for (const CurvePoint& pt : external) rows.push_back({pt.x, pt.y});
    payload["curve"] = std::move(rows);
    payload["columns"] = {x_name, y_name};
  }
  const std::string csv = bqpm::curve_csv_text(x_name, y_name, external);
  files.insert(files.begin(), {cvopts.kind + "_curve.csv", csv});

  ResultBundle bundle{cfg.config_hash(), resolve_seed(cfg, opts), "curve",
                      payload};
  emit(bundle, csv, opts, resolve_out_dir(&cfg, opts), files);
}

// ---------------------------------------------------------------------------
// tomo
// ---------------------------------------------------------------------------

struct TomoOpts {
  std::string counts_path;
  bool simulate = false;
  int resamples = 200;
  std::string target = "phiplus";
  bool subtract_accidentals = false;
  bool no_chsh = false;
  std::optional<double> werner_p;
};

std::vector<CountRecord> subtract_accidentals(
    const std::vector<CountRecord>& records, double window_ns) {
  std::vector<CountRecord> out = records;
  for (CountRecord& r : out) {
    const double acc = static_cast<double>(r.singles_s) *
                       static_cast<double>(r.singles_i) * window_ns * 1e-9 /
                       r.duration_s;
    const double corrected =
        std::max(0.0, static_cast<double>(r.coincidences) - acc);
    r.coincidences = static_cast<std::int64_t>(std::llround(corrected));
  }
  return out;
}

void cmd_tomo(const GlobalOpts& opts, const TomoOpts& tmopts) {
  const ExperimentConfig cfg = require_config(opts);
  const DispersionSet& disp = DispersionSet::ktp();
  const bqpm::TomographySettings& table =
      bqpm::TomographySettings::standard16();
  const std::uint64_t seed = resolve_seed(cfg, opts);

  if (tmopts.simulate != tmopts.counts_path.empty())
    throw bqpm::InputError(
        "tomo: give exactly one of --counts <file> or --simulate");

  json payload;
  std::vector<SideFile> files;
  std::vector<CountRecord> raw;
  if (tmopts.simulate) {
    const Pipeline p = build_state(cfg, disp);
    const double pair_rate =
        resolve_pair_rate(cfg, disp) * p.state.success_probability();
    Mat4 rho = p.state.density();
    if (tmopts.werner_p) {
      rho = bqpm::werner_mix(p.state, *tmopts.werner_p);
      payload["werner_p"] = *tmopts.werner_p;
    }
    raw = bqpm::simulate_counts(rho, table.settings(), pair_rate,
                                cfg.detection, cfg.simulation.duration_s,
                                seed);
    payload["input"] = "simulated";
    payload["pair_rate_per_s"] = pair_rate;
    files.push_back({"tomo_counts.csv", bqpm::counts_csv_text(raw)});
  } else {
    if (tmopts.werner_p)
      throw bqpm::InputError("tomo: --werner-p needs --simulate");
    raw = table.match(bqpm::read_counts_csv(tmopts.counts_path));
    payload["input"] = tmopts.counts_path;
  }

  payload["accidental_subtraction"] = tmopts.subtract_accidentals;
  auto prepare = [&](const std::vector<CountRecord>& recs) {
    return tmopts.subtract_accidentals
               ? subtract_accidentals(recs,
                                      cfg.detection.coincidence_window_ns)
               : recs;
  };
  const std::vector<CountRecord> records = prepare(raw);

  const Mat4 rho_linear = bqpm::linear_reconstruct(records, table);
  const bqpm::MleResult mle = bqpm::mle_reconstruct(records, table);

  TwoPhotonState target = TwoPhotonState::bell_phi(0.0);
  if (tmopts.target == "phiminus")
    target = TwoPhotonState::bell_phi(bqpm::kPi);
  else if (tmopts.target == "source")
    target = build_state(cfg, disp).state.canonical();
  else if (tmopts.target != "phiplus")
    throw bqpm::InputError(
        "tomo: --target must be phiplus, phiminus, or source");

  payload["target"] = tmopts.target;
  payload["rho_linear"] = bqpm::density_to_json(rho_linear);
  payload["rho_mle"] = bqpm::density_to_json(mle.rho);
  payload["mle"] = {{"log_likelihood", mle.log_likelihood},
                    {"iterations", mle.iterations},
                    {"converged", mle.converged}};

  const double fid = bqpm::fidelity(mle.rho, target);
  const double pur = bqpm::purity(mle.rho);
  const double conc = bqpm::concurrence(mle.rho);
  payload["metrics"]["fidelity"]["value"] = fid;
  payload["metrics"]["purity"]["value"] = pur;
  payload["metrics"]["concurrence"]["value"] = conc;

  std::optional<bqpm::ChshOptimum> chsh;
  if (!tmopts.no_chsh) {
    chsh = bqpm::optimize_chsh_angles(mle.rho);
    payload["chsh"]["s"] = chsh->s;
    payload["chsh"]["angles_deg"] = {chsh->angles.a_deg, chsh->angles.a_prime_deg,
                                     chsh->angles.b_deg, chsh->angles.b_prime_deg};
  }

  if (tmopts.resamples >= 2) {
    auto metric_err = [&](const std::function<double(const Mat4&)>& metric) {
      return bqpm::bootstrap(
          raw,
          [&](const std::vector<CountRecord>& resample) {
            const std::vector<CountRecord> prepared = prepare(resample);
            return metric(bqpm::mle_reconstruct(prepared, table).rho);
          },
          tmopts.resamples, seed);
    };
    const bqpm::BootstrapSummary fid_b = metric_err(
        [&](const Mat4& rho) { return bqpm::fidelity(rho, target); });
    const bqpm::BootstrapSummary pur_b =
        metric_err([&](const Mat4& rho) { return bqpm::purity(rho); });
    const bqpm::BootstrapSummary conc_b =
        metric_err([&](const Mat4& rho) { return bqpm::concurrence(rho); });
    payload["metrics"]["fidelity"]["stderr"] = fid_b.stddev;
    payload["metrics"]["purity"]["stderr"] = pur_b.stddev;
    payload["metrics"]["concurrence"]["stderr"] = conc_b.stddev;
    payload["bootstrap"] = {{"resamples", tmopts.resamples},
                            {"failures", fid_b.failures + pur_b.failures +
                                             conc_b.failures}};
    if (chsh) {
      // Error bar of S at the base-optimal angles (angles held fixed across
      // resamples).
      const ChshAngles at = chsh->angles;
      const bqpm::BootstrapSummary s_b = metric_err(
          [&](const Mat4& rho) { return bqpm::chsh_s(rho, at); });
      payload["chsh"]["stderr"] = s_b.stddev;
    }
  }

  ResultBundle bundle{cfg.config_hash(), seed, "tomo", payload};
  std::ostringstream text;
  text << "fidelity to " << tmopts.target << ": " << fid << "\n"
       << "purity: " << pur << "\n"
       << "concurrence: " << conc << "\n";
  if (chsh) text << "CHSH S (optimal angles): " << chsh->s << "\n";
  emit(bundle, text.str(), opts, resolve_out_dir(&cfg, opts), files);
}

// ---------------------------------------------------------------------------
// chsh
// ---------------------------------------------------------------------------

struct ChshOpts {
  std::vector<double> angles{0.0, 45.0, 22.5, 67.5};
  bool optimize = false;
  std::optional<double> werner_p;
};

void cmd_chsh(const GlobalOpts& opts, const ChshOpts& chopts) {
  const ExperimentConfig cfg = require_config(opts);
  const DispersionSet& disp = DispersionSet::ktp();
  const Pipeline p = build_state(cfg, disp);
  Mat4 rho = p.state.density();
  json payload;
  if (chopts.werner_p) {
    rho = bqpm::werner_mix(p.state, *chopts.werner_p);
    payload["werner_p"] = *chopts.werner_p;
  } else {
    payload["pure_state_chsh_max"] = bqpm::pure_state_chsh_max(p.state);
  }

  if (chopts.angles.size() != 4)
    throw bqpm::InputError("chsh: --angles needs a,a',b,b' (4 values)");
  double s = 0.0;
  ChshAngles used{chopts.angles[0], chopts.angles[1], chopts.angles[2],
                  chopts.angles[3]};
  if (chopts.optimize) {
    const bqpm::ChshOptimum best = bqpm::optimize_chsh_angles(rho);
    s = best.s;
    used = best.angles;
  } else {
    s = bqpm::chsh_s(rho, used);
  }
  payload["optimized"] = chopts.optimize;
  payload["angles_deg"] = {used.a_deg, used.a_prime_deg, used.b_deg,
                           used.b_prime_deg};
  payload["s"] = s;

  ResultBundle bundle{cfg.config_hash(), resolve_seed(cfg, opts), "chsh",
                      payload};
  std::ostringstream text;
  text << "S = " << s << " at angles (" << used.a_deg << ", "
       << used.a_prime_deg << ", " << used.b_deg << ", " << used.b_prime_deg
       << ") deg\n";
  emit(bundle, text.str(), opts, resolve_out_dir(&cfg, opts));
}

// ---------------------------------------------------------------------------
// brightness
// ---------------------------------------------------------------------------

struct BrightnessOpts {
  double brightness = 0.0;
  double waist_um = 0.0;
  double length_mm = 0.0;
  int order = 1;
};

void cmd_brightness(const GlobalOpts& opts, const BrightnessOpts& bopts) {
  const double bn = bqpm::normalized_brightness(
      bopts.brightness, bopts.waist_um, bopts.length_mm, bopts.order);
  json payload;
  payload["brightness_per_s_mw_nm"] = bopts.brightness;
  payload["waist_um"] = bopts.waist_um;
  payload["length_mm"] = bopts.length_mm;
  payload["qpm_order"] = bopts.order;
  payload["normalized_brightness"] = bn;

  // No config: hash the inputs themselves for provenance.
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : payload.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  ResultBundle bundle{h, opts.seed.value_or(0), "brightness", payload};
  std::ostringstream text;
  text << "normalized brightness: " << bn << " (s mW nm)^-1\n";
  emit(bundle, text.str(), opts, opts.out_dir);
}

// ---------------------------------------------------------------------------
// rates
// ---------------------------------------------------------------------------

void cmd_rates(const GlobalOpts& opts, std::optional<double> bandwidth_ghz) {
  const ExperimentConfig cfg = require_config(opts);
  const DispersionSet& disp = DispersionSet::ktp();
  if (!cfg.simulation.spectral_brightness_per_s_mw_nm)
    throw bqpm::InputError(
        "rates: config needs 'simulation.spectral_brightness_per_s_mw_nm'");
  double bw = 0.0;
  if (bandwidth_ghz) {
    bw = *bandwidth_ghz;
  } else {
    const CrystalSpec solved = cfg.solved_crystal(disp);
    bw = bqpm::bandwidth_fwhm(disp, solved, PmType::Type0, cfg.pump_um());
  }
  const bqpm::RateEstimate est = bqpm::rate_estimate(
      *cfg.simulation.spectral_brightness_per_s_mw_nm, bw, 2.0 * cfg.pump_um(),
      cfg.pump_power_mw, cfg.detection);

  json payload;
  payload["spectral_brightness_per_s_mw_nm"] =
      *cfg.simulation.spectral_brightness_per_s_mw_nm;
  payload["bandwidth_ghz"] = bw;
  payload["bandwidth_source"] = bandwidth_ghz ? "override" : "computed";
  payload["pump_power_mw"] = cfg.pump_power_mw;
  payload["bandwidth_nm"] = est.bandwidth_nm;
  payload["generated_per_s"] = est.generated_per_s;
  payload["singles_s_per_s"] = est.singles_s_per_s;
  payload["singles_i_per_s"] = est.singles_i_per_s;
  payload["coincidences_per_s"] = est.coincidences_per_s;
  payload["accidentals_per_s"] = est.accidentals_per_s;

  ResultBundle bundle{cfg.config_hash(), resolve_seed(cfg, opts), "rates",
                      payload};
  std::ostringstream text;
  text << "bandwidth: " << bw << " GHz (" << est.bandwidth_nm << " nm)\n"
       << "generated pairs: " << est.generated_per_s << " /s\n"
       << "singles: " << est.singles_s_per_s << " /s (signal), "
       << est.singles_i_per_s << " /s (idler)\n"
       << "coincidences: " << est.coincidences_per_s << " /s (+ "
       << est.accidentals_per_s << " /s accidental)\n";
  emit(bundle, text.str(), opts, resolve_out_dir(&cfg, opts));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "bqpm: design and simulation toolkit for backward quasi-phase-matched "
      "photon-pair sources"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts opts;
  app.add_option("--config", opts.config_path, "experiment config (JSON)");
  std::uint64_t seed_value = 0;
  auto* seed_opt =
      app.add_option("--seed", seed_value, "override the configured RNG seed");
  app.add_option("--out", opts.out_dir,
                 "directory for result bundles and CSV artifacts");
  app.add_option("--format", opts.format, "output format")
      ->check(CLI::IsMember({"text", "structured"}));

  CLI::App* design = app.add_subcommand(
      "design", "solve the poling period and spectral widths");
  CLI::App* state =
      app.add_subcommand("state", "source state through the element pipeline");

  CurveOpts cvopts;
  CLI::App* curve =
      app.add_subcommand("curve", "interference and HOM curves as CSV");
  curve->add_option("--kind", cvopts.kind, "polinterf or hom")->required();
  curve->add_option("--herald", cvopts.herald,
                    "idler herald basis state (H, V, D, A)");
  curve->add_option("--points", cvopts.points, "number of curve points");
  curve->add_option("--tau-max", cvopts.tau_max_ps,
                    "HOM scan half-range in ps");
  curve->add_option("--v0", cvopts.v0, "HOM underlying visibility");
  curve->add_flag("--counts", cvopts.counts,
                  "also simulate Poisson counts (polinterf)");

  TomoOpts tmopts;
  CLI::App* tomo =
      app.add_subcommand("tomo", "16-setting state tomography");
  tomo->add_option("--counts", tmopts.counts_path, "counts CSV to analyse");
  tomo->add_flag("--simulate", tmopts.simulate,
                 "simulate counts from the configured state instead");
  tomo->add_option("--resamples", tmopts.resamples,
                   "bootstrap resamples (0 disables error bars)");
  tomo->add_option("--target", tmopts.target,
                   "fidelity target: phiplus, phiminus, source");
  tomo->add_flag("--subtract-accidentals", tmopts.subtract_accidentals,
                 "subtract estimated accidentals before reconstruction");
  tomo->add_flag("--no-chsh", tmopts.no_chsh, "skip the CHSH optimisation");
  double tomo_werner_p = -1.0;
  auto* tomo_werner_opt = tomo->add_option(
      "--werner-p", tomo_werner_p,
      "simulate a Werner-mixed state (weight p, needs --simulate)");

  ChshOpts chopts;
  CLI::App* chsh = app.add_subcommand("chsh", "CHSH S for the configured state");
  chsh->add_option("--angles", chopts.angles,
                   "a,a',b,b' polarizer angles in degrees")
      ->delimiter(',')
      ->expected(4);
  chsh->add_flag("--optimize", chopts.optimize, "maximise S over all angles");
  double werner_p = -1.0;
  auto* werner_opt = chsh->add_option(
      "--werner-p", werner_p, "mix the state with white noise (weight p)");

  BrightnessOpts bopts;
  CLI::App* brightness = app.add_subcommand(
      "brightness", "normalized brightness from geometry (no config)");
  brightness->add_option("--brightness", bopts.brightness,
                         "measured brightness, (s mW nm)^-1")
      ->required();
  brightness->add_option("--waist-um", bopts.waist_um, "pump waist in um")
      ->required();
  brightness->add_option("--length-mm", bopts.length_mm, "poled length in mm")
      ->required();
  brightness->add_option("--order", bopts.order, "QPM order")->required();

  std::optional<double> rates_bw;
  double rates_bw_value = 0.0;
  CLI::App* rates = app.add_subcommand("rates", "absolute rate budget");
  auto* rates_bw_opt = rates->add_option(
      "--bandwidth-ghz", rates_bw_value,
      "override the computed pair bandwidth");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (seed_opt->count() > 0) opts.seed = seed_value;
  if (werner_opt->count() > 0) chopts.werner_p = werner_p;
  if (tomo_werner_opt->count() > 0) tmopts.werner_p = tomo_werner_p;
  if (rates_bw_opt->count() > 0) rates_bw = rates_bw_value;

  try {
    if (design->parsed()) cmd_design(opts);
    if (state->parsed()) cmd_state(opts);
    if (curve->parsed()) cmd_curve(opts, cvopts);
    if (tomo->parsed()) cmd_tomo(opts, tmopts);
    if (chsh->parsed()) cmd_chsh(opts, chopts);
    if (brightness->parsed()) cmd_brightness(opts, bopts);
    if (rates->parsed()) cmd_rates(opts, rates_bw);
  } catch (const bqpm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
