#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bqpm/biphoton.hpp"
#include "bqpm/phasematch.hpp"

namespace bqpm {

// ---------------------------------------------------------------------------
// Polarisation interference
// ---------------------------------------------------------------------------

// Coincidence probability of the diagonal-heralded interference measurement
// for the pure state c_hh |HH> + c_vv |VV>: the idler is projected on |D>,
// the signal analysed by a rotating polarizer at angle theta.  Closed form
//
//   p(theta) = | c_hh cos(theta) + c_vv sin(theta) |^2 / 2 .
//
// Throws InputError unless |c_hh|^2 + |c_vv|^2 = 1 within 1e-9.
double interference_closed_form(Complex c_hh, Complex c_vv, double theta_rad);

// Idler heralding basis of an interference curve.
enum class Herald { H, V, D, A };

const char* herald_name(Herald herald);
Herald herald_from_name(const std::string& name);

struct CurvePoint {
  double x;  // abscissa: analysis angle (rad) or delay (ps)
  double y;  // coincidence probability (or normalised rate)
};

// Full-state interference curve: the idler passes a half-wave plate and an
// H polarizer realising the herald projection, the signal a polarizer at
// theta.  Reduces to interference_closed_form for Herald::D on a state with
// only HH and VV amplitudes.  Points where the herald never fires are 0.
std::vector<CurvePoint> interference_curve(const TwoPhotonState& state,
                                           Herald herald,
                                           const std::vector<double>& theta_rad);

// ---------------------------------------------------------------------------
// Hong-Ou-Mandel dip
// ---------------------------------------------------------------------------

// Normalised coincidence rate of the post-selected interferometer scan,
//
//   R_c(tau) = (1/2) [ 1 - v0 * D(tau) ],
//   D(tau)   = int S(W) cos(2 W tau) dW / int S(W) dW,   S = |f(W)|^2,
//
// with f the collinear spectral amplitude of the crystal and v0 the
// empirical interference visibility (in [0, 1]).  The spectral integrals are
// truncated at the tenth sinc zero on each side and evaluated by adaptive
// Simpson quadrature to a relative tolerance of 1e-6.  The crystal must be
// degenerate-matched (see bandwidth_fwhm).
std::vector<CurvePoint> hom_curve(const DispersionSet& disp,
                                  const CrystalSpec& crystal, PmType type,
                                  double pump_um,
                                  const std::vector<double>& delays_ps,
                                  double v0);

// ---------------------------------------------------------------------------
// Count-level simulation
// ---------------------------------------------------------------------------

// Detector / collection parameters common to both arms of a run.
struct DetectionChain {
  double eta_signal = 1.0;          // end-to-end heralding efficiency, (0, 1]
  double eta_idler = 1.0;
  double coincidence_window_ns = 0.0;  // accidental-rate window, >= 0

  void validate() const;
};

// One analyser configuration of a counting run.
struct MeasurementSetting {
  int id = 0;
  std::string label;
  ArmSetting signal;
  ArmSetting idler;
};

// Raw counting result for one setting, as stored in counts CSV files.
struct CountRecord {
  int setting_id = 0;
  std::string label;
  std::int64_t singles_s = 0;
  std::int64_t singles_i = 0;
  std::int64_t coincidences = 0;
  double duration_s = 0.0;
};

// Mean detection rates (per second) implied by a normalised density matrix,
// a pair generation rate, and a detection chain.  Accidentals are
// singles_s * singles_i * window; the coincidence rate is the true rate
// plus accidentals.
struct ExpectedRates {
  double singles_s = 0.0;
  double singles_i = 0.0;
  double true_coincidences = 0.0;
  double accidentals = 0.0;

  double coincidences() const { return true_coincidences + accidentals; }
};

ExpectedRates expected_rates(const Mat4& rho, const MeasurementSetting& setting,
                             double pair_rate_per_s,
                             const DetectionChain& chain);

// Draws Poisson counts for every setting over `duration_s` seconds.  Each
// setting consumes its own RNG substream (substream_seed(seed, setting id)),
// with draws in the fixed order singles_s, singles_i, coincidences, so
// results are reproducible and insensitive to reordering of other settings.
// Singles and coincidences are drawn independently; correlations between
// the streams are not modelled.
std::vector<CountRecord> simulate_counts(
    const Mat4& rho, const std::vector<MeasurementSetting>& settings,
    double pair_rate_per_s, const DetectionChain& chain, double duration_s,
    std::uint64_t seed);

// ---------------------------------------------------------------------------
// Source budgets
// ---------------------------------------------------------------------------

// Absolute rate budget from a spectral brightness figure.
//   bandwidth_nm        = lambda^2 dnu / c  at the degenerate wavelength
//   generated           = brightness * power * bandwidth_nm
//   singles (per arm)   = generated * eta_arm
//   true coincidences   = generated * eta_s * eta_i
//   accidentals         = singles_s * singles_i * window
struct RateEstimate {
  double bandwidth_nm = 0.0;
  double generated_per_s = 0.0;
  double singles_s_per_s = 0.0;
  double singles_i_per_s = 0.0;
  double coincidences_per_s = 0.0;  // true coincidences, without accidentals
  double accidentals_per_s = 0.0;
};

RateEstimate rate_estimate(double brightness_per_s_mw_nm, double bandwidth_ghz,
                           double degenerate_um, double power_mw,
                           const DetectionChain& chain);

// Brightness normalised to a reference geometry for cross-source comparison:
// scaled to pump mode area A0 = pi (50 um)^2, poled length L0 = 10 mm (as
// L^{-3/2}) and grating order m0 = 1 (as m^{-2}):
//   B_n = B * (A / A0) * (L0 / L)^{3/2} * (m / m0)^2
// with A = pi * waist^2.
double normalized_brightness(double brightness_per_s_mw_nm, double waist_um,
                             double length_mm, int order);

}  // namespace bqpm
