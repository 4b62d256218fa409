#pragma once

#include <vector>

#include "bqpm/dispersion.hpp"

namespace bqpm {

// Quasi-phase-matching process type.  In the backward-wave geometry the pump
// and signal co-propagate (+x) while the idler counter-propagates (-x), so
// the idler wavevector enters the longitudinal mismatch with a plus sign:
//
//   type-0 : p(z) -> s(z) + i(z),  dk = k_pz - k_sz + k_iz - k_m
//   type-I : p(z) -> s(y) + i(y),  dk = k_pz - k_sy + k_iy - k_m
//
// k_m = 2 pi m / period is the grating vector of the poled domain structure.
// At degeneracy (lambda_s = lambda_i = 2 lambda_p) the daughter terms cancel
// pairwise, so one poling period matches both processes at once.
enum class PmType { Type0, TypeI };

const char* pm_type_name(PmType type);

// Poled crystal and operating point.  Lengths in micrometers except the
// crystal length (millimeters, as usually quoted); temperature in deg C.
struct CrystalSpec {
  double poling_period_um = 0.0;  // domain grating period
  int qpm_order = 1;              // odd order m of the grating harmonic used
  double length_mm = 0.0;         // poled interaction length
  double temperature_c = 25.0;

  // Throws InputError unless period > 0, order >= 1, length > 0 and all
  // fields finite.
  void validate() const;
};

// Individual wavevector terms of the mismatch, for reporting/debugging.
struct MismatchTerms {
  double k_pump;     // + k_p(lambda_p), rad/um
  double k_signal;   // - k_s contribution magnitude, rad/um
  double k_idler;    // + k_i contribution magnitude, rad/um
  double k_grating;  // - k_m, rad/um
  double idler_um;   // idler wavelength from energy conservation
};

// 2 pi m / period, rad/um.  Throws InputError for period <= 0 or order < 1.
double grating_vector(double period_um, int order);

// Longitudinal mismatch dk (rad/um) for the given type at pump/signal
// wavelengths (um); the idler wavelength follows from energy conservation
// 1/l_i = 1/l_p - 1/l_s.  Requires lambda_s > lambda_p (both finite and
// positive); indices outside their fit windows raise RangeError.
double mismatch(const DispersionSet& disp, const CrystalSpec& crystal,
                PmType type, double pump_um, double signal_um,
                MismatchTerms* terms = nullptr);

// Poling period that phase-matches the degenerate point lambda_s = lambda_i
// = 2 lambda_p at the crystal's temperature.  Closed form: the degenerate
// daughter terms cancel, so k_m must equal k_p and
//   period = order * lambda_p / n_z(lambda_p, T).
double solve_poling_period(const DispersionSet& disp, double pump_um,
                           int order, double temperature_c);

// All signal wavelengths in [lo, hi] (um) where the mismatch crosses zero,
// found by sign-change scanning on a uniform grid followed by bisection to
// |dk| < 1e-9 rad/um.  Grid points that happen to be exact roots count too.
std::vector<double> solve_signal_wavelength(const DispersionSet& disp,
                                            const CrystalSpec& crystal,
                                            PmType type, double pump_um,
                                            double lo_um = 1.2,
                                            double hi_um = 2.0,
                                            int grid_points = 2000);

// Normalised collinear spectral amplitude sinc(dk(W) L / 2) at signal
// detuning W (rad/s) from the degenerate frequency; the idler is detuned by
// -W.  Real-valued; negative lobes keep their sign.
double spectral_amplitude(const DispersionSet& disp, const CrystalSpec& crystal,
                          PmType type, double pump_um, double detuning_rad_s);

// Full width at half maximum (GHz, in optical frequency nu = W / 2 pi) of
// |spectral_amplitude|^2 around degeneracy.  Requires the crystal to be
// degenerate-matched (|dk(0) L / 2| < 0.05 rad), otherwise the "width about
// the peak" is ill-defined; solve_poling_period first.  Each half-width is
// bisected to 1e-3 GHz.
double bandwidth_fwhm(const DispersionSet& disp, const CrystalSpec& crystal,
                      PmType type, double pump_um);

}  // namespace bqpm
