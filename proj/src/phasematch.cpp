#include "bqpm/phasematch.hpp"

#include <cmath>
#include <sstream>

#include "bqpm/constants.hpp"
#include "bqpm/errors.hpp"

namespace bqpm {

const char* pm_type_name(PmType type) {
  return type == PmType::Type0 ? "type-0" : "type-I";
}

void CrystalSpec::validate() const {
  if (!std::isfinite(poling_period_um) || !(poling_period_um > 0.0))
    throw InputError("crystal: poling period must be positive");
  if (qpm_order < 1) throw InputError("crystal: QPM order must be >= 1");
  if (!std::isfinite(length_mm) || !(length_mm > 0.0))
    throw InputError("crystal: length must be positive");
  if (!std::isfinite(temperature_c))
    throw InputError("crystal: temperature must be finite");
}

double grating_vector(double period_um, int order) {
  if (!std::isfinite(period_um) || !(period_um > 0.0))
    throw InputError("grating vector: period must be positive");
  if (order < 1) throw InputError("grating vector: order must be >= 1");
  return kTwoPi * order / period_um;
}

namespace {

double wavevector(const SellmeierModel& model, double lambda_um, double temp_c) {
  return kTwoPi * model.index(lambda_um, temp_c) / lambda_um;
}

Axis daughter_axis(PmType type) {
  return type == PmType::Type0 ? Axis::Z : Axis::Y;
}

}  // namespace

double mismatch(const DispersionSet& disp, const CrystalSpec& crystal,
                PmType type, double pump_um, double signal_um,
                MismatchTerms* terms) {
  crystal.validate();
  if (!std::isfinite(pump_um) || !std::isfinite(signal_um) ||
      !(pump_um > 0.0))
    throw InputError("mismatch: wavelengths must be finite and positive");
  if (!(signal_um > pump_um))
    throw InputError(
        "mismatch: signal wavelength must exceed the pump wavelength "
        "(energy conservation leaves no idler otherwise)");

  const double idler_um = 1.0 / (1.0 / pump_um - 1.0 / signal_um);
  const SellmeierModel& pump_model = disp.model(Axis::Z);
  const SellmeierModel& daughter = disp.model(daughter_axis(type));

  const double k_p = wavevector(pump_model, pump_um, crystal.temperature_c);
  const double k_s = wavevector(daughter, signal_um, crystal.temperature_c);
  const double k_i = wavevector(daughter, idler_um, crystal.temperature_c);
  const double k_m = grating_vector(crystal.poling_period_um, crystal.qpm_order);

  if (terms) *terms = {k_p, k_s, k_i, k_m, idler_um};
  // Backward geometry: counter-propagating idler enters with +k_i.
  return k_p - k_s + k_i - k_m;
}

double solve_poling_period(const DispersionSet& disp, double pump_um, int order,
                           double temperature_c) {
  if (order < 1) throw InputError("solve_poling_period: order must be >= 1");
  if (!std::isfinite(pump_um) || !(pump_um > 0.0))
    throw InputError("solve_poling_period: pump wavelength must be positive");
  const double n_p = disp.model(Axis::Z).index(pump_um, temperature_c);
  return order * pump_um / n_p;
}

std::vector<double> solve_signal_wavelength(const DispersionSet& disp,
                                            const CrystalSpec& crystal,
                                            PmType type, double pump_um,
                                            double lo_um, double hi_um,
                                            int grid_points) {
  crystal.validate();
  if (!(lo_um < hi_um))
    throw InputError("solve_signal_wavelength: need lo < hi");
  if (grid_points < 2)
    throw InputError("solve_signal_wavelength: need at least 2 grid points");
  if (!(lo_um > pump_um))
    throw InputError(
        "solve_signal_wavelength: scan interval must lie above the pump "
        "wavelength");

  auto f = [&](double lambda) {
    return mismatch(disp, crystal, type, pump_um, lambda);
  };

  std::vector<double> roots;
  const double step = (hi_um - lo_um) / (grid_points - 1);
  double x_prev = lo_um;
  double f_prev = f(x_prev);
  if (f_prev == 0.0) roots.push_back(x_prev);
  for (int i = 1; i < grid_points; ++i) {
    const double x = (i == grid_points - 1) ? hi_um : lo_um + i * step;
    const double fx = f(x);
    if (fx == 0.0) {
      roots.push_back(x);
    } else if (f_prev != 0.0 && std::signbit(fx) != std::signbit(f_prev)) {
      // Bisect the bracket down to the mismatch tolerance.
      double a = x_prev, b = x, fa = f_prev;
      double mid = 0.5 * (a + b), fm = f(mid);
      for (int iter = 0; iter < 200 && std::abs(fm) > 1e-9; ++iter) {
        if (std::signbit(fm) == std::signbit(fa)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
        mid = 0.5 * (a + b);
        fm = f(mid);
      }
      if (std::abs(fm) > 1e-9)
        throw ConvergenceError(
            "solve_signal_wavelength: bisection stalled above tolerance");
      roots.push_back(mid);
    }
    x_prev = x;
    f_prev = fx;
  }
  return roots;
}

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-6) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

// Mismatch as a function of signal detuning nu (GHz) from degeneracy; the
// idler sits at -nu by energy conservation.
double mismatch_at_detuning(const DispersionSet& disp,
                            const CrystalSpec& crystal, PmType type,
                            double pump_um, double nu_ghz) {
  const double nu_deg = kSpeedOfLight_um_ghz / (2.0 * pump_um);
  const double signal_um = kSpeedOfLight_um_ghz / (nu_deg + nu_ghz);
  return mismatch(disp, crystal, type, pump_um, signal_um);
}

}  // namespace

double spectral_amplitude(const DispersionSet& disp, const CrystalSpec& crystal,
                          PmType type, double pump_um, double detuning_rad_s) {
  if (!std::isfinite(detuning_rad_s))
    throw InputError("spectral_amplitude: detuning must be finite");
  const double nu_ghz = detuning_rad_s * 1e-9 / kTwoPi;
  const double dk = mismatch_at_detuning(disp, crystal, type, pump_um, nu_ghz);
  const double half_phase = 0.5 * dk * crystal.length_mm * 1e3;  // mm -> um
  return sinc(half_phase);
}

double bandwidth_fwhm(const DispersionSet& disp, const CrystalSpec& crystal,
                      PmType type, double pump_um) {
  crystal.validate();
  const double length_um = crystal.length_mm * 1e3;
  const double dk0 = mismatch_at_detuning(disp, crystal, type, pump_um, 0.0);
  if (std::abs(0.5 * dk0 * length_um) > 0.05) {
    std::ostringstream msg;
    msg << "bandwidth_fwhm: crystal is not degenerate-matched for "
        << pm_type_name(type) << " (|dk L/2| = "
        << std::abs(0.5 * dk0 * length_um)
        << " rad at zero detuning); solve the poling period for this pump "
           "and temperature first";
    throw InputError(msg.str());
  }

  const double peak = [&] {
    const double s = sinc(0.5 * dk0 * length_um);
    return s * s;
  }();
  const double half = 0.5 * peak;
  auto power = [&](double nu_ghz) {
    const double dk = mismatch_at_detuning(disp, crystal, type, pump_um, nu_ghz);
    const double s = sinc(0.5 * dk * length_um);
    return s * s;
  };

  // Group-index estimate of the half width used only to scale the search.
  const Axis ax = type == PmType::Type0 ? Axis::Z : Axis::Y;
  const double lambda_deg = 2.0 * pump_um;
  const double ng = disp.model(ax).group_index(lambda_deg, crystal.temperature_c);
  const double est_half =
      kSincSqHalfMaxArg / kPi * kSpeedOfLight_um_ghz / (length_um * 2.0 * ng);

  double width = 0.0;
  for (double sign : {+1.0, -1.0}) {
    // March outward until the spectrum drops below half maximum...
    double lo = 0.0, hi = 0.0;
    double step = 0.25 * est_half;
    bool bracketed = false;
    for (int i = 1; i <= 1000; ++i) {
      hi = sign * i * step;
      if (power(hi) < half) {
        lo = sign * (i - 1) * step;
        bracketed = true;
        break;
      }
    }
    if (!bracketed)
      throw ConvergenceError(
          "bandwidth_fwhm: could not bracket the half-maximum point");
    // ...then bisect the crossing to 1e-3 GHz.
    while (std::abs(hi - lo) > 1e-3) {
      const double mid = 0.5 * (lo + hi);
      if (power(mid) >= half)
        lo = mid;
      else
        hi = mid;
    }
    width += std::abs(0.5 * (lo + hi));
  }
  return width;
}

}  // namespace bqpm
