#include "bqpm/simulate.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "bqpm/constants.hpp"
#include "bqpm/errors.hpp"
#include "bqpm/rng.hpp"

namespace bqpm {

double interference_closed_form(Complex c_hh, Complex c_vv, double theta_rad) {
  if (!std::isfinite(theta_rad))
    throw InputError("interference: analysis angle must be finite");
  const double norm_sq = std::norm(c_hh) + std::norm(c_vv);
  if (std::abs(norm_sq - 1.0) > 1e-9)
    throw InputError(
        "interference: amplitudes must satisfy |c_hh|^2 + |c_vv|^2 = 1 "
        "within 1e-9");
  const Complex overlap =
      c_hh * std::cos(theta_rad) + c_vv * std::sin(theta_rad);
  return 0.5 * std::norm(overlap);
}

const char* herald_name(Herald herald) {
  switch (herald) {
    case Herald::H: return "H";
    case Herald::V: return "V";
    case Herald::D: return "D";
    case Herald::A: return "A";
  }
  throw Error("herald: unknown value");
}

Herald herald_from_name(const std::string& name) {
  if (name == "H") return Herald::H;
  if (name == "V") return Herald::V;
  if (name == "D") return Herald::D;
  if (name == "A") return Herald::A;
  throw InputError("herald must be one of H, V, D, A (got '" + name + "')");
}

namespace {

// Herald arm: half-wave plate + H polarizer, projecting on a real linear
// polarisation.
ArmSetting herald_setting(Herald herald) {
  switch (herald) {
    case Herald::H: return linear_setting(0.0);
    case Herald::V: return linear_setting(90.0);
    case Herald::D: return linear_setting(45.0);
    case Herald::A: return linear_setting(-45.0);
  }
  throw Error("herald: unknown value");
}

}  // namespace

std::vector<CurvePoint> interference_curve(const TwoPhotonState& state,
                                           Herald herald,
                                           const std::vector<double>& theta_rad) {
  const ArmSetting idler = herald_setting(herald);
  std::vector<CurvePoint> out;
  out.reserve(theta_rad.size());
  for (double theta : theta_rad) {
    if (!std::isfinite(theta))
      throw InputError("interference curve: angles must be finite");
    const ArmSetting signal = linear_setting(rad_to_deg(theta));
    out.push_back({theta, coincidence_probability(state, signal, idler)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// HOM quadrature
// ---------------------------------------------------------------------------

namespace {

double simpson_slice(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                            double fa, double b, double fb, double m,
                            double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson_slice(a, fa, m, fm, flm);
  const double right = simpson_slice(m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth <= 0)
    throw ConvergenceError("adaptive quadrature: subdivision limit reached");
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol,
                              depth - 1) +
         adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol,
                              depth - 1);
}

// Integrates f over [a, b] to the given absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double abs_tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = simpson_slice(a, fa, b, fb, fm);
  return adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, abs_tol, 48);
}

}  // namespace

std::vector<CurvePoint> hom_curve(const DispersionSet& disp,
                                  const CrystalSpec& crystal, PmType type,
                                  double pump_um,
                                  const std::vector<double>& delays_ps,
                                  double v0) {
  if (!std::isfinite(v0) || v0 < 0.0 || v0 > 1.0)
    throw InputError("hom curve: visibility must lie in [0, 1]");
  crystal.validate();

  const double length_um = crystal.length_mm * 1e3;
  const double nu_deg = kSpeedOfLight_um_ghz / (2.0 * pump_um);
  auto half_phase = [&](double nu_ghz) {
    // dk L / 2: the argument whose multiples of pi are the sinc zeros.
    const double signal_um = kSpeedOfLight_um_ghz / (nu_deg + nu_ghz);
    return 0.5 * length_um * mismatch(disp, crystal, type, pump_um, signal_um);
  };
  if (std::abs(half_phase(0.0)) > 0.05)
    throw InputError(
        "hom curve: crystal is not degenerate-matched; solve the poling "
        "period for this pump and temperature first");

  auto spectrum = [&](double nu_ghz) {
    const double f =
        spectral_amplitude(disp, crystal, type, pump_um, kTwoPi * nu_ghz * 1e9);
    return f * f;
  };

  // Truncate the spectral integrals at the tenth sinc zero on each side,
  // located by bisection around the group-index estimate of its position.
  const Axis ax = type == PmType::Type0 ? Axis::Z : Axis::Y;
  const double ng =
      disp.model(ax).group_index(2.0 * pump_um, crystal.temperature_c);
  const double nu_zero_est = kSpeedOfLight_um_ghz / (length_um * 2.0 * ng);
  auto tenth_zero = [&](double sign) {
    double lo = sign * 8.0 * nu_zero_est, hi = sign * 12.0 * nu_zero_est;
    const double target = -sign * 10.0 * kPi;  // phase decreases with nu
    double flo = half_phase(lo) - target;
    if (std::signbit(flo) == std::signbit(half_phase(hi) - target))
      throw ConvergenceError("hom curve: failed to bracket the spectral edge");
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (std::signbit(half_phase(mid) - target) == std::signbit(flo)) {
        lo = mid;
        flo = half_phase(lo) - target;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };
  const double nu_hi = tenth_zero(+1.0);
  const double nu_lo = tenth_zero(-1.0);

  // Denominator first; its magnitude scales the numerator tolerances.
  const double denom_tol = 1e-7 * (nu_hi - nu_lo);
  const double denom = adaptive_simpson(spectrum, nu_lo, nu_hi, denom_tol);
  if (!(denom > 0.0))
    throw ConvergenceError("hom curve: vanishing spectral norm");

  std::vector<CurvePoint> out;
  out.reserve(delays_ps.size());
  for (double tau_ps : delays_ps) {
    if (!std::isfinite(tau_ps))
      throw InputError("hom curve: delays must be finite");
    // cos(2 W tau) with W = 2 pi nu: nu in GHz, tau in ps -> phase factor
    // 4 pi nu tau * 1e-3.
    auto integrand = [&](double nu_ghz) {
      return spectrum(nu_ghz) * std::cos(4.0 * kPi * nu_ghz * tau_ps * 1e-3);
    };
    const double numer =
        adaptive_simpson(integrand, nu_lo, nu_hi, 1e-6 * denom);
    out.push_back({tau_ps, 0.5 * (1.0 - v0 * numer / denom)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Count-level simulation
// ---------------------------------------------------------------------------

void DetectionChain::validate() const {
  if (!std::isfinite(eta_signal) || !(eta_signal > 0.0) || eta_signal > 1.0 ||
      !std::isfinite(eta_idler) || !(eta_idler > 0.0) || eta_idler > 1.0)
    throw InputError("detection chain: efficiencies must lie in (0, 1]");
  if (!std::isfinite(coincidence_window_ns) || coincidence_window_ns < 0.0)
    throw InputError("detection chain: coincidence window must be >= 0");
}

namespace {

Mat4 arm_projector(const ArmSetting& setting, Arm arm) {
  const Vec2 ket = projector_ket(setting);
  const Mat2 proj = ket * ket.adjoint();
  Mat4 out = Mat4::Zero();
  const Mat2 eye = Mat2::Identity();
  const Mat2& a = (arm == Arm::Signal) ? proj : eye;
  const Mat2& b = (arm == Arm::Signal) ? eye : proj;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

}  // namespace

ExpectedRates expected_rates(const Mat4& rho, const MeasurementSetting& setting,
                             double pair_rate_per_s,
                             const DetectionChain& chain) {
  chain.validate();
  validate_density(rho);
  if (!std::isfinite(pair_rate_per_s) || pair_rate_per_s < 0.0)
    throw InputError("expected rates: pair rate must be >= 0");

  const double p_s =
      (arm_projector(setting.signal, Arm::Signal) * rho).trace().real();
  const double p_i =
      (arm_projector(setting.idler, Arm::Idler) * rho).trace().real();
  const double p_cc = probability_density(rho, setting.signal, setting.idler);

  ExpectedRates rates;
  rates.singles_s = pair_rate_per_s * chain.eta_signal * std::max(0.0, p_s);
  rates.singles_i = pair_rate_per_s * chain.eta_idler * std::max(0.0, p_i);
  rates.true_coincidences =
      pair_rate_per_s * chain.eta_signal * chain.eta_idler * p_cc;
  rates.accidentals =
      rates.singles_s * rates.singles_i * chain.coincidence_window_ns * 1e-9;
  return rates;
}

std::vector<CountRecord> simulate_counts(
    const Mat4& rho, const std::vector<MeasurementSetting>& settings,
    double pair_rate_per_s, const DetectionChain& chain, double duration_s,
    std::uint64_t seed) {
  if (!std::isfinite(duration_s) || !(duration_s > 0.0))
    throw InputError("simulate counts: duration must be positive");

  std::vector<CountRecord> out;
  out.reserve(settings.size());
  for (const MeasurementSetting& setting : settings) {
    const ExpectedRates rates =
        expected_rates(rho, setting, pair_rate_per_s, chain);
    // Substreams keyed by the setting id, so adding or reordering settings
    // leaves every other setting's draws untouched.
    Rng rng(substream_seed(seed, static_cast<std::uint64_t>(setting.id)));
    CountRecord rec;
    rec.setting_id = setting.id;
    rec.label = setting.label;
    rec.duration_s = duration_s;
    rec.singles_s = rng.poisson(rates.singles_s * duration_s);
    rec.singles_i = rng.poisson(rates.singles_i * duration_s);
    rec.coincidences = rng.poisson(rates.coincidences() * duration_s);
    out.push_back(std::move(rec));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Source budgets
// ---------------------------------------------------------------------------

RateEstimate rate_estimate(double brightness_per_s_mw_nm, double bandwidth_ghz,
                           double degenerate_um, double power_mw,
                           const DetectionChain& chain) {
  chain.validate();
  if (!std::isfinite(brightness_per_s_mw_nm) || !(brightness_per_s_mw_nm > 0.0))
    throw InputError("rate estimate: brightness must be positive");
  if (!std::isfinite(bandwidth_ghz) || !(bandwidth_ghz > 0.0))
    throw InputError("rate estimate: bandwidth must be positive");
  if (!std::isfinite(degenerate_um) || !(degenerate_um > 0.0))
    throw InputError("rate estimate: wavelength must be positive");
  if (!std::isfinite(power_mw) || power_mw < 0.0)
    throw InputError("rate estimate: power must be >= 0");

  const double lambda_nm = degenerate_um * 1e3;
  RateEstimate est;
  est.bandwidth_nm = lambda_nm * lambda_nm * bandwidth_ghz / kSpeedOfLight_nm_ghz;
  est.generated_per_s = brightness_per_s_mw_nm * power_mw * est.bandwidth_nm;
  est.singles_s_per_s = est.generated_per_s * chain.eta_signal;
  est.singles_i_per_s = est.generated_per_s * chain.eta_idler;
  est.coincidences_per_s =
      est.generated_per_s * chain.eta_signal * chain.eta_idler;
  est.accidentals_per_s = est.singles_s_per_s * est.singles_i_per_s *
                          chain.coincidence_window_ns * 1e-9;
  return est;
}

double normalized_brightness(double brightness_per_s_mw_nm, double waist_um,
                             double length_mm, int order) {
  if (!std::isfinite(brightness_per_s_mw_nm) || brightness_per_s_mw_nm < 0.0)
    throw InputError("normalized brightness: brightness must be >= 0");
  if (!std::isfinite(waist_um) || !(waist_um > 0.0))
    throw InputError("normalized brightness: waist must be positive");
  if (!std::isfinite(length_mm) || !(length_mm > 0.0))
    throw InputError("normalized brightness: length must be positive");
  if (order < 1) throw InputError("normalized brightness: order must be >= 1");

  const double area_ratio = (waist_um * waist_um) / (50.0 * 50.0);
  const double length_ratio = 10.0 / length_mm;
  return brightness_per_s_mw_nm * area_ratio *
         std::pow(length_ratio, 1.5) * static_cast<double>(order * order);
}

}  // namespace bqpm
