#pragma once

namespace bqpm {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Speed of light in the unit systems used internally.  Wavelengths are
// micrometers, frequencies GHz, so c = 299792.458 um*GHz (= um/ns).
inline constexpr double kSpeedOfLight_um_ghz = 299792.458;
inline constexpr double kSpeedOfLight_nm_ghz = 2.99792458e8;

// Positive root of sinc(x)^2 = 1/2; fixes the FWHM of a sinc^2 line:
// full width = 2 * kSincSqHalfMaxArg in the argument of the sinc.
inline constexpr double kSincSqHalfMaxArg = 1.39155737825151;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace bqpm
