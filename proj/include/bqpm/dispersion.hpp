#pragma once

#include <array>
#include <string>

namespace bqpm {

// Principal dielectric axis of the crystal relevant to this toolkit.  The
// pump and the type-0 daughter photons are z-polarised, the type-I daughter
// photons y-polarised (propagation along x).
enum class Axis { Y, Z };

const char* axis_name(Axis axis);

// Two-pole Sellmeier fit with a quadratic thermo-optic correction:
//
//   n^2(lambda)   = c0 + c1/(lambda^2 - c2) + c3/(lambda^2 - c4)
//   n(lambda, T)  = n(lambda) + n1(lambda) dT + n2(lambda) dT^2,  dT = T - Tref
//   nk(lambda)    = sum_{m=0..3} nk[m] lambda^{-m}
//
// with lambda in micrometers and T in degrees Celsius.  Derivatives in
// lambda are evaluated analytically so group indices carry no finite-
// difference noise.
class SellmeierModel {
 public:
  SellmeierModel(Axis axis, std::array<double, 5> sellmeier,
                 std::array<double, 4> dn_dt, std::array<double, 4> d2n_dt2,
                 double t_ref_c, double lambda_min_um, double lambda_max_um,
                 std::string reference_label);

  // Phase index at lambda (um) and temperature (deg C).  Throws InputError on
  // non-finite arguments, RangeError outside [lambda_min, lambda_max].
  double index(double lambda_um, double temp_c) const;

  // Group index n_g = n - lambda dn/dlambda, analytic.  Requires lambda
  // strictly inside the validity window so the derivative is well defined.
  double group_index(double lambda_um, double temp_c) const;

  // d n / d lambda (per um), analytic; same domain rule as group_index.
  double dindex_dlambda(double lambda_um, double temp_c) const;

  Axis axis() const { return axis_; }
  double lambda_min_um() const { return lambda_min_um_; }
  double lambda_max_um() const { return lambda_max_um_; }
  const std::string& reference_label() const { return reference_label_; }

 private:
  void check_lambda(double lambda_um, double temp_c, bool strict) const;
  double sellmeier_n(double lambda_um) const;
  double thermo_shift(double lambda_um, double dt) const;
  double sellmeier_dn(double lambda_um) const;
  double thermo_dshift(double lambda_um, double dt) const;

  Axis axis_;
  std::array<double, 5> c_;        // c0..c4 of the Sellmeier form
  std::array<double, 4> n1_;       // dn/dT expansion coefficients
  std::array<double, 4> n2_;       // d2n/dT2 expansion coefficients
  double t_ref_c_;
  double lambda_min_um_;
  double lambda_max_um_;
  std::string reference_label_;
};

// The pair of axis models a phase-matching calculation needs.
class DispersionSet {
 public:
  DispersionSet(std::string crystal, SellmeierModel y, SellmeierModel z);

  const SellmeierModel& model(Axis axis) const;
  const std::string& crystal() const { return crystal_; }

  // Parses a JSON coefficient file (see data/ktp_sellmeier.json for the
  // schema).  Throws IoError if unreadable, InputError if structurally
  // invalid or missing one of the two axes.
  static DispersionSet load(const std::string& path);

  // The bundled KTP model, loaded once from the data directory.
  static const DispersionSet& ktp();

 private:
  std::string crystal_;
  SellmeierModel y_;
  SellmeierModel z_;
};

}  // namespace bqpm
