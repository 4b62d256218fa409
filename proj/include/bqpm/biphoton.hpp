#pragma once

#include <complex>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "bqpm/dispersion.hpp"

namespace bqpm {

using Complex = std::complex<double>;
using Vec2 = Eigen::Vector2cd;
using Vec4 = Eigen::Vector4cd;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;

enum class Arm { Signal, Idler };

// Pure two-photon polarisation state in the product basis ordered
// (HH, HV, VH, VV): amplitude index = 2 * signal + idler with H = 0, V = 1.
// Alongside the (always unit-normalised) ket the state carries the success
// probability accumulated through projective elements, i.e. the chance that
// a pair emitted by the source actually survives the chain applied so far.
class TwoPhotonState {
 public:
  // Throws InputError unless the amplitudes are normalised within 1e-9
  // (renormalised exactly on acceptance) and 0 < success <= 1.
  explicit TwoPhotonState(const Vec4& amplitudes, double success = 1.0);

  // Source emission  ( |HH> + e^{i theta} sqrt(R) |VV> ) / sqrt(R + 1)
  // where R > 0 is the VV:HH intensity ratio set by the nonlinear tensor
  // elements and theta the collection phase between the two processes.
  static TwoPhotonState source(double ratio, double theta_rad);

  // ( |HH> + e^{i phase} |VV> ) / sqrt(2); phase = 0 gives Phi+, pi Phi-.
  static TwoPhotonState bell_phi(double phase_rad);

  const Vec4& amplitudes() const { return amps_; }
  Complex amplitude(int signal_hv, int idler_hv) const;
  double success_probability() const { return success_; }

  // Same ray with the first amplitude of magnitude > 1e-12 rotated to the
  // positive real axis, for phase-insensitive comparisons.
  TwoPhotonState canonical() const;

  // |psi><psi| of the normalised ket (unit trace; success not folded in).
  Mat4 density() const;

 private:
  Vec4 amps_;
  double success_;
};

// A polarisation element acting on one arm.  Jones conventions (global
// phases dropped where they are unobservable):
//   half_wave(a)    : [[cos 2a, sin 2a], [sin 2a, -cos 2a]]
//   quarter_wave(a) : e^{-i pi/4} [[c^2 + i s^2, (1-i) s c],
//                                  [(1-i) s c,   s^2 + i c^2]],  c=cos a, s=sin a
//   brewster_window(Th, Tv) : diag(sqrt(Th), sqrt(Tv)) on the amplitudes,
//                             Th/Tv the H/V intensity transmissions in (0, 1]
//   compensator(phi): diag(1, e^{i phi})
//   polarizer(axis) : diag(1, 0) for 'H', diag(0, 1) for 'V'
// Plate angles are given in degrees from the horizontal axis.
class Element {
 public:
  enum class Kind { HalfWave, QuarterWave, BrewsterWindow, Compensator, Polarizer };

  static Element half_wave(double angle_deg);
  static Element quarter_wave(double angle_deg);
  static Element brewster_window(double t_h, double t_v);
  static Element compensator(double phase_rad);
  static Element polarizer(char axis);

  Mat2 matrix() const;
  Kind kind() const { return kind_; }
  bool projective() const;  // true if the element can discard amplitude
  std::string describe() const;

 private:
  Element(Kind kind, double p1, double p2) : kind_(kind), p1_(p1), p2_(p2) {}
  Kind kind_;
  double p1_, p2_;
};

// Applies a one-arm Jones operator to the state.  The output ket is
// renormalised and the discarded probability is folded into the success
// probability.  If the surviving norm^2 falls below 1e-24 the state has been
// annihilated and AnnihilationError (naming `what`) is thrown.
TwoPhotonState apply_operator(const TwoPhotonState& state, const Mat2& op,
                              Arm arm, const std::string& what = "operator");

TwoPhotonState apply(const TwoPhotonState& state, const Element& element,
                     Arm arm);

// Polarisation analyser setting of one arm: an optional quarter-wave plate,
// then a half-wave plate, then a fixed polarizer transmitting `axis` ('H' or
// 'V').  Angles in degrees, as they appear on the physical mounts.  Note a
// quarter-wave plate at 0 deg is *not* "no quarter-wave plate": it still
// retards V against H.  Arms without a QWP leave qwp_deg empty.
struct ArmSetting {
  double hwp_deg = 0.0;
  std::optional<double> qwp_deg{};
  char axis = 'H';
};

// Analyser arm with a bare polarizer at `angle_deg`, realised as the
// half-wave plate at half that angle in front of the fixed H polarizer;
// transmits (cos a, sin a).
ArmSetting linear_setting(double angle_deg);

// Single-arm state the analyser transmits: (HWP * QWP)^dagger |axis>.
Vec2 projector_ket(const ArmSetting& setting);

// Tensor-product ket |signal setting> (x) |idler setting|>.
Vec4 setting_ket(const ArmSetting& signal, const ArmSetting& idler);

// Probability that a pair in `state` passes both analysers, including the
// state's accumulated success probability.
double coincidence_probability(const TwoPhotonState& state,
                               const ArmSetting& signal,
                               const ArmSetting& idler);

// Same for a density matrix (no success factor; rho is assumed normalised).
double probability_density(const Mat4& rho, const ArmSetting& signal,
                           const ArmSetting& idler);

// Checks hermiticity (1e-8), unit trace (1e-8) and positivity (eigenvalues
// > -1e-8); throws InputError naming the violated property.
void validate_density(const Mat4& rho);

// p |psi><psi| + (1 - p) I/4 for p in [0, 1].
Mat4 werner_mix(const TwoPhotonState& pure, double p);

// Relative phase theta = (k_z - k_y) L picked up by a V-polarised photon
// against an H-polarised one over `length_mm` of birefringent material at
// `lambda_um`, wrapped to (-pi, pi].  With a negative length this is the
// phase *removed* by a compensating element.
double birefringent_phase(const DispersionSet& disp, double lambda_um,
                          double length_mm, double temperature_c);

// Wraps any finite phase to (-pi, pi].
double wrap_phase(double phase_rad);

}  // namespace bqpm
