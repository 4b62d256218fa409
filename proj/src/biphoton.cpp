#include "bqpm/biphoton.hpp"

#include <cmath>
#include <sstream>

#include "bqpm/constants.hpp"
#include "bqpm/errors.hpp"

namespace bqpm {

namespace {

constexpr double kNormTol = 1e-9;
constexpr double kAnnihilationNormSq = 1e-24;

Mat4 one_arm_operator(const Mat2& op, Arm arm) {
  Mat4 out = Mat4::Zero();
  const Mat2 eye = Mat2::Identity();
  const Mat2& a = (arm == Arm::Signal) ? op : eye;
  const Mat2& b = (arm == Arm::Signal) ? eye : op;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

}  // namespace

TwoPhotonState::TwoPhotonState(const Vec4& amplitudes, double success)
    : amps_(amplitudes), success_(success) {
  if (!amps_.allFinite())
    throw InputError("two-photon state: amplitudes must be finite");
  const double norm = amps_.norm();
  if (std::abs(norm - 1.0) > kNormTol)
    throw InputError("two-photon state: amplitudes must be normalised "
                     "(|norm - 1| <= 1e-9)");
  amps_ /= norm;
  if (!std::isfinite(success_) || !(success_ > 0.0) || success_ > 1.0)
    throw InputError("two-photon state: success probability must be in (0, 1]");
}

TwoPhotonState TwoPhotonState::source(double ratio, double theta_rad) {
  if (!std::isfinite(ratio) || !(ratio > 0.0))
    throw InputError("source state: intensity ratio must be positive");
  if (!std::isfinite(theta_rad))
    throw InputError("source state: phase must be finite");
  const double denom = std::sqrt(ratio + 1.0);
  Vec4 amps = Vec4::Zero();
  amps(0) = Complex(1.0 / denom, 0.0);
  amps(3) = std::polar(std::sqrt(ratio) / denom, theta_rad);
  return TwoPhotonState(amps);
}

TwoPhotonState TwoPhotonState::bell_phi(double phase_rad) {
  if (!std::isfinite(phase_rad))
    throw InputError("bell state: phase must be finite");
  Vec4 amps = Vec4::Zero();
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  amps(0) = Complex(inv_sqrt2, 0.0);
  amps(3) = std::polar(inv_sqrt2, phase_rad);
  return TwoPhotonState(amps);
}

Complex TwoPhotonState::amplitude(int signal_hv, int idler_hv) const {
  if (signal_hv < 0 || signal_hv > 1 || idler_hv < 0 || idler_hv > 1)
    throw InputError("two-photon state: polarisation index must be 0 (H) or 1 (V)");
  return amps_(2 * signal_hv + idler_hv);
}

TwoPhotonState TwoPhotonState::canonical() const {
  for (int i = 0; i < 4; ++i) {
    const double mag = std::abs(amps_(i));
    if (mag > 1e-12) {
      const Complex rot = std::conj(amps_(i)) / mag;
      return TwoPhotonState(rot * amps_, success_);
    }
  }
  return *this;  // unreachable for a normalised state
}

Mat4 TwoPhotonState::density() const { return amps_ * amps_.adjoint(); }

Element Element::half_wave(double angle_deg) {
  if (!std::isfinite(angle_deg))
    throw InputError("half-wave plate: angle must be finite");
  return Element(Kind::HalfWave, angle_deg, 0.0);
}

Element Element::quarter_wave(double angle_deg) {
  if (!std::isfinite(angle_deg))
    throw InputError("quarter-wave plate: angle must be finite");
  return Element(Kind::QuarterWave, angle_deg, 0.0);
}

Element Element::brewster_window(double t_h, double t_v) {
  if (!std::isfinite(t_h) || !std::isfinite(t_v) || !(t_h > 0.0) ||
      !(t_v > 0.0) || t_h > 1.0 || t_v > 1.0)
    throw InputError("brewster window: transmissions must lie in (0, 1]");
  return Element(Kind::BrewsterWindow, t_h, t_v);
}

Element Element::compensator(double phase_rad) {
  if (!std::isfinite(phase_rad))
    throw InputError("compensator: phase must be finite");
  return Element(Kind::Compensator, phase_rad, 0.0);
}

Element Element::polarizer(char axis) {
  if (axis != 'H' && axis != 'V')
    throw InputError("polarizer: axis must be 'H' or 'V'");
  return Element(Kind::Polarizer, axis == 'H' ? 0.0 : 1.0, 0.0);
}

Mat2 Element::matrix() const {
  switch (kind_) {
    case Kind::HalfWave: {
      const double a = deg_to_rad(p1_);
      const double c = std::cos(2.0 * a), s = std::sin(2.0 * a);
      Mat2 m;
      m << c, s, s, -c;
      return m;
    }
    case Kind::QuarterWave: {
      const double a = deg_to_rad(p1_);
      const double c = std::cos(a), s = std::sin(a);
      const Complex i(0.0, 1.0);
      const Complex phase = std::polar(1.0, -kPi / 4.0);
      Mat2 m;
      m << c * c + i * s * s, (1.0 - i) * s * c,
           (1.0 - i) * s * c, s * s + i * c * c;
      return phase * m;
    }
    case Kind::BrewsterWindow: {
      Mat2 m = Mat2::Zero();
      m(0, 0) = std::sqrt(p1_);
      m(1, 1) = std::sqrt(p2_);
      return m;
    }
    case Kind::Compensator: {
      Mat2 m = Mat2::Zero();
      m(0, 0) = 1.0;
      m(1, 1) = std::polar(1.0, p1_);
      return m;
    }
    case Kind::Polarizer: {
      Mat2 m = Mat2::Zero();
      if (p1_ == 0.0)
        m(0, 0) = 1.0;
      else
        m(1, 1) = 1.0;
      return m;
    }
  }
  throw Error("element: unknown kind");
}

bool Element::projective() const {
  return kind_ == Kind::Polarizer ||
         (kind_ == Kind::BrewsterWindow && (p1_ < 1.0 || p2_ < 1.0));
}

std::string Element::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case Kind::HalfWave:
      out << "half-wave plate at " << p1_ << " deg";
      break;
    case Kind::QuarterWave:
      out << "quarter-wave plate at " << p1_ << " deg";
      break;
    case Kind::BrewsterWindow:
      out << "brewster window (Th=" << p1_ << ", Tv=" << p2_ << ")";
      break;
    case Kind::Compensator:
      out << "compensator (phi=" << p1_ << " rad)";
      break;
    case Kind::Polarizer:
      out << "polarizer (" << (p1_ == 0.0 ? 'H' : 'V') << ")";
      break;
  }
  return out.str();
}

TwoPhotonState apply_operator(const TwoPhotonState& state, const Mat2& op,
                              Arm arm, const std::string& what) {
  if (!op.allFinite()) throw InputError("apply: operator must be finite");
  const Vec4 out = one_arm_operator(op, arm) * state.amplitudes();
  const double norm_sq = out.squaredNorm();
  if (norm_sq < kAnnihilationNormSq) {
    std::ostringstream msg;
    msg << "state annihilated: " << what << " on the "
        << (arm == Arm::Signal ? "signal" : "idler")
        << " arm removed all remaining amplitude";
    throw AnnihilationError(msg.str());
  }
  const double success =
      std::min(1.0, state.success_probability() * std::min(norm_sq, 1.0));
  return TwoPhotonState(out / std::sqrt(norm_sq), success);
}

TwoPhotonState apply(const TwoPhotonState& state, const Element& element,
                     Arm arm) {
  return apply_operator(state, element.matrix(), arm, element.describe());
}

ArmSetting linear_setting(double angle_deg) {
  if (!std::isfinite(angle_deg))
    throw InputError("linear setting: angle must be finite");
  return ArmSetting{angle_deg / 2.0, std::nullopt, 'H'};
}

Vec2 projector_ket(const ArmSetting& setting) {
  if (setting.axis != 'H' && setting.axis != 'V')
    throw InputError("arm setting: axis must be 'H' or 'V'");
  Mat2 u = Element::half_wave(setting.hwp_deg).matrix();
  if (setting.qwp_deg)
    u = u * Element::quarter_wave(*setting.qwp_deg).matrix();
  Vec2 axis_ket = Vec2::Zero();
  axis_ket(setting.axis == 'H' ? 0 : 1) = 1.0;
  return u.adjoint() * axis_ket;
}

Vec4 setting_ket(const ArmSetting& signal, const ArmSetting& idler) {
  const Vec2 s = projector_ket(signal);
  const Vec2 i = projector_ket(idler);
  Vec4 out;
  out << s(0) * i(0), s(0) * i(1), s(1) * i(0), s(1) * i(1);
  return out;
}

double coincidence_probability(const TwoPhotonState& state,
                               const ArmSetting& signal,
                               const ArmSetting& idler) {
  const Complex overlap = setting_ket(signal, idler).dot(state.amplitudes());
  return state.success_probability() * std::norm(overlap);
}

double probability_density(const Mat4& rho, const ArmSetting& signal,
                           const ArmSetting& idler) {
  const Vec4 ket = setting_ket(signal, idler);
  const double p = ket.dot(rho * ket).real();
  return std::max(0.0, p);
}

void validate_density(const Mat4& rho) {
  if (!rho.allFinite()) throw InputError("density matrix: entries must be finite");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-8)
    throw InputError("density matrix: not hermitian");
  if (std::abs(rho.trace().real() - 1.0) > 1e-8 ||
      std::abs(rho.trace().imag()) > 1e-8)
    throw InputError("density matrix: trace must be 1");
  Eigen::SelfAdjointEigenSolver<Mat4> es(rho);
  if (es.eigenvalues().minCoeff() < -1e-8)
    throw InputError("density matrix: not positive semidefinite");
}

Mat4 werner_mix(const TwoPhotonState& pure, double p) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0)
    throw InputError("werner mix: weight must lie in [0, 1]");
  return p * pure.density() + (1.0 - p) * 0.25 * Mat4::Identity();
}

double birefringent_phase(const DispersionSet& disp, double lambda_um,
                          double length_mm, double temperature_c) {
  if (!std::isfinite(length_mm))
    throw InputError("birefringent phase: length must be finite");
  const double n_z = disp.model(Axis::Z).index(lambda_um, temperature_c);
  const double n_y = disp.model(Axis::Y).index(lambda_um, temperature_c);
  const double phase = kTwoPi / lambda_um * (n_z - n_y) * length_mm * 1e3;
  return wrap_phase(phase);
}

double wrap_phase(double phase_rad) {
  if (!std::isfinite(phase_rad))
    throw InputError("wrap_phase: phase must be finite");
  double wrapped = std::remainder(phase_rad, kTwoPi);
  if (wrapped <= -kPi) wrapped += kTwoPi;
  return wrapped;
}

}  // namespace bqpm
