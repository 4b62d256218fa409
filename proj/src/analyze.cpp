#include "bqpm/analyze.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "bqpm/constants.hpp"
#include "bqpm/data_path.hpp"
#include "bqpm/errors.hpp"
#include "bqpm/rng.hpp"

namespace bqpm {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Tomography settings
// ---------------------------------------------------------------------------

TomographySettings::TomographySettings(std::vector<MeasurementSetting> settings)
    : settings_(std::move(settings)) {}

namespace {

ArmSetting parse_arm(const json& j, const std::string& context) {
  if (!j.is_object())
    throw InputError(context + ": arm setting must be an object");
  if (!j.contains("hwp_deg") || !j.at("hwp_deg").is_number())
    throw InputError(context + ": arm setting needs numeric 'hwp_deg'");
  if (!j.contains("qwp_deg") || !j.at("qwp_deg").is_number())
    throw InputError(context + ": arm setting needs numeric 'qwp_deg'");
  if (!j.contains("axis") || !j.at("axis").is_string())
    throw InputError(context + ": arm setting needs 'axis' of \"H\" or \"V\"");
  const std::string axis = j.at("axis").get<std::string>();
  if (axis != "H" && axis != "V")
    throw InputError(context + ": axis must be \"H\" or \"V\"");
  ArmSetting out;
  out.hwp_deg = j.at("hwp_deg").get<double>();
  out.qwp_deg = j.at("qwp_deg").get<double>();
  out.axis = axis[0];
  return out;
}

}  // namespace

TomographySettings TomographySettings::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open tomography settings file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InputError("tomography settings " + path + ": " + e.what());
  }
  if (!j.contains("settings") || !j.at("settings").is_array() ||
      j.at("settings").empty())
    throw InputError("tomography settings " + path +
                     ": missing non-empty 'settings' array");

  std::vector<MeasurementSetting> settings;
  std::map<std::string, int> seen;
  for (const json& entry : j.at("settings")) {
    if (!entry.contains("label") || !entry.at("label").is_string() ||
        entry.at("label").get<std::string>().empty())
      throw InputError("tomography settings: every entry needs a non-empty "
                       "'label'");
    const std::string label = entry.at("label").get<std::string>();
    const std::string ctx = "tomography setting '" + label + "'";
    if (++seen[label] > 1)
      throw InputError("tomography settings: duplicate label '" + label + "'");
    if (!entry.contains("id") || !entry.at("id").is_number_integer())
      throw InputError(ctx + ": needs integer 'id'");
    MeasurementSetting s;
    s.id = entry.at("id").get<int>();
    s.label = label;
    if (!entry.contains("signal") || !entry.contains("idler"))
      throw InputError(ctx + ": needs 'signal' and 'idler' arm settings");
    s.signal = parse_arm(entry.at("signal"), ctx + " (signal)");
    s.idler = parse_arm(entry.at("idler"), ctx + " (idler)");
    settings.push_back(std::move(s));
  }
  return TomographySettings(std::move(settings));
}

const TomographySettings& TomographySettings::standard16() {
  static const TomographySettings table = [] {
    TomographySettings t = load(data_file("tomography_settings.json"));
    if (t.size() != 16)
      throw InputError("bundled tomography table must hold 16 settings");
    return t;
  }();
  return table;
}

std::vector<CountRecord> TomographySettings::match(
    const std::vector<CountRecord>& records) const {
  std::map<std::string, const CountRecord*> by_label;
  for (const CountRecord& rec : records) {
    if (!by_label.emplace(rec.label, &rec).second)
      throw InputError("tomography counts: duplicate label '" + rec.label +
                       "'");
  }
  std::vector<CountRecord> ordered;
  ordered.reserve(settings_.size());
  for (const MeasurementSetting& s : settings_) {
    auto it = by_label.find(s.label);
    if (it == by_label.end())
      throw InputError("tomography counts: missing label '" + s.label + "'");
    ordered.push_back(*it->second);
    by_label.erase(it);
  }
  if (!by_label.empty())
    throw InputError("tomography counts: unknown label '" +
                     by_label.begin()->first + "'");
  return ordered;
}

// ---------------------------------------------------------------------------
// Reconstruction
// ---------------------------------------------------------------------------

namespace {

void check_records(const std::vector<CountRecord>& records,
                   const TomographySettings& settings) {
  if (settings.size() != 16)
    throw InputError("reconstruction requires the 16-setting table");
  if (records.size() != settings.size())
    throw InputError("reconstruction needs one record per setting");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const CountRecord& r = records[i];
    if (r.label != settings.settings()[i].label)
      throw InputError("reconstruction records out of table order; call "
                       "TomographySettings::match first (got '" + r.label +
                       "')");
    if (r.coincidences < 0 || r.singles_s < 0 || r.singles_i < 0)
      throw InputError("record '" + r.label + "': counts must be >= 0");
    if (!std::isfinite(r.duration_s) || !(r.duration_s > 0.0))
      throw InputError("record '" + r.label + "': duration must be positive");
  }
}

std::array<Mat4, 16> pauli_basis() {
  std::array<Mat2, 4> sigma;
  const Complex i(0.0, 1.0);
  sigma[0] << 1, 0, 0, 1;
  sigma[1] << 0, 1, 1, 0;
  sigma[2] << 0, -i, i, 0;
  sigma[3] << 1, 0, 0, -1;
  std::array<Mat4, 16> basis;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      Mat4 m;
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
          m.block<2, 2>(2 * r, 2 * c) = sigma[a](r, c) * sigma[b];
      basis[4 * a + b] = m;
    }
  return basis;
}

std::vector<Vec4> setting_kets(const TomographySettings& settings) {
  std::vector<Vec4> kets;
  kets.reserve(settings.size());
  for (const MeasurementSetting& s : settings.settings())
    kets.push_back(setting_ket(s.signal, s.idler));
  return kets;
}

}  // namespace

Mat4 linear_reconstruct(const std::vector<CountRecord>& records,
                        const TomographySettings& settings) {
  check_records(records, settings);
  const std::vector<Vec4> kets = setting_kets(settings);
  const std::array<Mat4, 16> basis = pauli_basis();

  Eigen::MatrixXd a(16, 16);
  Eigen::VectorXd rates(16);
  for (int nu = 0; nu < 16; ++nu) {
    for (int k = 0; k < 16; ++k)
      a(nu, k) = kets[nu].dot(basis[k] * kets[nu]).real();
    rates(nu) =
        static_cast<double>(records[nu].coincidences) / records[nu].duration_s;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible())
    throw InputError("linear reconstruction: settings are not "
                     "tomographically complete");
  const Eigen::VectorXd y = lu.solve(rates);

  Mat4 rho = Mat4::Zero();
  for (int k = 0; k < 16; ++k) rho += y(k) * basis[k];
  const double trace = rho.trace().real();
  if (!(std::abs(trace) > 1e-12 * (1.0 + y.cwiseAbs().sum())))
    throw InputError("linear reconstruction: counts carry no signal "
                     "(vanishing trace)");
  rho /= trace;
  // (Numerical) hermiticity by construction; tidy the representation.
  rho = 0.5 * (rho + Mat4(rho.adjoint()));
  return rho;
}

// ---------------------------------------------------------------------------
// Maximum likelihood
// ---------------------------------------------------------------------------

namespace {

// Poisson log-likelihood of a candidate state with the overall flux profiled
// out analytically (optimal scale = sum n / sum duration * q).  Matches the
// convention of the standalone log_likelihood() below so the reported
// objective is directly comparable across routines.
double profiled_ll(const Mat4& rho, const std::vector<Vec4>& kets,
                   const std::vector<double>& counts,
                   const std::vector<double>& durations, double total_counts) {
  const std::size_t n = kets.size();
  double predicted = 0.0;
  std::vector<double> q(n);
  for (std::size_t nu = 0; nu < n; ++nu) {
    q[nu] = durations[nu] * std::max(0.0, kets[nu].dot(rho * kets[nu]).real());
    predicted += q[nu];
  }
  if (!(predicted > 0.0)) return -std::numeric_limits<double>::infinity();
  const double scale = total_counts / predicted;
  double ll = 0.0;
  for (std::size_t nu = 0; nu < n; ++nu) {
    const double mu = scale * q[nu];
    if (counts[nu] > 0.0) {
      if (!(mu > 0.0)) return -std::numeric_limits<double>::infinity();
      ll += counts[nu] * std::log(mu) - mu;
    } else {
      ll += -mu;
    }
  }
  return ll;
}

}  // namespace

MleResult mle_reconstruct(const std::vector<CountRecord>& records,
                          const TomographySettings& settings) {
  check_records(records, settings);

  const std::vector<Vec4> kets = setting_kets(settings);
  const std::size_t n_set = kets.size();
  std::vector<double> counts(n_set), durations(n_set);
  double total_counts = 0.0;
  for (std::size_t nu = 0; nu < n_set; ++nu) {
    counts[nu] = static_cast<double>(records[nu].coincidences);
    durations[nu] = records[nu].duration_s;
    total_counts += counts[nu];
  }
  if (!(total_counts > 0.0))
    throw InputError("mle reconstruction: no coincidences recorded");

  // With the flux profiled out the objective is
  //   L(rho) = sum_nu n_nu log<k_nu|rho|k_nu> - N log tr(G rho) + const,
  // with G = sum_nu d_nu |k_nu><k_nu| the duration-weighted frame operator.
  // Stationarity on the state simplex reads R(rho) rho = f G rho, where
  // R(rho) = sum_nu (n_nu / <k_nu|rho|k_nu>) |k_nu><k_nu| and f is the
  // fitted flux.  The table's projectors do not sum to a multiple of the
  // identity, so the plain R rho R fixed point would sit at the wrong state;
  // conjugating the update by G^-1 restores it:
  //   rho <- normalize(G^-1 R rho R G^-1).
  Mat4 g = Mat4::Zero();
  for (std::size_t nu = 0; nu < n_set; ++nu)
    g += durations[nu] * (kets[nu] * kets[nu].adjoint());
  const Mat4 gi = g.inverse();

  // Initial point: the linear estimate with eigenvalues clamped away from
  // zero so every setting starts at strictly positive probability.  The
  // clamp must be small: near a rank-deficient optimum the likelihood is
  // flat to first order in a spurious admixture (penalty O(N eps^2)), so
  // the iteration sheds excess weight only harmonically and whatever the
  // clamp injects effectively stays.  Growing an eigenvalue, by contrast,
  // is geometric, so a small clamp costs nothing on noisy data.
  Mat4 rho = linear_reconstruct(records, settings);
  {
    Eigen::SelfAdjointEigenSolver<Mat4> es(rho);
    const Eigen::Vector4d vals = es.eigenvalues().cwiseMax(1e-8);
    rho = es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
    rho /= rho.trace().real();
  }

  double ll = profiled_ll(rho, kets, counts, durations, total_counts);
  if (!std::isfinite(ll))
    throw ConvergenceError("mle reconstruction: initial point infeasible");

  constexpr int kMaxIter = 20000;
  constexpr double kResidualTol = 1e-12;  // max-norm change of rho, full step
  constexpr double kSnapTol = 1e-2;       // eigenvalues considered boundary
  // The likelihood can plateau for a step or two while eigenvalues still
  // move, so stagnation must persist over a window before we stop on it.
  constexpr int kStallWindow = 5;
  int stall = 0;
  MleResult result;
  for (int iter = 1; iter <= kMaxIter; ++iter) {
    // Gains below the evaluation noise of the objective (relative floor of
    // 1e-13, a safe margin over the ~4e-16 summation error) cannot be
    // distinguished from round-off.
    const double noise_floor = 1e-9 + 1e-13 * std::abs(ll);

    // Rank-deficient optima are approached only harmonically by the
    // fixed-point map (the likelihood is flat to first order in a small
    // eigenvalue), so propose truncating near-zero eigenvalues outright and
    // keep the truncation whenever the likelihood does not object beyond
    // its noise.  A genuinely resolved interior eigenvalue rejects the
    // proposal through the likelihood check.
    {
      Eigen::SelfAdjointEigenSolver<Mat4> es(rho);
      const Eigen::Vector4d orig = es.eigenvalues();
      Eigen::Vector4d vals = orig;
      bool truncated = false;
      for (int i = 0; i < 4; ++i)
        if (vals(i) != 0.0 && vals(i) < kSnapTol) {
          vals(i) = 0.0;
          truncated = true;
        }
      if (truncated) {
        const auto assemble = [&es](const Eigen::Vector4d& v) {
          Mat4 m =
              es.eigenvectors() * v.asDiagonal() * es.eigenvectors().adjoint();
          m = 0.5 * (m + Mat4(m.adjoint()));
          m /= m.trace().real();
          return m;
        };
        Mat4 snapped = assemble(vals);
        // Boundary optimality screen: a zeroed direction whose projected
        // likelihood gradient points back into the interior belongs in the
        // support, so reseed it with a small weight instead of locking the
        // rank -- an exact zero could only regrow through the map
        // amplifying rounding dust of arbitrary sign.
        {
          double predicted_s = 0.0;
          std::vector<double> q_s(n_set);
          for (std::size_t nu = 0; nu < n_set; ++nu) {
            q_s[nu] = std::max(0.0, kets[nu].dot(snapped * kets[nu]).real());
            predicted_s += durations[nu] * q_s[nu];
          }
          const double f_s = total_counts / std::max(predicted_s, 1e-300);
          Mat4 grad = -f_s * g;
          for (std::size_t nu = 0; nu < n_set; ++nu) {
            if (!(counts[nu] > 0.0)) continue;
            grad += (counts[nu] / std::max(q_s[nu], 1e-30)) *
                    (kets[nu] * kets[nu].adjoint());
          }
          bool reseeded = false;
          for (int i = 0; i < 4; ++i) {
            if (vals(i) != 0.0) continue;
            const Vec4 dir = es.eigenvectors().col(i);
            const double pull = dir.dot(grad * dir).real();
            const double pull_scale = f_s * dir.dot(g * dir).real();
            if (pull > 1e-6 * pull_scale) {
              vals(i) = std::max(orig(i), 1e-8);
              reseeded = true;
            }
          }
          if (reseeded) snapped = assemble(vals);
        }
        const double ll_snap =
            profiled_ll(snapped, kets, counts, durations, total_counts);
        if (ll_snap >= ll - noise_floor) {
          rho = snapped;
          ll = ll_snap;
        }
      }
    }

    Mat4 r_op = Mat4::Zero();
    for (std::size_t nu = 0; nu < n_set; ++nu) {
      if (!(counts[nu] > 0.0)) continue;
      const double qr = std::max(kets[nu].dot(rho * kets[nu]).real(), 1e-30);
      r_op += (counts[nu] / qr) * (kets[nu] * kets[nu].adjoint());
    }
    const Mat4 a = gi * r_op;  // a rho a^dagger stays positive semidefinite

    Mat4 cand = a * rho * a.adjoint();
    cand = 0.5 * (cand + Mat4(cand.adjoint()));
    const double tr = cand.trace().real();
    if (!(tr > 0.0)) {  // defensive; cannot occur once counts are present
      result.iterations = iter;
      break;
    }
    cand /= tr;
    const double residual = (cand - rho).cwiseAbs().maxCoeff();

    double ll_new = profiled_ll(cand, kets, counts, durations, total_counts);
    if (!(ll_new >= ll)) {
      // Diluted map (1 - lambda) I + lambda a / c: an ascent step for small
      // enough lambda, so backtrack until the likelihood improves.
      const double c = std::max((a * rho).trace().real(), 1e-300);
      bool improved = false;
      for (double lambda = 0.5; lambda > 1e-6; lambda *= 0.5) {
        const Mat4 m = (1.0 - lambda) * Mat4::Identity() + (lambda / c) * a;
        cand = m * rho * m.adjoint();
        cand = 0.5 * (cand + Mat4(cand.adjoint()));
        cand /= cand.trace().real();
        ll_new = profiled_ll(cand, kets, counts, durations, total_counts);
        if (ll_new > ll) {
          improved = true;
          break;
        }
      }
      if (!improved) {
        // No ascent direction at working precision: numerically stationary.
        result.converged = true;
        result.iterations = iter;
        break;
      }
    }

    const double gain = ll_new - ll;
    rho = cand;
    ll = ll_new;
    if (residual < kResidualTol) {
      result.converged = true;
      result.iterations = iter;
      break;
    }
    stall = gain < noise_floor ? stall + 1 : 0;
    if (stall >= kStallWindow) {
      result.iterations = iter;
      break;
    }
    if (iter == kMaxIter)
      throw ConvergenceError(
          "mle reconstruction: no convergence within 20000 iterations");
  }

  rho = 0.5 * (rho + Mat4(rho.adjoint()));
  rho /= rho.trace().real();
  result.rho = rho;
  result.log_likelihood =
      profiled_ll(rho, kets, counts, durations, total_counts);
  return result;
}

double log_likelihood(const Mat4& rho, const std::vector<CountRecord>& records,
                      const TomographySettings& settings) {
  check_records(records, settings);
  validate_density(rho);
  const std::vector<Vec4> kets = setting_kets(settings);
  double total = 0.0, predicted = 0.0;
  std::vector<double> q(records.size());
  for (std::size_t nu = 0; nu < records.size(); ++nu) {
    q[nu] = records[nu].duration_s *
            std::max(0.0, kets[nu].dot(rho * kets[nu]).real());
    predicted += q[nu];
    total += static_cast<double>(records[nu].coincidences);
  }
  if (!(predicted > 0.0))
    throw InputError("log likelihood: state predicts no counts anywhere");
  const double scale = total / predicted;  // analytic optimum of the flux
  double ll = 0.0;
  for (std::size_t nu = 0; nu < records.size(); ++nu) {
    const double mu = scale * q[nu];
    const double n = static_cast<double>(records[nu].coincidences);
    if (n > 0.0) {
      if (!(mu > 0.0)) return -std::numeric_limits<double>::infinity();
      ll += n * std::log(mu) - mu;
    } else {
      ll += -mu;
    }
  }
  return ll;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

double fidelity(const Mat4& rho, const TwoPhotonState& target) {
  validate_density(rho);
  const Vec4& psi = target.amplitudes();
  const double f = psi.dot(rho * psi).real();
  return std::clamp(f, 0.0, 1.0);
}

double purity(const Mat4& rho) {
  validate_density(rho);
  return std::clamp((rho * rho).trace().real(), 0.0, 1.0);
}

double concurrence(const Mat4& rho) {
  validate_density(rho);
  Mat4 syy = Mat4::Zero();
  syy(0, 3) = -1.0;
  syy(1, 2) = 1.0;
  syy(2, 1) = 1.0;
  syy(3, 0) = -1.0;
  const Mat4 rho_tilde = syy * rho.conjugate() * syy;
  Eigen::ComplexEigenSolver<Mat4> es(rho * rho_tilde);
  if (es.info() != Eigen::Success)
    throw ConvergenceError("concurrence: eigenvalue iteration failed");
  std::array<double, 4> lambda{};
  for (int i = 0; i < 4; ++i)
    lambda[i] = std::sqrt(std::max(0.0, es.eigenvalues()(i).real()));
  std::sort(lambda.begin(), lambda.end(), std::greater<>());
  return std::max(0.0, lambda[0] - lambda[1] - lambda[2] - lambda[3]);
}

// ---------------------------------------------------------------------------
// Visibility
// ---------------------------------------------------------------------------

VisibilityFit fit_visibility(const std::vector<double>& theta_rad,
                             const std::vector<double>& values) {
  if (theta_rad.size() != values.size())
    throw InputError("visibility fit: angle and value arrays differ in size");
  const std::size_t n = theta_rad.size();
  if (n < 4)
    throw InputError("visibility fit: need at least 4 points");
  double lo = theta_rad[0], hi = theta_rad[0];
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(theta_rad[i]) || !std::isfinite(values[i]))
      throw InputError("visibility fit: inputs must be finite");
    lo = std::min(lo, theta_rad[i]);
    hi = std::max(hi, theta_rad[i]);
  }
  if (hi - lo < kPi / 2.0 - 1e-9)
    throw InputError("visibility fit: angles must span at least half a "
                     "fringe period (pi/2)");

  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = std::cos(2.0 * theta_rad[i]);
    x(i, 2) = std::sin(2.0 * theta_rad[i]);
    y(i) = values[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < 3)
    throw InputError("visibility fit: angles do not determine the fringe "
                     "(rank-deficient design)");
  const Eigen::Vector3d coef = qr.solve(y);

  VisibilityFit fit;
  fit.mean = coef(0);
  fit.amplitude = std::hypot(coef(1), coef(2));
  fit.phase_rad = std::atan2(coef(2), coef(1));
  fit.rms_residual = (x * coef - y).norm() / std::sqrt(static_cast<double>(n));
  if (!(fit.mean > 0.0))
    throw FitError("visibility fit: non-positive mean level, visibility "
                   "undefined");
  fit.visibility = fit.amplitude / fit.mean;
  return fit;
}

// ---------------------------------------------------------------------------
// CHSH
// ---------------------------------------------------------------------------

double chsh_correlation(const Mat4& rho, double a_deg, double b_deg) {
  auto p = [&](double sa, double sb) {
    return probability_density(rho, linear_setting(sa), linear_setting(sb));
  };
  const double p00 = p(a_deg, b_deg);
  const double p01 = p(a_deg, b_deg + 90.0);
  const double p10 = p(a_deg + 90.0, b_deg);
  const double p11 = p(a_deg + 90.0, b_deg + 90.0);
  const double sum = p00 + p01 + p10 + p11;
  if (!(sum > 0.0))
    throw InputError("chsh correlation: state yields no counts at these "
                     "angles");
  return (p00 + p11 - p01 - p10) / sum;
}

double chsh_s(const Mat4& rho, const ChshAngles& angles) {
  validate_density(rho);
  return chsh_correlation(rho, angles.a_deg, angles.b_deg) -
         chsh_correlation(rho, angles.a_deg, angles.b_prime_deg) +
         chsh_correlation(rho, angles.a_prime_deg, angles.b_deg) +
         chsh_correlation(rho, angles.a_prime_deg, angles.b_prime_deg);
}

ChshOptimum optimize_chsh_angles(const Mat4& rho) {
  validate_density(rho);
  auto s_of = [&](const std::array<double, 4>& a) {
    const ChshAngles angles{a[0], a[1], a[2], a[3]};
    return chsh_correlation(rho, angles.a_deg, angles.b_deg) -
           chsh_correlation(rho, angles.a_deg, angles.b_prime_deg) +
           chsh_correlation(rho, angles.a_prime_deg, angles.b_deg) +
           chsh_correlation(rho, angles.a_prime_deg, angles.b_prime_deg);
  };

  // Coarse scan: every angle over [0, 180) in 22.5-degree steps.  The grid
  // contains sign flips of every correlation, so the global maximum of |S|
  // is reached with positive sign somewhere on it.
  std::array<double, 4> best{};
  double best_s = -std::numeric_limits<double>::infinity();
  std::array<double, 4> a{};
  for (int i0 = 0; i0 < 8; ++i0)
    for (int i1 = 0; i1 < 8; ++i1)
      for (int i2 = 0; i2 < 8; ++i2)
        for (int i3 = 0; i3 < 8; ++i3) {
          a = {22.5 * i0, 22.5 * i1, 22.5 * i2, 22.5 * i3};
          const double s = s_of(a);
          if (s > best_s) {
            best_s = s;
            best = a;
          }
        }

  // Cyclic coordinate refinement: bracketed 9-point scans with a shrinking
  // radius down to 1e-4 rad.
  double radius = 11.25;
  const double target_deg = rad_to_deg(1e-4);
  while (radius > target_deg / 2.0) {
    for (int coord = 0; coord < 4; ++coord) {
      std::array<double, 4> trial = best;
      for (int k = -4; k <= 4; ++k) {
        trial[coord] = best[coord] + radius * k / 4.0;
        const double s = s_of(trial);
        if (s > best_s) {
          best_s = s;
          best[coord] = trial[coord];
        }
      }
    }
    radius *= 0.25;
  }
  return {ChshAngles{best[0], best[1], best[2], best[3]}, best_s};
}

double pure_state_chsh_max(const TwoPhotonState& state) {
  const Vec4& psi = state.amplitudes();
  // Pure-state concurrence 2 |a d - b c| in the (HH, HV, VH, VV) basis.
  const double c =
      2.0 * std::abs(psi(0) * psi(3) - psi(1) * psi(2));
  return 2.0 * std::sqrt(1.0 + c * c);
}

// ---------------------------------------------------------------------------
// Bootstrap
// ---------------------------------------------------------------------------

BootstrapSummary bootstrap(
    const std::vector<CountRecord>& records,
    const std::function<double(const std::vector<CountRecord>&)>& statistic,
    int resamples, std::uint64_t seed) {
  if (resamples < 2)
    throw InputError("bootstrap: need at least 2 resamples");
  if (records.empty()) throw InputError("bootstrap: no records");
  if (!statistic) throw InputError("bootstrap: statistic must be callable");

  std::vector<double> values;
  values.reserve(resamples);
  int failures = 0;
  std::vector<CountRecord> resample = records;
  for (int r = 0; r < resamples; ++r) {
    Rng rng(substream_seed(seed, static_cast<std::uint64_t>(r)));
    for (std::size_t i = 0; i < records.size(); ++i) {
      resample[i] = records[i];
      resample[i].singles_s =
          rng.poisson(static_cast<double>(records[i].singles_s));
      resample[i].singles_i =
          rng.poisson(static_cast<double>(records[i].singles_i));
      resample[i].coincidences =
          rng.poisson(static_cast<double>(records[i].coincidences));
    }
    try {
      const double v = statistic(resample);
      if (!std::isfinite(v)) throw ConvergenceError("non-finite statistic");
      values.push_back(v);
    } catch (const Error&) {
      ++failures;
    }
  }
  if (failures * 10 > resamples)
    throw BootstrapError("bootstrap: more than 10% of resamples failed (" +
                         std::to_string(failures) + " of " +
                         std::to_string(resamples) + ")");
  if (values.size() < 2)
    throw BootstrapError("bootstrap: fewer than 2 usable resamples");

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size() - 1);

  BootstrapSummary summary;
  summary.mean = mean;
  summary.stddev = std::sqrt(var);
  summary.resamples = static_cast<int>(values.size());
  summary.failures = failures;
  return summary;
}

}  // namespace bqpm
