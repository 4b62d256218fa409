#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bqpm/biphoton.hpp"
#include "bqpm/simulate.hpp"

namespace bqpm {

// ---------------------------------------------------------------------------
// Tomography
// ---------------------------------------------------------------------------

// The pinned 16-setting projective tomography table.  Reconstruction
// routines take count records *in table order*; use match() to get there
// from arbitrarily ordered input.
class TomographySettings {
 public:
  // Loads a setting table from JSON (schema: data/tomography_settings.json).
  // Throws IoError / InputError on unreadable or malformed files, including
  // duplicate labels.
  static TomographySettings load(const std::string& path);

  // The bundled 16-setting table, loaded once from the data directory.
  static const TomographySettings& standard16();

  const std::vector<MeasurementSetting>& settings() const { return settings_; }
  std::size_t size() const { return settings_.size(); }

  // Reorders `records` into table order, matching by label.  Every label of
  // the table must appear exactly once; anything missing, duplicated, or
  // unknown is an InputError naming the offending label.
  std::vector<CountRecord> match(const std::vector<CountRecord>& records) const;

 private:
  explicit TomographySettings(std::vector<MeasurementSetting> settings);
  std::vector<MeasurementSetting> settings_;
};

// Linear (direct-inversion) estimate from coincidence rates.  The result is
// hermitian with unit trace but, on noisy data, frequently has (small)
// negative eigenvalues -- it is a diagnostic, not a physical state.
// `records` must be in table order and carry positive durations.
Mat4 linear_reconstruct(const std::vector<CountRecord>& records,
                        const TomographySettings& settings);

struct MleResult {
  Mat4 rho = Mat4::Zero();
  double log_likelihood = 0.0;  // Poisson LL up to the n! terms, fitted flux
  int iterations = 0;
  bool converged = false;  // false: stopped on the stagnation window
};

// Maximum-likelihood estimate under the Poisson counting model,
//   mu_nu = flux * duration_nu * <k_nu| rho |k_nu>,
// with the flux profiled out analytically.  Iterates the standard
// fixed-point update rho <- normalize(A rho A^dagger) with
// A = G^-1 R(rho), R(rho) = sum_nu (n_nu / <k_nu|rho|k_nu>) |k_nu><k_nu|
// and G the duration-weighted sum of setting projectors (G^-1 accounts for
// the table's projectors not summing to the identity); positivity is
// preserved by construction.  A diluted map (1-lambda) I + lambda A/c backs
// the update off whenever a full step would lower the likelihood, which
// makes the iteration monotone, and near-zero eigenvalues are truncated to
// the boundary when the likelihood allows it (the fixed point alone
// approaches rank-deficient optima only harmonically).  Starts from the
// eigenvalue-clamped linear estimate; stops at a fixed point (state change
// below 1e-12 in max norm,
// or no ascent step left at working precision) with `converged` set, or
// once likelihood gains stay at the evaluation noise floor for five
// consecutive steps; throws ConvergenceError after 20000 iterations
// without either.
MleResult mle_reconstruct(const std::vector<CountRecord>& records,
                          const TomographySettings& settings);

// Poisson log-likelihood (same additive convention as MleResult) of a
// normalised density matrix against the records, with the overall flux set
// to its analytic optimum.  Lets callers compare candidate states on an
// equal footing.
double log_likelihood(const Mat4& rho, const std::vector<CountRecord>& records,
                      const TomographySettings& settings);

// ---------------------------------------------------------------------------
// State metrics
// ---------------------------------------------------------------------------

// <target| rho |target>, clamped to [0, 1].
double fidelity(const Mat4& rho, const TwoPhotonState& target);

// tr(rho^2).
double purity(const Mat4& rho);

// Wootters concurrence: with rho~ = (sigma_y x sigma_y) rho* (sigma_y x
// sigma_y) and l_1 >= ... >= l_4 the square roots of the eigenvalues of
// rho rho~, C = max(0, l_1 - l_2 - l_3 - l_4).
double concurrence(const Mat4& rho);

// ---------------------------------------------------------------------------
// Interference visibility
// ---------------------------------------------------------------------------

struct VisibilityFit {
  double mean = 0.0;       // fitted offset a
  double amplitude = 0.0;  // fitted modulation depth b = sqrt(p^2 + q^2)
  double phase_rad = 0.0;  // fitted phase: y = a + b cos(2 theta - phase)
  double visibility = 0.0; // b / a
  double rms_residual = 0.0;
};

// Exact least squares of y = a + p cos(2 theta) + q sin(2 theta).  Needs at
// least 4 points spanning at least half a fringe period (pi/2 in theta);
// a non-positive fitted mean is a FitError.
VisibilityFit fit_visibility(const std::vector<double>& theta_rad,
                             const std::vector<double>& values);

// ---------------------------------------------------------------------------
// CHSH
// ---------------------------------------------------------------------------

// Polarizer orientations (degrees) of the four CHSH measurement pairs.
struct ChshAngles {
  double a_deg = 0.0;
  double a_prime_deg = 45.0;
  double b_deg = 22.5;
  double b_prime_deg = 67.5;
};

// Correlation E(a, b) from the four linear-polarizer coincidence
// probabilities at (a, b), (a+90, b), (a, b+90), (a+90, b+90):
// E = (P00 + P11 - P01 - P10) / (sum).
double chsh_correlation(const Mat4& rho, double a_deg, double b_deg);

// S = E(a,b) - E(a,b') + E(a',b) + E(a',b').
double chsh_s(const Mat4& rho, const ChshAngles& angles);

struct ChshOptimum {
  ChshAngles angles;
  double s = 0.0;
};

// Maximises S over all four angles: coarse 22.5-degree grid scan followed
// by cyclic per-coordinate refinement to an angular resolution of 1e-4 rad.
ChshOptimum optimize_chsh_angles(const Mat4& rho);

// Horodecki-style bound for a pure state: S_max = 2 sqrt(1 + C^2) with C the
// concurrence of the state.
double pure_state_chsh_max(const TwoPhotonState& state);

// ---------------------------------------------------------------------------
// Bootstrap
// ---------------------------------------------------------------------------

struct BootstrapSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (n - 1)
  int resamples = 0;    // resamples that produced a value
  int failures = 0;     // resamples whose statistic threw
};

// Parametric bootstrap: each resample redraws every count of every record
// from Poisson(observed count) -- substream r uses substream_seed(seed, r),
// draws ordered (singles_s, singles_i, coincidences) per record -- and
// applies `statistic`.  Individual failures (convergence errors on
// pathological resamples) are tolerated up to 10% of the total, beyond
// which BootstrapError is thrown.  Needs resamples >= 2.
BootstrapSummary bootstrap(
    const std::vector<CountRecord>& records,
    const std::function<double(const std::vector<CountRecord>&)>& statistic,
    int resamples, std::uint64_t seed);

}  // namespace bqpm
