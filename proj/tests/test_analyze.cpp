#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bqpm/analyze.hpp"
#include "bqpm/biphoton.hpp"
#include "bqpm/constants.hpp"
#include "bqpm/errors.hpp"
#include "bqpm/rng.hpp"
#include "bqpm/simulate.hpp"

using bqpm::Complex;
using bqpm::CountRecord;
using bqpm::DetectionChain;
using bqpm::Mat4;
using bqpm::TomographySettings;
using bqpm::TwoPhotonState;
using bqpm::Vec4;

namespace {

constexpr double kR = 14.83;
const double kSqrt2 = std::sqrt(2.0);

Complex gauss(bqpm::Rng& rng) {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return Complex(r * std::cos(bqpm::kTwoPi * u2),
                 r * std::sin(bqpm::kTwoPi * u2));
}

TwoPhotonState random_pure(bqpm::Rng& rng) {
  Vec4 v;
  for (int i = 0; i < 4; ++i) v(i) = gauss(rng);
  v.normalize();
  return TwoPhotonState(v);
}

Mat4 random_mixed(bqpm::Rng& rng) {
  Mat4 g;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) g(i, j) = gauss(rng);
  Mat4 rho = g * g.adjoint();
  rho /= rho.trace().real();
  return rho;
}

// Expected-count records (no noise) for a density matrix at a given flux.
std::vector<CountRecord> noiseless_records(const Mat4& rho, double flux) {
  const TomographySettings& table = TomographySettings::standard16();
  DetectionChain unit;
  std::vector<CountRecord> out;
  for (const bqpm::MeasurementSetting& s : table.settings()) {
    const bqpm::ExpectedRates r = bqpm::expected_rates(rho, s, flux, unit);
    CountRecord rec;
    rec.setting_id = s.id;
    rec.label = s.label;
    rec.singles_s = std::llround(r.singles_s);
    rec.singles_i = std::llround(r.singles_i);
    rec.coincidences = std::llround(r.true_coincidences);
    rec.duration_s = 1.0;
    out.push_back(rec);
  }
  return out;
}

double max_abs_diff(const Mat4& a, const Mat4& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_SUITE("analyze") {

TEST_CASE("pinned tomography table") {
  const TomographySettings& table = TomographySettings::standard16();
  REQUIRE(table.size() == 16);
  const char* want[16] = {"HH", "HV", "VV", "VH", "RH", "RV", "DV", "DH",
                          "DR", "DD", "RD", "HD", "VD", "VL", "HL", "RL"};
  for (int i = 0; i < 16; ++i) CHECK(table.settings()[i].label == want[i]);
  // Singleton: repeated access returns the same object.
  CHECK(&table == &TomographySettings::standard16());
}

TEST_CASE("record matching by label") {
  const TomographySettings& table = TomographySettings::standard16();
  std::vector<CountRecord> recs =
      noiseless_records(TwoPhotonState::bell_phi(0.0).density(), 1e6);
  // Reverse the order; match() restores table order.
  std::vector<CountRecord> shuffled(recs.rbegin(), recs.rend());
  const std::vector<CountRecord> sorted = table.match(shuffled);
  REQUIRE(sorted.size() == 16);
  for (int i = 0; i < 16; ++i)
    CHECK(sorted[i].label == table.settings()[i].label);

  SUBCASE("missing label") {
    shuffled.pop_back();
    CHECK_THROWS_WITH_AS(table.match(shuffled),
                         doctest::Contains("missing label 'HH'"),
                         bqpm::InputError);
  }
  SUBCASE("duplicate label") {
    shuffled.push_back(shuffled.front());
    CHECK_THROWS_WITH_AS(table.match(shuffled),
                         doctest::Contains("duplicate label"),
                         bqpm::InputError);
  }
  SUBCASE("unknown label") {
    // All sixteen table labels present, plus a stray one.
    CountRecord stray = shuffled.front();
    stray.label = "XX";
    shuffled.push_back(stray);
    CHECK_THROWS_WITH_AS(table.match(shuffled),
                         doctest::Contains("unknown label 'XX'"),
                         bqpm::InputError);
  }
  SUBCASE("reconstruction insists on table order") {
    CHECK_THROWS_WITH_AS(bqpm::linear_reconstruct(shuffled, table),
                         doctest::Contains("match"), bqpm::InputError);
  }
}

TEST_CASE("linear reconstruction inverts exact counts") {
  const TomographySettings& table = TomographySettings::standard16();
  bqpm::Rng rng(20240517);
  for (int trial = 0; trial < 5; ++trial) {
    const Mat4 rho = random_mixed(rng);
    const Mat4 est = bqpm::linear_reconstruct(noiseless_records(rho, 1e9), table);
    CHECK(max_abs_diff(est, rho) < 1e-6);
    CHECK(std::abs(est.trace().real() - 1.0) < 1e-9);
    CHECK(max_abs_diff(est, est.adjoint()) < 1e-12);
  }
}

TEST_CASE("mle recovers pure states from noiseless counts") {
  const TomographySettings& table = TomographySettings::standard16();
  bqpm::Rng rng(7777);
  for (int trial = 0; trial < 6; ++trial) {
    const TwoPhotonState psi = random_pure(rng);
    const bqpm::MleResult res =
        bqpm::mle_reconstruct(noiseless_records(psi.density(), 1e9), table);
    CHECK(bqpm::fidelity(res.rho, psi) > 1.0 - 1e-6);
    CHECK(res.iterations > 0);
  }
}

TEST_CASE("mle recovers mixed states from noiseless counts") {
  const TomographySettings& table = TomographySettings::standard16();
  bqpm::Rng rng(31337);
  for (int trial = 0; trial < 6; ++trial) {
    const Mat4 rho = random_mixed(rng);
    const bqpm::MleResult res =
        bqpm::mle_reconstruct(noiseless_records(rho, 1e9), table);
    CHECK(max_abs_diff(res.rho, rho) < 1e-4);
  }
}

TEST_CASE("mle output is physical and likelihood-dominant on noisy counts") {
  const TomographySettings& table = TomographySettings::standard16();
  const Mat4 truth = bqpm::werner_mix(TwoPhotonState::bell_phi(0.0), 0.9293);
  DetectionChain unit;
  const std::vector<CountRecord> recs =
      bqpm::simulate_counts(truth, table.settings(), 4e4, unit, 1.0, 271828);
  const bqpm::MleResult res = bqpm::mle_reconstruct(recs, table);
  // The fixed-point update preserves positivity, so the result is physical.
  Eigen::SelfAdjointEigenSolver<Mat4> eig(res.rho);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
  CHECK(std::abs(res.rho.trace().real() - 1.0) < 1e-10);
  // The fit cannot be beaten by the generating state...
  CHECK(res.log_likelihood >= bqpm::log_likelihood(truth, recs, table) - 1e-6);
  // ...and the reported objective matches the standalone evaluation.
  CHECK(res.log_likelihood ==
        doctest::Approx(bqpm::log_likelihood(res.rho, recs, table))
            .epsilon(1e-9));
}

TEST_CASE("fidelity") {
  const TwoPhotonState phip = TwoPhotonState::bell_phi(0.0);
  const TwoPhotonState phim = TwoPhotonState::bell_phi(bqpm::kPi);
  CHECK(bqpm::fidelity(phip.density(), phip) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bqpm::fidelity(phip.density(), phim) == doctest::Approx(0.0).epsilon(1e-12));
  // Product state |HV> has no overlap with either Bell state.
  const TwoPhotonState hv(Vec4(0.0, 1.0, 0.0, 0.0));
  CHECK(bqpm::fidelity(hv.density(), phip) < 1e-14);

  // Asymmetric source state against |Phi->: ((1+sqrt(R))^2) / (2(R+1)).
  const TwoPhotonState src = TwoPhotonState::source(kR, bqpm::kPi);
  const double closed =
      (1.0 + std::sqrt(kR)) * (1.0 + std::sqrt(kR)) / (2.0 * (kR + 1.0));
  CHECK(bqpm::fidelity(src.density(), phim) ==
        doctest::Approx(closed).epsilon(1e-12));
  CHECK(closed == doctest::Approx(0.743270619).epsilon(1e-9));

  // Linearity in the state argument.
  const Mat4 mix = 0.3 * src.density() + 0.7 * hv.density();
  CHECK(bqpm::fidelity(mix, phim) ==
        doctest::Approx(0.3 * closed).epsilon(1e-12));
}

TEST_CASE("purity") {
  CHECK(bqpm::purity(TwoPhotonState::bell_phi(0.0).density()) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bqpm::purity(Mat4::Identity() / 4.0) ==
        doctest::Approx(0.25).epsilon(1e-12));
  for (double p : {0.0, 0.5, 0.9293, 1.0}) {
    const Mat4 w = bqpm::werner_mix(TwoPhotonState::bell_phi(0.0), p);
    CHECK(bqpm::purity(w) ==
          doctest::Approx((1.0 + 3.0 * p * p) / 4.0).epsilon(1e-12));
  }
}

TEST_CASE("concurrence") {
  CHECK(bqpm::concurrence(TwoPhotonState::bell_phi(0.0).density()) ==
        doctest::Approx(1.0).epsilon(2e-7));
  CHECK(bqpm::concurrence(Mat4::Identity() / 4.0) ==
        doctest::Approx(0.0).epsilon(1e-8));
  CHECK(bqpm::concurrence(TwoPhotonState(Vec4(0.0, 1.0, 0.0, 0.0)).density()) <
        1e-7);
  // Source state: C = 2 sqrt(R) / (R + 1), independent of the phase.
  const double c_src = 2.0 * std::sqrt(kR) / (kR + 1.0);
  CHECK(c_src == doctest::Approx(0.486541239).epsilon(1e-9));
  // Rank-1 inputs leave three near-zero eigenvalues whose square roots
  // carry ~1e-8 of solver noise into C, so the tolerance sits above that.
  for (double theta : {0.0, bqpm::kPi, -2.59})
    CHECK(bqpm::concurrence(TwoPhotonState::source(kR, theta).density()) ==
          doctest::Approx(c_src).epsilon(2e-7));
  // Werner line: C = max(0, (3p - 1) / 2).
  for (double p : {0.2, 1.0 / 3.0, 0.6, 0.9293})
    CHECK(bqpm::concurrence(bqpm::werner_mix(TwoPhotonState::bell_phi(0.0), p)) ==
          doctest::Approx(std::max(0.0, (3.0 * p - 1.0) / 2.0)).epsilon(1e-8));
}

TEST_CASE("visibility fit recovers an exact fringe") {
  std::vector<double> theta, values;
  for (int k = 0; k < 9; ++k) {
    const double t = k * bqpm::kPi / 8.0;
    theta.push_back(t);
    values.push_back(2.0 + 1.2 * std::cos(2.0 * t - 0.7));
  }
  const bqpm::VisibilityFit fit = bqpm::fit_visibility(theta, values);
  CHECK(fit.mean == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.amplitude == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(fit.phase_rad == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(fit.visibility == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(fit.rms_residual < 1e-12);
}

TEST_CASE("visibility fit input guards") {
  std::vector<double> theta = {0.0, 0.6, 1.2, 1.8};  // span 1.8 > pi/2
  std::vector<double> vals = {1.0, 2.0, 1.0, 2.0};
  CHECK_THROWS_AS(bqpm::fit_visibility({0.0, 0.5, 1.0}, {1.0, 2.0, 1.0}),
                  bqpm::InputError);  // too few points
  CHECK_THROWS_AS(bqpm::fit_visibility({0.0, 0.1, 0.2, 0.3}, vals),
                  bqpm::InputError);  // span below half a period
  CHECK_THROWS_AS(bqpm::fit_visibility(theta, {1.0, 2.0, 1.0}),
                  bqpm::InputError);  // length mismatch
  // A fringe around a negative offset has no meaningful visibility.
  std::vector<double> neg;
  for (double t : theta) neg.push_back(-2.0 + 0.3 * std::cos(2.0 * t));
  CHECK_THROWS_AS(bqpm::fit_visibility(theta, neg), bqpm::FitError);
}

TEST_CASE("chsh correlations of the canonical states") {
  const Mat4 phip = TwoPhotonState::bell_phi(0.0).density();
  CHECK(bqpm::chsh_correlation(phip, 0.0, 0.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bqpm::chsh_correlation(phip, 0.0, 90.0) ==
        doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(bqpm::chsh_correlation(phip, 0.0, 45.0) ==
        doctest::Approx(0.0).epsilon(1e-12));
  // E(a, b) = cos 2(a - b) for |Phi+> behind linear polarizers.
  CHECK(bqpm::chsh_correlation(phip, 10.0, 40.0) ==
        doctest::Approx(std::cos(bqpm::deg_to_rad(60.0))).epsilon(1e-12));

  CHECK(bqpm::chsh_s(phip, bqpm::ChshAngles{}) ==
        doctest::Approx(2.0 * kSqrt2).epsilon(1e-12));
  // Werner mixing scales every correlation by p.
  for (double p : {0.5, 0.9293}) {
    const Mat4 w = bqpm::werner_mix(TwoPhotonState::bell_phi(0.0), p);
    CHECK(bqpm::chsh_s(w, bqpm::ChshAngles{}) ==
          doctest::Approx(p * 2.0 * kSqrt2).epsilon(1e-12));
  }
  CHECK(0.9293 * 2.0 * kSqrt2 == doctest::Approx(2.628457327).epsilon(1e-9));

  CHECK_THROWS_AS(bqpm::chsh_correlation(Mat4::Zero(), 0.0, 0.0),
                  bqpm::InputError);
}

TEST_CASE("chsh optimizer reaches the pure-state bound for real states") {
  // For states with real amplitudes the linear-polarizer optimum equals the
  // Horodecki bound 2 sqrt(1 + C^2); complex phases push part of the
  // correlation into the circular basis where polarizers cannot look.
  for (double theta : {0.0, bqpm::kPi}) {
    for (double ratio : {1.0, 5.0, kR}) {
      const TwoPhotonState psi = TwoPhotonState::source(ratio, theta);
      const bqpm::ChshOptimum opt = bqpm::optimize_chsh_angles(psi.density());
      CHECK(std::abs(opt.s - bqpm::pure_state_chsh_max(psi)) < 1e-4);
      CHECK(opt.s == doctest::Approx(bqpm::chsh_s(psi.density(), opt.angles))
                         .epsilon(1e-12));
    }
  }
  const TwoPhotonState src = TwoPhotonState::source(kR, bqpm::kPi);
  CHECK(bqpm::pure_state_chsh_max(src) ==
        doctest::Approx(2.2241604050).epsilon(1e-9));
  CHECK(bqpm::optimize_chsh_angles(src.density()).s ==
        doctest::Approx(2.2241604050).epsilon(1e-6));
  CHECK(bqpm::pure_state_chsh_max(TwoPhotonState::bell_phi(0.0)) ==
        doctest::Approx(2.0 * kSqrt2).epsilon(1e-12));
}

TEST_CASE("bootstrap of a total-count statistic") {
  CountRecord rec;
  rec.setting_id = 1;
  rec.label = "HH";
  rec.singles_s = 50000;
  rec.singles_i = 40000;
  rec.coincidences = 10000;
  rec.duration_s = 1.0;
  const auto total = [](const std::vector<CountRecord>& rs) {
    double t = 0.0;
    for (const CountRecord& r : rs) t += double(r.coincidences);
    return t;
  };
  const bqpm::BootstrapSummary sum = bqpm::bootstrap({rec}, total, 1000, 42);
  // Poisson(10000) resamples: mean 10000, sd 100.
  CHECK(sum.resamples == 1000);
  CHECK(sum.failures == 0);
  CHECK(std::abs(sum.mean - 10000.0) < 16.0);
  CHECK(sum.stddev > 85.0);
  CHECK(sum.stddev < 115.0);
  // Same seed, same numbers.
  const bqpm::BootstrapSummary again = bqpm::bootstrap({rec}, total, 1000, 42);
  CHECK(again.mean == sum.mean);
  CHECK(again.stddev == sum.stddev);
  // All-zero counts resample to themselves.
  CountRecord zero = rec;
  zero.singles_s = zero.singles_i = zero.coincidences = 0;
  const bqpm::BootstrapSummary none = bqpm::bootstrap({zero}, total, 100, 1);
  CHECK(none.mean == 0.0);
  CHECK(none.stddev == 0.0);
}

TEST_CASE("bootstrap failure handling") {
  CountRecord rec;
  rec.label = "HH";
  rec.coincidences = 100;
  rec.duration_s = 1.0;
  const auto bad = [](const std::vector<CountRecord>&) -> double {
    throw bqpm::ConvergenceError("never works");
  };
  CHECK_THROWS_AS(bqpm::bootstrap({rec}, bad, 100, 7), bqpm::BootstrapError);
  const auto fine = [](const std::vector<CountRecord>&) { return 1.0; };
  CHECK_THROWS_AS(bqpm::bootstrap({rec}, fine, 1, 7), bqpm::InputError);
  CHECK_THROWS_AS(bqpm::bootstrap({}, fine, 100, 7), bqpm::InputError);
}

TEST_CASE("bootstrap visibility error follows the 1/sqrt(N) law") {
  // Fringe counts at N and 100 N per setting: the resampled visibility
  // spread must shrink by about 10x.
  std::vector<double> theta;
  for (int k = 0; k < 12; ++k) theta.push_back(bqpm::deg_to_rad(15.0 * k));
  const auto make_records = [&theta](double scale) {
    std::vector<CountRecord> rs;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      CountRecord r;
      r.setting_id = int(k) + 1;
      r.label = "a" + std::to_string(k);
      r.coincidences =
          std::llround(scale * 0.5 * (1.0 + 0.6 * std::cos(2.0 * theta[k])));
      r.duration_s = 1.0;
      rs.push_back(r);
    }
    return rs;
  };
  const auto vis = [&theta](const std::vector<CountRecord>& rs) {
    std::vector<double> y;
    for (const CountRecord& r : rs) y.push_back(double(r.coincidences));
    return bqpm::fit_visibility(theta, y).visibility;
  };
  const bqpm::BootstrapSummary lo =
      bqpm::bootstrap(make_records(400.0), vis, 1000, 2024);
  const bqpm::BootstrapSummary hi =
      bqpm::bootstrap(make_records(40000.0), vis, 1000, 2024);
  CHECK(lo.failures == 0);
  CHECK(hi.failures == 0);
  const double ratio = lo.stddev / hi.stddev;
  CHECK(ratio > 7.0);
  CHECK(ratio < 14.0);
}

TEST_CASE("werner pipeline statistics at experimental flux") {
  // Monte Carlo over seeds: reconstructed fidelity to |Phi+> and the
  // optimal-angle S of the p = 0.9293 Werner state at roughly 1e5
  // coincidences per setting.
  const TomographySettings& table = TomographySettings::standard16();
  const Mat4 truth = bqpm::werner_mix(TwoPhotonState::bell_phi(0.0), 0.9293);
  DetectionChain unit;
  double f_sum = 0.0;
  double s_sum = 0.0;
  const int n_seeds = 5;
  for (int seed = 0; seed < n_seeds; ++seed) {
    const std::vector<CountRecord> recs =
        bqpm::simulate_counts(truth, table.settings(), 4e5, unit, 1.0, seed);
    const bqpm::MleResult res = bqpm::mle_reconstruct(recs, table);
    f_sum += bqpm::fidelity(res.rho, TwoPhotonState::bell_phi(0.0));
    s_sum += bqpm::optimize_chsh_angles(res.rho).s;
  }
  CHECK(std::abs(f_sum / n_seeds - 0.947) < 0.003);
  CHECK(std::abs(s_sum / n_seeds - 2.628) < 0.01);
}

}  // TEST_SUITE
