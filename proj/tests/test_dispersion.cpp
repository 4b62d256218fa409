#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "bqpm/dispersion.hpp"
#include "bqpm/errors.hpp"

using bqpm::Axis;
using bqpm::DispersionSet;
using bqpm::SellmeierModel;

namespace {

// Reference indices computed independently (high-precision evaluation of the
// published coefficient sets), frozen here.
constexpr double kNzPump19 = 1.846430843;     // n_z(0.77833 um, 19 C)
constexpr double kNzDeg19 = 1.815538302;      // n_z(1.55666 um, 19 C)
constexpr double kNyDeg19 = 1.734734827;      // n_y(1.55666 um, 19 C)
constexpr double kNgzDeg19 = 1.851312670;     // group index, z axis
constexpr double kNgyDeg19 = 1.762777230;     // group index, y axis

std::string temp_json(const std::string& tag, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() /
                    ("bqpm_disp_" + tag + ".json");
  std::ofstream out(path);
  out << content;
  return path.string();
}

}  // namespace

TEST_SUITE("dispersion") {

TEST_CASE("bundled model reproduces frozen reference indices") {
  const DispersionSet& ktp = DispersionSet::ktp();
  CHECK(ktp.crystal() == "KTP");
  CHECK(ktp.model(Axis::Z).index(0.77833, 19.0) ==
        doctest::Approx(kNzPump19).epsilon(1e-8));
  CHECK(ktp.model(Axis::Z).index(1.55666, 19.0) ==
        doctest::Approx(kNzDeg19).epsilon(1e-8));
  CHECK(ktp.model(Axis::Y).index(1.55666, 19.0) ==
        doctest::Approx(kNyDeg19).epsilon(1e-8));
  // Birefringence at the degenerate wavelength drives the compensator design.
  CHECK(ktp.model(Axis::Z).index(1.55666, 19.0) -
            ktp.model(Axis::Y).index(1.55666, 19.0) ==
        doctest::Approx(0.080803475).epsilon(1e-7));
}

TEST_CASE("group indices match frozen references") {
  const DispersionSet& ktp = DispersionSet::ktp();
  CHECK(ktp.model(Axis::Z).group_index(1.55666, 19.0) ==
        doctest::Approx(kNgzDeg19).epsilon(1e-8));
  CHECK(ktp.model(Axis::Y).group_index(1.55666, 19.0) ==
        doctest::Approx(kNgyDeg19).epsilon(1e-8));
}

TEST_CASE("analytic wavelength derivative agrees with finite differences") {
  const DispersionSet& ktp = DispersionSet::ktp();
  const double h = 1e-5;
  for (Axis axis : {Axis::Y, Axis::Z}) {
    const SellmeierModel& m = ktp.model(axis);
    for (double lam : {0.6, 0.77833, 1.0, 1.55666, 2.5, 3.2}) {
      const double fd =
          (m.index(lam + h, 19.0) - m.index(lam - h, 19.0)) / (2.0 * h);
      CHECK(m.dindex_dlambda(lam, 19.0) == doctest::Approx(fd).epsilon(1e-7));
      CHECK(m.group_index(lam, 19.0) ==
            doctest::Approx(m.index(lam, 19.0) -
                            lam * m.dindex_dlambda(lam, 19.0))
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("thermo-optic correction vanishes at the reference temperature") {
  const DispersionSet& ktp = DispersionSet::ktp();
  // The published expansions are anchored at 25 C; at that temperature the
  // index must equal the bare Sellmeier value, which is temperature-free --
  // so indices at 25 C bracket a monotone trend through neighbouring T.
  const SellmeierModel& z = ktp.model(Axis::Z);
  const double n25 = z.index(1.55666, 25.0);
  const double n19 = z.index(1.55666, 19.0);
  const double n31 = z.index(1.55666, 31.0);
  // dn/dT > 0 in the telecom window for the z axis.
  CHECK(n19 < n25);
  CHECK(n25 < n31);
  // The quadratic term is small: the +-6 C second difference (72 n2, with
  // n2 ~ 2e-8 / K^2 in the telecom window) stays a few percent of the
  // linear trend.
  CHECK(std::abs((n31 - n25) + (n19 - n25)) < 0.05 * (n31 - n19));
}

TEST_CASE("normal dispersion in the transparency window") {
  const SellmeierModel& z = DispersionSet::ktp().model(Axis::Z);
  CHECK(z.index(1.0, 19.0) > z.index(1.5, 19.0));
  CHECK(z.index(1.5, 19.0) > z.index(2.0, 19.0));
}

TEST_CASE("wavelengths outside the fit window are rejected") {
  const SellmeierModel& z = DispersionSet::ktp().model(Axis::Z);
  CHECK_THROWS_AS(z.index(0.2, 19.0), bqpm::RangeError);
  CHECK_THROWS_AS(z.index(4.0, 19.0), bqpm::RangeError);
  CHECK_THROWS_AS(z.index(-1.0, 19.0), bqpm::RangeError);
  CHECK_THROWS_WITH_AS(z.index(0.2, 19.0),
                       doctest::Contains("[0.43, 3.54]"), bqpm::RangeError);
  // The endpoints are valid for the index itself...
  CHECK_NOTHROW(z.index(0.43, 19.0));
  CHECK_NOTHROW(z.index(3.54, 19.0));
  // ...but not for derivative quantities, which need an open neighbourhood.
  CHECK_THROWS_AS(z.group_index(0.43, 19.0), bqpm::RangeError);
  CHECK_THROWS_AS(z.dindex_dlambda(3.54, 19.0), bqpm::RangeError);
  CHECK_THROWS_AS(z.index(std::nan(""), 19.0), bqpm::InputError);
  CHECK_THROWS_AS(z.index(1.0, std::nan("")), bqpm::InputError);
}

TEST_CASE("loader rejects missing and malformed files") {
  CHECK_THROWS_AS(DispersionSet::load("/nonexistent/nowhere.json"),
                  bqpm::IoError);
  CHECK_THROWS_AS(
      DispersionSet::load(temp_json("notjson", "this is not json")),
      bqpm::InputError);
  CHECK_THROWS_AS(
      DispersionSet::load(temp_json("noaxis", R"({"crystal": "KTP"})")),
      bqpm::InputError);
}

TEST_CASE("the bundled set is a singleton") {
  CHECK(&DispersionSet::ktp() == &DispersionSet::ktp());
}

}  // TEST_SUITE
