#include "bqpm/dispersion.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bqpm/data_path.hpp"
#include "bqpm/errors.hpp"

namespace bqpm {

using nlohmann::json;

const char* axis_name(Axis axis) { return axis == Axis::Y ? "y" : "z"; }

SellmeierModel::SellmeierModel(Axis axis, std::array<double, 5> sellmeier,
                               std::array<double, 4> dn_dt,
                               std::array<double, 4> d2n_dt2, double t_ref_c,
                               double lambda_min_um, double lambda_max_um,
                               std::string reference_label)
    : axis_(axis),
      c_(sellmeier),
      n1_(dn_dt),
      n2_(d2n_dt2),
      t_ref_c_(t_ref_c),
      lambda_min_um_(lambda_min_um),
      lambda_max_um_(lambda_max_um),
      reference_label_(std::move(reference_label)) {
  if (!(lambda_min_um_ > 0.0) || !(lambda_max_um_ > lambda_min_um_))
    throw InputError("dispersion model needs 0 < lambda_min < lambda_max");
}

void SellmeierModel::check_lambda(double lambda_um, double temp_c,
                                  bool strict) const {
  if (!std::isfinite(lambda_um) || !std::isfinite(temp_c))
    throw InputError("wavelength and temperature must be finite");
  const bool inside = strict
                          ? (lambda_um > lambda_min_um_ && lambda_um < lambda_max_um_)
                          : (lambda_um >= lambda_min_um_ && lambda_um <= lambda_max_um_);
  if (!inside) {
    std::ostringstream msg;
    msg << "wavelength " << lambda_um << " um outside the n_" << axis_name(axis_)
        << " fit validity range [" << lambda_min_um_ << ", " << lambda_max_um_
        << "] um";
    if (strict) msg << " (open interval: a derivative is required)";
    throw RangeError(msg.str());
  }
}

double SellmeierModel::sellmeier_n(double lambda_um) const {
  const double l2 = lambda_um * lambda_um;
  const double n2 = c_[0] + c_[1] / (l2 - c_[2]) + c_[3] / (l2 - c_[4]);
  if (!(n2 > 0.0))
    throw RangeError("Sellmeier form non-physical at the requested wavelength");
  return std::sqrt(n2);
}

double SellmeierModel::thermo_shift(double lambda_um, double dt) const {
  double a = 0.0, b = 0.0, inv = 1.0;
  for (int m = 0; m < 4; ++m) {
    a += n1_[m] * inv;
    b += n2_[m] * inv;
    inv /= lambda_um;
  }
  return a * dt + b * dt * dt;
}

double SellmeierModel::sellmeier_dn(double lambda_um) const {
  const double l2 = lambda_um * lambda_um;
  const double p1 = l2 - c_[2];
  const double p2 = l2 - c_[4];
  // d(n^2)/dlambda = -2 lambda [ c1/p1^2 + c3/p2^2 ];  dn = d(n^2) / (2 n)
  const double dn2 = -2.0 * lambda_um * (c_[1] / (p1 * p1) + c_[3] / (p2 * p2));
  return dn2 / (2.0 * sellmeier_n(lambda_um));
}

double SellmeierModel::thermo_dshift(double lambda_um, double dt) const {
  double a = 0.0, b = 0.0;
  double inv = 1.0 / lambda_um;  // starts at lambda^{-1} for the m=1 term
  for (int m = 1; m < 4; ++m) {
    a += -m * n1_[m] * inv / lambda_um;
    b += -m * n2_[m] * inv / lambda_um;
    inv /= lambda_um;
  }
  return a * dt + b * dt * dt;
}

double SellmeierModel::index(double lambda_um, double temp_c) const {
  check_lambda(lambda_um, temp_c, /*strict=*/false);
  return sellmeier_n(lambda_um) + thermo_shift(lambda_um, temp_c - t_ref_c_);
}

double SellmeierModel::dindex_dlambda(double lambda_um, double temp_c) const {
  check_lambda(lambda_um, temp_c, /*strict=*/true);
  return sellmeier_dn(lambda_um) + thermo_dshift(lambda_um, temp_c - t_ref_c_);
}

double SellmeierModel::group_index(double lambda_um, double temp_c) const {
  check_lambda(lambda_um, temp_c, /*strict=*/true);
  const double dt = temp_c - t_ref_c_;
  const double n = sellmeier_n(lambda_um) + thermo_shift(lambda_um, dt);
  const double dn = sellmeier_dn(lambda_um) + thermo_dshift(lambda_um, dt);
  return n - lambda_um * dn;
}

DispersionSet::DispersionSet(std::string crystal, SellmeierModel y,
                             SellmeierModel z)
    : crystal_(std::move(crystal)), y_(std::move(y)), z_(std::move(z)) {
  if (y_.axis() != Axis::Y || z_.axis() != Axis::Z)
    throw InputError("dispersion set needs a y-axis and a z-axis model");
}

const SellmeierModel& DispersionSet::model(Axis axis) const {
  return axis == Axis::Y ? y_ : z_;
}

namespace {

template <std::size_t N>
std::array<double, N> parse_coeffs(const json& j, const std::string& key,
                                   const std::string& context) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != N) {
    std::ostringstream msg;
    msg << context << ": '" << key << "' must be an array of " << N << " numbers";
    throw InputError(msg.str());
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    const json& v = j.at(key).at(i);
    if (!v.is_number())
      throw InputError(context + ": '" + key + "' must contain only numbers");
    out[i] = v.get<double>();
  }
  return out;
}

SellmeierModel parse_model(const json& j) {
  if (!j.contains("axis") || !j.at("axis").is_string())
    throw InputError("dispersion model entry: missing 'axis'");
  const std::string ax = j.at("axis").get<std::string>();
  if (ax != "y" && ax != "z")
    throw InputError("dispersion model entry: axis must be 'y' or 'z'");
  const std::string ctx = "dispersion model (axis " + ax + ")";

  auto sell = parse_coeffs<5>(j, "coefficients", ctx);
  auto range = parse_coeffs<2>(j, "valid_range_um", ctx);
  if (!j.contains("thermo_optic") || !j.at("thermo_optic").is_object())
    throw InputError(ctx + ": missing 'thermo_optic' block");
  const json& th = j.at("thermo_optic");
  auto n1 = parse_coeffs<4>(th, "dn_dt", ctx);
  auto n2 = parse_coeffs<4>(th, "d2n_dt2", ctx);
  if (!th.contains("t_ref_c") || !th.at("t_ref_c").is_number())
    throw InputError(ctx + ": thermo_optic needs numeric 't_ref_c'");
  std::string label = j.value("reference_label", std::string{});
  if (label.empty())
    throw InputError(ctx + ": 'reference_label' must name the data provenance");

  return SellmeierModel(ax == "y" ? Axis::Y : Axis::Z, sell, n1, n2,
                        th.at("t_ref_c").get<double>(), range[0], range[1],
                        std::move(label));
}

}  // namespace

DispersionSet DispersionSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dispersion file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InputError("dispersion file " + path + ": " + e.what());
  }
  if (!j.contains("models") || !j.at("models").is_array())
    throw InputError("dispersion file " + path + ": missing 'models' array");

  const SellmeierModel* y = nullptr;
  const SellmeierModel* z = nullptr;
  std::vector<SellmeierModel> parsed;
  parsed.reserve(j.at("models").size());
  for (const json& entry : j.at("models")) parsed.push_back(parse_model(entry));
  for (const SellmeierModel& m : parsed) {
    if (m.axis() == Axis::Y) y = &m;
    if (m.axis() == Axis::Z) z = &m;
  }
  if (!y || !z)
    throw InputError("dispersion file " + path +
                     ": needs one y-axis and one z-axis model");
  return DispersionSet(j.value("crystal", std::string("unknown")), *y, *z);
}

const DispersionSet& DispersionSet::ktp() {
  static const DispersionSet set = load(data_file("ktp_sellmeier.json"));
  return set;
}

}  // namespace bqpm
