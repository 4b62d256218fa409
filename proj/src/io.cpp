#include "bqpm/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bqpm/errors.hpp"

#ifndef BQPM_VERSION
#define BQPM_VERSION "0.0.0"
#endif

namespace bqpm {

using nlohmann::json;

namespace {

constexpr const char* kCountsHeader =
    "setting_id,label,singles_s,singles_i,coincidences,duration_s";

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

[[noreturn]] void csv_error(const std::string& path, std::size_t row,
                            const std::string& column,
                            const std::string& what) {
  std::ostringstream msg;
  msg << "counts CSV " << path << ": row " << row << ", column '" << column
      << "': " << what;
  throw InputError(msg.str());
}

std::int64_t parse_count(const std::string& text, const std::string& path,
                         std::size_t row, const std::string& column) {
  std::int64_t value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    csv_error(path, row, column, "'" + text + "' is not an integer");
  if (value < 0) csv_error(path, row, column, "counts must be >= 0");
  return value;
}

// Shortest round-trip formatting, so emitted files are byte-stable across
// runs and platforms.
std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

}  // namespace

std::vector<CountRecord> read_counts_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open counts file: " + path);

  std::string line;
  std::size_t row = 0;
  std::vector<CountRecord> records;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (row == 1) {
      if (line != kCountsHeader)
        throw InputError("counts CSV " + path + ": row 1: header must be '" +
                         std::string(kCountsHeader) + "'");
      continue;
    }
    const std::vector<std::string> fields = split_csv_row(line);
    if (fields.size() != 6) {
      std::ostringstream msg;
      msg << "counts CSV " << path << ": row " << row << ": expected 6 "
          << "columns, got " << fields.size();
      throw InputError(msg.str());
    }
    CountRecord rec;
    {
      int id = 0;
      const char* begin = fields[0].data();
      const char* end = begin + fields[0].size();
      auto [ptr, ec] = std::from_chars(begin, end, id);
      if (ec != std::errc{} || ptr != end)
        csv_error(path, row, "setting_id",
                  "'" + fields[0] + "' is not an integer");
      rec.setting_id = id;
    }
    if (fields[1].empty()) csv_error(path, row, "label", "must not be empty");
    rec.label = fields[1];
    rec.singles_s = parse_count(fields[2], path, row, "singles_s");
    rec.singles_i = parse_count(fields[3], path, row, "singles_i");
    rec.coincidences = parse_count(fields[4], path, row, "coincidences");
    try {
      std::size_t pos = 0;
      rec.duration_s = std::stod(fields[5], &pos);
      if (pos != fields[5].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      csv_error(path, row, "duration_s",
                "'" + fields[5] + "' is not a number");
    }
    if (!std::isfinite(rec.duration_s) || !(rec.duration_s > 0.0))
      csv_error(path, row, "duration_s", "must be positive");
    records.push_back(std::move(rec));
  }
  if (row == 0)
    throw InputError("counts CSV " + path + ": file is empty");
  return records;
}

std::string counts_csv_text(const std::vector<CountRecord>& records) {
  std::ostringstream out;
  out << kCountsHeader << "\n";
  for (const CountRecord& rec : records) {
    out << rec.setting_id << ',' << rec.label << ',' << rec.singles_s << ','
        << rec.singles_i << ',' << rec.coincidences << ','
        << format_double(rec.duration_s) << "\n";
  }
  return out.str();
}

void write_counts_csv(const std::string& path,
                      const std::vector<CountRecord>& records) {
  write_text_file(path, counts_csv_text(records));
}

std::string curve_csv_text(const std::string& x_name, const std::string& y_name,
                           const std::vector<CurvePoint>& points) {
  std::ostringstream out;
  out << x_name << ',' << y_name << "\n";
  for (const CurvePoint& p : points)
    out << format_double(p.x) << ',' << format_double(p.y) << "\n";
  return out.str();
}

void write_curve_csv(const std::string& path, const std::string& x_name,
                     const std::string& y_name,
                     const std::vector<CurvePoint>& points) {
  write_text_file(path, curve_csv_text(x_name, y_name, points));
}

json density_to_json(const Mat4& rho) {
  json real = json::array();
  json imag = json::array();
  for (int r = 0; r < 4; ++r) {
    json real_row = json::array();
    json imag_row = json::array();
    for (int c = 0; c < 4; ++c) {
      real_row.push_back(rho(r, c).real());
      imag_row.push_back(rho(r, c).imag());
    }
    real.push_back(std::move(real_row));
    imag.push_back(std::move(imag_row));
  }
  json j;
  j["basis"] = json::array({"HH", "HV", "VH", "VV"});
  j["real"] = std::move(real);
  j["imag"] = std::move(imag);
  return j;
}

Mat4 density_from_json(const json& j) {
  if (!j.is_object() || !j.contains("real") || !j.contains("imag"))
    throw InputError("density matrix JSON needs 'real' and 'imag' blocks");
  if (j.contains("basis") &&
      j.at("basis") != json::array({"HH", "HV", "VH", "VV"}))
    throw InputError("density matrix JSON: unsupported basis order");
  Mat4 rho;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      const json& re = j.at("real").at(r).at(c);
      const json& im = j.at("imag").at(r).at(c);
      if (!re.is_number() || !im.is_number())
        throw InputError("density matrix JSON: entries must be numbers");
      rho(r, c) = Complex(re.get<double>(), im.get<double>());
    }
  return rho;
}

json ResultBundle::to_json() const {
  json j;
  char hash_hex[19];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(config_hash));
  j["provenance"]["artifact_version"] = BQPM_VERSION;
  j["provenance"]["config_hash"] = hash_hex;
  j["provenance"]["seed"] = seed;
  j["provenance"]["command"] = command;
  j["payload"] = payload;
  return j;
}

std::string ResultBundle::serialize() const { return to_json().dump(2) + "\n"; }

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path())
    std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace bqpm
