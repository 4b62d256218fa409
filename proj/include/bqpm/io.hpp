#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "bqpm/biphoton.hpp"
#include "bqpm/simulate.hpp"

namespace bqpm {

// ---------------------------------------------------------------------------
// Counts CSV (schema: setting_id,label,singles_s,singles_i,coincidences,
// duration_s).  Labels are bare tokens without quoting or embedded commas.
// ---------------------------------------------------------------------------

// Parse errors carry the file, 1-based row number, and column name.
std::vector<CountRecord> read_counts_csv(const std::string& path);

void write_counts_csv(const std::string& path,
                      const std::vector<CountRecord>& records);

std::string counts_csv_text(const std::vector<CountRecord>& records);

// ---------------------------------------------------------------------------
// Curve CSV: a header naming the two columns, then one x,y row per point.
// ---------------------------------------------------------------------------

void write_curve_csv(const std::string& path, const std::string& x_name,
                     const std::string& y_name,
                     const std::vector<CurvePoint>& points);

std::string curve_csv_text(const std::string& x_name, const std::string& y_name,
                           const std::vector<CurvePoint>& points);

// ---------------------------------------------------------------------------
// Matrix serialization: row-major nested arrays, separate real and
// imaginary blocks, basis order stated in the payload.
// ---------------------------------------------------------------------------

nlohmann::json density_to_json(const Mat4& rho);
Mat4 density_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// ResultBundle: every subcommand's structured output.  payload content is
// subcommand-specific; provenance records the config hash, seed, and
// artifact version so that identical inputs can be verified to give
// byte-identical outputs.
// ---------------------------------------------------------------------------

struct ResultBundle {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string command;
  nlohmann::json payload;

  nlohmann::json to_json() const;
  std::string serialize() const;  // stable indented dump + trailing newline
};

// Writes `content` to `path`, creating parent directories; IoError on
// failure.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace bqpm
