#pragma once

// Text formats: shortest round-trip doubles, plain CSV tables, and the
// key = value model file.

#include "cca/types.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace cca {

struct AircraftModel;

// Shortest decimal that parses back to the identical double.
std::string format_double(double value);
// Strict parse of a whole token; throws InputError on trailing garbage.
double parse_double(std::string_view token);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(std::string_view name) const;  // -1 when absent
};

void write_csv(std::ostream& os, const CsvTable& table);
CsvTable read_csv(std::istream& is);

void write_csv_file(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv_file(const std::filesystem::path& path);

// Model file: one `key = value` per entry, values are numbers, arrays, or
// arrays of rows (JSON array syntax, may span lines); `#` starts a comment.
//
//   names          = ["tail_l", ...]             (optional)
//   B              = [[...], [...], [...]]       3 x m
//   position_lower = [...]    position_upper = [...]
//   rate_lower     = [...]    rate_upper     = [...]
//   A              = [[...], ...]  or  A_diag = [...]
//   R              = [[...], ...]  or  R_diag = [...]   (optional, identity)
//   R_rate         = [[...], ...]  or  R_rate_diag = [...]   (optional)
//   omega0 = [...]  zeta = [...]                  (optional actuator data)
using KeyValues = std::map<std::string, nlohmann::json>;
KeyValues read_key_values(std::istream& is);

AircraftModel model_from_key_values(const KeyValues& values);
AircraftModel read_model(std::istream& is);
AircraftModel read_model_file(const std::filesystem::path& path);
void write_model(std::ostream& os, const AircraftModel& model);

}  // namespace cca
