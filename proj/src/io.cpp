#include "cca/io.hpp"

#include "cca/allocator.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace cca {

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token) {
  while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
  while (!token.empty() && (token.back() == ' ' || token.back() == '\t' || token.back() == '\r')) {
    token.remove_suffix(1);
  }
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw InputError("not a number: '" + std::string(token) + "'");
  }
  return value;
}

int CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

void write_csv(std::ostream& os, const CsvTable& table) {
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) os << ',';
    os << table.header[i];
  }
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << format_double(row[i]);
    }
    os << '\n';
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

CsvTable read_csv(std::istream& is) {
  CsvTable table;
  std::string line;
  if (!std::getline(is, line)) throw InputError("csv: empty input");
  for (auto& h : split(line)) table.header.push_back(trim(h));
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != table.header.size()) {
      throw InputError("csv: line " + std::to_string(lineno) + " has " +
                       std::to_string(fields.size()) + " fields, header has " +
                       std::to_string(table.header.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f));
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_csv_file(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  write_csv(out, table);
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return read_csv(in);
}

namespace {

using nlohmann::json;

int bracket_balance(const std::string& s) {
  int depth = 0;
  for (char c : s) {
    if (c == '[') ++depth;
    if (c == ']') --depth;
  }
  return depth;
}

VecX to_vector(const json& j, const std::string& key) {
  if (!j.is_array()) throw InputError("model: '" + key + "' must be an array");
  VecX v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InputError("model: '" + key + "' must contain numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

MatX to_matrix(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw InputError("model: '" + key + "' must be an array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  MatX M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const VecX row = to_vector(j[static_cast<std::size_t>(r)], key);
    if (row.size() != cols) throw InputError("model: '" + key + "' has ragged rows");
    M.row(r) = row.transpose();
  }
  return M;
}

void write_row(std::ostream& os, const VecX& v) {
  os << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    os << format_double(v[i]);
  }
  os << ']';
}

void write_matrix(std::ostream& os, const std::string& key, const MatX& M) {
  os << key << " = [\n";
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    os << "  ";
    write_row(os, M.row(r).transpose());
    os << (r + 1 < M.rows() ? ",\n" : "\n");
  }
  os << "]\n";
}

}  // namespace

KeyValues read_key_values(std::istream& is) {
  KeyValues values;
  std::string line;
  std::string pending_key;
  std::string pending_value;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (!pending_key.empty()) {
      pending_value += ' ' + line;
    } else {
      if (trim(line).empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw InputError("model: line " + std::to_string(lineno) + " is not 'key = value'");
      }
      pending_key = trim(line.substr(0, eq));
      pending_value = line.substr(eq + 1);
    }
    if (bracket_balance(pending_value) > 0) continue;
    try {
      values[pending_key] = json::parse(pending_value);
    } catch (const json::exception& e) {
      throw InputError("model: bad value for '" + pending_key + "': " + e.what());
    }
    pending_key.clear();
    pending_value.clear();
  }
  if (!pending_key.empty()) throw InputError("model: unterminated value for '" + pending_key + "'");
  return values;
}

AircraftModel model_from_key_values(const KeyValues& values) {
  auto require = [&](const std::string& key) -> const json& {
    auto it = values.find(key);
    if (it == values.end()) throw InputError("model: missing key '" + key + "'");
    return it->second;
  };

  AircraftModel model;
  model.B = to_matrix(require("B"), "B");
  const auto m = model.B.cols();
  model.position_limits =
      BoxLimits(to_vector(require("position_lower"), "position_lower"),
                to_vector(require("position_upper"), "position_upper"));
  model.rate_limits = BoxLimits(to_vector(require("rate_lower"), "rate_lower"),
                                to_vector(require("rate_upper"), "rate_upper"));

  auto square = [&](const std::string& key, const MatX& fallback) -> MatX {
    if (values.count(key)) return to_matrix(values.at(key), key);
    if (values.count(key + "_diag")) {
      return MatX(to_vector(values.at(key + "_diag"), key + "_diag").asDiagonal());
    }
    return fallback;
  };
  model.A = square("A", MatX());
  if (model.A.size() == 0) throw InputError("model: missing key 'A' or 'A_diag'");
  model.R = square("R", MatX::Identity(m, m));
  model.R_rate = square("R_rate", MatX::Identity(m, m));
  if (values.count("names")) {
    for (const auto& n : values.at("names")) {
      if (!n.is_string()) throw InputError("model: names must be strings");
      model.names.push_back(n.get<std::string>());
    }
  }
  model.validate();
  return model;
}

AircraftModel read_model(std::istream& is) { return model_from_key_values(read_key_values(is)); }

AircraftModel read_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file " + path.string());
  return read_model(in);
}

void write_model(std::ostream& os, const AircraftModel& model) {
  if (!model.names.empty()) {
    os << "names = [";
    for (std::size_t i = 0; i < model.names.size(); ++i) {
      os << (i ? ", " : "") << json(model.names[i]).dump();
    }
    os << "]\n";
  }
  write_matrix(os, "B", model.B);
  os << "position_lower = ";
  write_row(os, model.position_limits.lower);
  os << "\nposition_upper = ";
  write_row(os, model.position_limits.upper);
  os << "\nrate_lower = ";
  write_row(os, model.rate_limits.lower);
  os << "\nrate_upper = ";
  write_row(os, model.rate_limits.upper);
  os << '\n';
  write_matrix(os, "A", model.A);
  write_matrix(os, "R", model.R);
  write_matrix(os, "R_rate", model.R_rate);
}

}  // namespace cca
