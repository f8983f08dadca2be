#pragma once

// Tables emitted as CSV (first line "# config_fingerprint=...") or JSON.
// Doubles use the shortest representation that parses back to the same
// value; non-finite values are written as inf, -inf and nan.

#include "json.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace eprld::cli {

/// Output directory missing, unwritable or a write failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Cell = std::variant<double, long long, bool, std::string>;

struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

std::string format_double(double v);
double parse_double(const std::string& text);

/// JSON value of a double: a number when finite, else "inf"/"-inf"/"nan".
nlohmann::json json_number(double v);

/// Creates `dir` if needed and proves it writable with a probe file.
void ensure_writable(const std::filesystem::path& dir);

std::string to_csv(const Table& table, const std::string& fingerprint);
nlohmann::json to_json(const Table& table, const std::string& fingerprint);

/// Writes <dir>/<name>.csv or <dir>/<name>.json; returns the path.
std::filesystem::path write_table(const std::filesystem::path& dir, const Table& table,
                                  const std::string& format, const std::string& fingerprint);

std::filesystem::path write_json(const std::filesystem::path& dir, const std::string& name,
                                 const nlohmann::json& doc);

}  // namespace eprld::cli
