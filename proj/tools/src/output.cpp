#include "eprld_cli/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <system_error>

namespace eprld::cli {

namespace fs = std::filesystem;

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw std::logic_error("Table::add: row width does not match header");
  rows.push_back(std::move(row));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

double parse_double(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("parse_double: '" + text + "'");
  }
  return v;
}

nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

void ensure_writable(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'");
  }
  const fs::path probe = dir / ".eprld_write_probe";
  {
    std::ofstream f(probe);
    if (!f || !(f << "ok")) throw IoError("output directory '" + dir.string() + "' is not writable");
  }
  fs::remove(probe, ec);
}

namespace {

std::string cell_text(const Cell& c) {
  struct Visitor {
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(const std::string& v) const { return v; }
  };
  return std::visit(Visitor{}, c);
}

nlohmann::json cell_json(const Cell& c) {
  struct Visitor {
    nlohmann::json operator()(double v) const { return json_number(v); }
    nlohmann::json operator()(long long v) const { return v; }
    nlohmann::json operator()(bool v) const { return v; }
    nlohmann::json operator()(const std::string& v) const { return v; }
  };
  return std::visit(Visitor{}, c);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << text;
  f.flush();
  if (!f) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace

std::string to_csv(const Table& table, const std::string& fingerprint) {
  std::string out = "# config_fingerprint=" + fingerprint + "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += table.columns[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += cell_text(row[i]);
    }
    out += '\n';
  }
  return out;
}

nlohmann::json to_json(const Table& table, const std::string& fingerprint) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[table.columns[i]] = cell_json(row[i]);
    rows.push_back(std::move(obj));
  }
  return {{"config_fingerprint", fingerprint}, {"columns", table.columns}, {"rows", std::move(rows)}};
}

fs::path write_table(const fs::path& dir, const Table& table, const std::string& format,
                     const std::string& fingerprint) {
  if (format == "json") return write_json(dir, table.name, to_json(table, fingerprint));
  const fs::path path = dir / (table.name + ".csv");
  write_text(path, to_csv(table, fingerprint));
  return path;
}

fs::path write_json(const fs::path& dir, const std::string& name, const nlohmann::json& doc) {
  const fs::path path = dir / (name + ".json");
  write_text(path, doc.dump(2) + "\n");
  return path;
}

}  // namespace eprld::cli
