#include "qdiscern/cli/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qdiscern::cli {

std::string format_number(double value) {
  if (std::isnan(value)) {
    return "nan";
  }
  if (std::isinf(value)) {
    return value > 0 ? "inf" : "-inf";
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", value);
  return buf;
}

namespace {

std::string escape_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    return s;
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') {
      out += '"';
    }
    out += c;
  }
  return out + "\"";
}

struct CellFormatter {
  std::string operator()(double v) const { return format_number(v); }
  std::string operator()(std::uint64_t v) const { return std::to_string(v); }
  std::string operator()(const std::string& v) const { return escape_field(v); }
};

}  // namespace

void CsvTable::add_row(std::vector<Cell> row) {
  if (row.size() != header_.size()) {
    throw std::invalid_argument("row width does not match the header");
  }
  rows_.push_back(std::move(row));
}

void CsvTable::write(std::ostream& out) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    out << (i ? "," : "") << escape_field(header_[i]);
  }
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << std::visit(CellFormatter{}, row[i]);
    }
    out << '\n';
  }
}

std::string CsvTable::str() const {
  std::ostringstream out;
  write(out);
  return out.str();
}

void write_report(const std::string& path, const CsvTable& table, const nlohmann::json& meta) {
  std::ofstream csv(path, std::ios::binary);
  if (!csv) {
    throw std::runtime_error("cannot write report file " + path);
  }
  table.write(csv);
  std::ofstream sidecar(path + ".meta.json", std::ios::binary);
  if (!sidecar) {
    throw std::runtime_error("cannot write metadata file " + path + ".meta.json");
  }
  sidecar << meta.dump(2) << '\n';
}

}  // namespace qdiscern::cli
