// report.hpp
// CSV tables with full-precision numbers and a JSON metadata sidecar.

#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace qdiscern::cli {

inline constexpr const char* kVersion = "1.0.0";

using Cell = std::variant<double, std::uint64_t, std::string>;

// 17 significant digits in scientific notation; inf, -inf and nan as literal
// tokens.
std::string format_number(double value);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  // Throws std::invalid_argument when the width differs from the header.
  void add_row(std::vector<Cell> row);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }

  void write(std::ostream& out) const;
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

// Writes `table` to `path` and `meta` to `path + ".meta.json"`.
void write_report(const std::string& path, const CsvTable& table, const nlohmann::json& meta);

}  // namespace qdiscern::cli
