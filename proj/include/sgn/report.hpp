#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "sgn/bench.hpp"
#include "sgn/training.hpp"

namespace sgn {

// Shortest decimal that round-trips to the same double; "nan", "inf", "-inf"
// for non-finite values.
std::string format_double(double v);

using Cell = std::variant<std::monostate, std::string, double, std::int64_t>;

// A named-column table written as CSV or as a JSON array of row objects.
// Empty cells become "" in CSV and null in JSON.
class Table {
 public:
  explicit Table(std::vector<std::string> columns);

  void add_row(std::vector<Cell> row);  // ShapeError on a wrong cell count
  std::size_t rows() const noexcept { return rows_.size(); }
  const std::vector<std::string>& columns() const noexcept { return columns_; }

  std::string to_csv() const;
  nlohmann::json to_json() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

Cell cell(std::size_t v);
Cell cell(double v);
Cell cell(const std::string& v);

// Two-space indented with a trailing newline.
std::string dump_json(const nlohmann::json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

nlohmann::json to_json(const ExperimentReport& r, bool include_curve);
nlohmann::json to_json(const GradCheckReport& r);

Table curve_table(const std::vector<ExperimentReport>& reports);
Table fit_table(const std::vector<FitCell>& cells);

}  // namespace sgn
