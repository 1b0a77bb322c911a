#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace chartrl {

struct Missing {
  bool operator==(const Missing&) const = default;
};

/// One table value: a finite-or-infinite number (never NaN), text, or missing.
class Cell {
 public:
  Cell() = default;

  // NaN becomes Missing.
  static Cell number(double value);
  static Cell text(std::string value);
  static Cell missing() { return Cell{}; }

  bool is_number() const { return std::holds_alternative<double>(value_); }
  bool is_text() const { return std::holds_alternative<std::string>(value_); }
  bool is_missing() const { return std::holds_alternative<Missing>(value_); }

  double as_number() const { return std::get<double>(value_); }
  const std::string& as_text() const { return std::get<std::string>(value_); }

  bool operator==(const Cell&) const = default;

 private:
  std::variant<Missing, double, std::string> value_;
};

class Table {
 public:
  Table() = default;
  // Throws std::invalid_argument when a row width differs from the header.
  Table(std::vector<std::string> columns, std::vector<std::vector<Cell>> rows);

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  std::size_t column_count() const { return columns_.size(); }
  std::size_t row_count() const { return rows_.size(); }
  const Cell& at(std::size_t row, std::size_t column) const { return rows_.at(row).at(column); }

  bool operator==(const Table&) const = default;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// RFC-4180 CSV with a mandatory header row. Fields are classified by
// classify_field. Throws CsvError on empty input, unterminated quotes, or a
// record whose field count differs from the header (the message names the
// 1-based data row).
Table parse_csv(std::string_view text);

// Inverse of parse_csv for tables whose text cells need no re-interpretation.
std::string render_csv(const Table& table);

// Decimal or scientific literal, after trimming whitespace and stripping one
// leading currency symbol, one trailing percent sign and well-formed
// thousands separators: "$2,100" -> 2100, "17%" -> 17, "-1.5e3" -> -1500.
std::optional<double> parse_number(std::string_view text);

// Empty or case-insensitive "nan" -> Missing, numeric -> Number, else Text.
Cell classify_field(std::string_view field);

// All whitespace removed, ASCII letters lowercased.
std::string normalize_label(std::string_view label);

// Edit distance over UTF-8 code points (invalid bytes count as one unit each).
std::size_t levenshtein(std::string_view a, std::string_view b);

// round_half_up(100 * (1 - levenshtein / max_len)); 100 when both are equal.
int fuzzy_match_score(std::string_view a, std::string_view b);

inline constexpr double kValueRelativeTolerance = 1e-2;
inline constexpr double kValueAbsoluteFloor = 1e-9;

// Cell equality used for data-fidelity scoring. The numeric branch anchors
// the tolerance on the ground-truth argument `truth`.
bool compare_values(const Cell& predicted, const Cell& truth);

}  // namespace chartrl
