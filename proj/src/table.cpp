#include "chartrl/table.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <string>

namespace chartrl {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) {
    s.remove_prefix(1);
  }
  while (!s.empty() && is_space(s.back())) {
    s.remove_suffix(1);
  }
  return s;
}

constexpr std::array<std::string_view, 5> kCurrencySymbols = {
    "$", "\xE2\x82\xAC" /* euro */, "\xC2\xA3" /* pound */, "\xC2\xA5" /* yen */,
    "\xE2\x82\xB9" /* rupee */};

bool strip_currency(std::string_view& s) {
  for (const auto symbol : kCurrencySymbols) {
    if (s.starts_with(symbol)) {
      s.remove_prefix(symbol.size());
      return true;
    }
  }
  return false;
}

bool strip_sign(std::string_view& s, std::string& out) {
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    if (s.front() == '-') {
      out += '-';
    }
    s.remove_prefix(1);
    return true;
  }
  return false;
}

// Integer digits, optionally grouped as d{1,3}(,ddd)+. Appends the digits
// without separators; returns false on malformed grouping.
bool take_integer_part(std::string_view& s, std::string& out) {
  std::size_t i = 0;
  while (i < s.size() && is_digit(s[i])) {
    ++i;
  }
  if (i < s.size() && s[i] == ',') {
    if (i == 0 || i > 3) {
      return false;
    }
    while (i < s.size() && s[i] == ',') {
      for (std::size_t k = 1; k <= 3; ++k) {
        if (i + k >= s.size() || !is_digit(s[i + k])) {
          return false;
        }
      }
      i += 4;
    }
    if (i < s.size() && is_digit(s[i])) {
      return false;
    }
  }
  for (std::size_t k = 0; k < i; ++k) {
    if (s[k] != ',') {
      out += s[k];
    }
  }
  s.remove_prefix(i);
  return true;
}

bool equals_ignore_case(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           const auto lower = [](char c) {
             return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
           };
           return lower(x) == lower(y);
         });
}

std::vector<char32_t> code_points(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto lead = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (lead < 0x80) {
      len = 1;
      cp = lead;
    } else if ((lead & 0xE0) == 0xC0) {
      len = 2;
      cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
      len = 3;
      cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
      len = 4;
      cp = lead & 0x07;
    }
    bool valid = len > 0 && i + len <= s.size();
    for (std::size_t k = 1; valid && k < len; ++k) {
      const auto cont = static_cast<unsigned char>(s[i + k]);
      if ((cont & 0xC0) != 0x80) {
        valid = false;
      } else {
        cp = (cp << 6) | (cont & 0x3F);
      }
    }
    if (!valid) {
      // Keep invalid bytes distinct from every real code point.
      out.push_back(0x110000 + lead);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

bool needs_quoting(std::string_view s) {
  if (s.empty()) {
    return false;
  }
  if (is_space(s.front()) || is_space(s.back())) {
    return true;
  }
  return s.find_first_of(",\"\r\n") != std::string_view::npos;
}

void append_field(std::string& out, std::string_view s) {
  if (!needs_quoting(s)) {
    out += s;
    return;
  }
  out += '"';
  for (const char c : s) {
    if (c == '"') {
      out += '"';
    }
    out += c;
  }
  out += '"';
}

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), result.ptr);
}

}  // namespace

Cell Cell::number(double value) {
  Cell cell;
  if (!std::isnan(value)) {
    cell.value_ = value;
  }
  return cell;
}

Cell Cell::text(std::string value) {
  Cell cell;
  cell.value_ = std::move(value);
  return cell;
}

Table::Table(std::vector<std::string> columns, std::vector<std::vector<Cell>> rows)
    : columns_(std::move(columns)), rows_(std::move(rows)) {
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (rows_[r].size() != columns_.size()) {
      throw std::invalid_argument("row " + std::to_string(r) + " has " +
                                  std::to_string(rows_[r].size()) + " cells, expected " +
                                  std::to_string(columns_.size()));
    }
  }
}

std::optional<double> parse_number(std::string_view text) {
  std::string_view s = trim(text);
  if (!s.empty() && s.back() == '%') {
    s.remove_suffix(1);
    s = trim(s);
  }
  std::string clean;
  const bool signed_first = strip_sign(s, clean);
  if (strip_currency(s) && !signed_first) {
    strip_sign(s, clean);
  }
  const std::size_t before = clean.size();
  if (!take_integer_part(s, clean)) {
    return std::nullopt;
  }
  bool has_digits = clean.size() > before;
  if (!s.empty() && s.front() == '.') {
    clean += '.';
    s.remove_prefix(1);
    while (!s.empty() && is_digit(s.front())) {
      clean += s.front();
      s.remove_prefix(1);
      has_digits = true;
    }
  }
  if (!has_digits) {
    return std::nullopt;
  }
  if (!s.empty() && (s.front() == 'e' || s.front() == 'E')) {
    clean += 'e';
    s.remove_prefix(1);
    if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
      clean += s.front();
      s.remove_prefix(1);
    }
    if (s.empty() || !is_digit(s.front())) {
      return std::nullopt;
    }
    while (!s.empty() && is_digit(s.front())) {
      clean += s.front();
      s.remove_prefix(1);
    }
  }
  if (!s.empty()) {
    return std::nullopt;
  }
  double value = 0.0;
  const auto result = std::from_chars(clean.data(), clean.data() + clean.size(), value);
  if (result.ec != std::errc{} || result.ptr != clean.data() + clean.size() ||
      !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

Cell classify_field(std::string_view field) {
  const std::string_view s = trim(field);
  if (s.empty() || equals_ignore_case(s, "nan")) {
    return Cell::missing();
  }
  if (const auto value = parse_number(s)) {
    return Cell::number(*value);
  }
  return Cell::text(std::string(field));
}

Table parse_csv(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) {
    text.remove_prefix(3);
  }
  if (trim(text).empty()) {
    throw CsvError("empty CSV input");
  }

  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool record_has_content = false;

  const auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
  };
  const auto end_record = [&] {
    end_field();
    // Blank lines carry no record.
    if (record_has_content) {
      records.push_back(std::move(record));
    }
    record.clear();
    record_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      record_has_content = true;
    } else if (c == ',') {
      record_has_content = true;
      end_field();
    } else if (c == '\n') {
      end_record();
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      end_record();
      ++i;
    } else {
      record_has_content = true;
      field += c;
    }
  }
  if (in_quotes) {
    throw CsvError("unterminated quoted field");
  }
  end_record();

  if (records.empty()) {
    throw CsvError("empty CSV input");
  }
  std::vector<std::string> columns = std::move(records.front());
  std::vector<std::vector<Cell>> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != columns.size()) {
      throw CsvError("row " + std::to_string(r) + ": expected " + std::to_string(columns.size()) +
                     " fields, found " + std::to_string(records[r].size()));
    }
    std::vector<Cell> row;
    row.reserve(columns.size());
    for (const auto& f : records[r]) {
      row.push_back(classify_field(f));
    }
    rows.push_back(std::move(row));
  }
  return Table(std::move(columns), std::move(rows));
}

std::string render_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.column_count(); ++c) {
    if (c > 0) {
      out += ',';
    }
    append_field(out, table.columns()[c]);
  }
  out += '\n';
  for (const auto& row : table.rows()) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) {
        out += ',';
      }
      const Cell& cell = row[c];
      if (cell.is_number()) {
        out += format_number(cell.as_number());
      } else if (cell.is_text()) {
        append_field(out, cell.as_text());
      } else if (row.size() == 1) {
        // keeps the record from reading back as a blank line
        out += "\"\"";
      }
    }
    out += '\n';
  }
  return out;
}

std::string normalize_label(std::string_view label) {
  std::string out;
  out.reserve(label.size());
  for (const char c : label) {
    if (is_space(c)) {
      continue;
    }
    out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  }
  return out;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  const auto x = code_points(a);
  const auto y = code_points(b);
  if (x.empty()) {
    return y.size();
  }
  if (y.empty()) {
    return x.size();
  }
  std::vector<std::size_t> prev(y.size() + 1);
  std::vector<std::size_t> cur(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) {
    prev[j] = j;
  }
  for (std::size_t i = 1; i <= x.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      const std::size_t substitute = prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, substitute});
    }
    std::swap(prev, cur);
  }
  return prev[y.size()];
}

int fuzzy_match_score(std::string_view a, std::string_view b) {
  if (a == b) {
    return 100;
  }
  const std::size_t longest = std::max(code_points(a).size(), code_points(b).size());
  const std::size_t distance = levenshtein(a, b);
  // Exact integer form of round_half_up(100 * (longest - distance) / longest).
  const std::size_t numerator = 200 * (longest - distance) + longest;
  return static_cast<int>(numerator / (2 * longest));
}

bool compare_values(const Cell& predicted, const Cell& truth) {
  if (predicted.is_missing() || truth.is_missing()) {
    return predicted.is_missing() && truth.is_missing();
  }
  if (predicted.is_text() && truth.is_text()) {
    return normalize_label(predicted.as_text()) == normalize_label(truth.as_text());
  }
  std::optional<double> p;
  std::optional<double> g;
  p = predicted.is_number() ? std::optional<double>(predicted.as_number())
                            : parse_number(predicted.as_text());
  g = truth.is_number() ? std::optional<double>(truth.as_number()) : parse_number(truth.as_text());
  if (!p || !g) {
    return false;
  }
  return std::fabs(*p - *g) <= kValueRelativeTolerance * std::max(std::fabs(*g), kValueAbsoluteFloor);
}

}  // namespace chartrl
