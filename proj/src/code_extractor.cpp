#include "chartrl/code_extractor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <vector>

namespace chartrl {

namespace {

enum class TokenKind { Name, Number, String, FormattedString, Op, Invalid, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;  // decoded value for strings, source text otherwise
};

struct Failure {
  std::string_view diagnostic;
};

class StepCounter {
 public:
  explicit StepCounter(std::size_t budget) : budget_(budget) {}

  void tick() {
    if (++used_ > budget_) {
      throw Failure{diagnostics::kStepBudget};
    }
  }
  std::size_t used() const { return std::min(used_, budget_); }

 private:
  std::size_t budget_;
  std::size_t used_ = 0;
};

bool is_name_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' ||
         static_cast<unsigned char>(c) >= 0x80;
}
bool is_name_char(char c) { return is_name_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') {
      c = static_cast<char>(c - 'A' + 'a');
    }
  }
  return out;
}

class Lexer {
 public:
  Lexer(std::string_view src, StepCounter& steps) : src_(src), steps_(steps) {}

  std::vector<Token> run() {
    std::vector<Token> tokens;
    while (true) {
      Token t = next();
      const bool done = t.kind == TokenKind::End || t.kind == TokenKind::Invalid;
      tokens.push_back(std::move(t));
      if (done) {
        break;
      }
    }
    return tokens;
  }

 private:
  Token next() {
    steps_.tick();
    skip_trivia();
    if (pos_ >= src_.size()) {
      return {TokenKind::End, {}};
    }
    const char c = src_[pos_];
    if (c == '\'' || c == '"') {
      return string_literal("");
    }
    if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
      return number();
    }
    if (is_name_start(c)) {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && is_name_char(src_[pos_])) {
        ++pos_;
      }
      const std::string_view name = src_.substr(start, pos_ - start);
      if (pos_ < src_.size() && (src_[pos_] == '\'' || src_[pos_] == '"') && is_string_prefix(name)) {
        return string_literal(lower(name));
      }
      return {TokenKind::Name, std::string(name)};
    }
    return op();
  }

  static bool is_string_prefix(std::string_view name) {
    if (name.empty() || name.size() > 2) {
      return false;
    }
    return std::all_of(name.begin(), name.end(), [](char ch) {
      return std::string_view("rRbBuUfF").find(ch) != std::string_view::npos;
    });
  }

  void skip_trivia() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
        ++pos_;
      } else if (c == '\\' && pos_ + 1 < src_.size() && (src_[pos_ + 1] == '\n' || src_[pos_ + 1] == '\r')) {
        pos_ += 2;
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') {
          ++pos_;
        }
      } else {
        break;
      }
    }
  }

  Token string_literal(const std::string& prefix) {
    const char quote = src_[pos_];
    const bool triple = pos_ + 2 < src_.size() && src_[pos_ + 1] == quote && src_[pos_ + 2] == quote;
    pos_ += triple ? 3 : 1;
    const bool raw = prefix.find('r') != std::string::npos;
    std::string value;
    while (true) {
      if (pos_ >= src_.size()) {
        return {TokenKind::Invalid, {}};
      }
      const char c = src_[pos_];
      if (c == quote) {
        if (!triple) {
          ++pos_;
          break;
        }
        if (pos_ + 2 < src_.size() && src_[pos_ + 1] == quote && src_[pos_ + 2] == quote) {
          pos_ += 3;
          break;
        }
      }
      if (!triple && c == '\n') {
        return {TokenKind::Invalid, {}};
      }
      if (c == '\\' && pos_ + 1 < src_.size()) {
        const char e = src_[pos_ + 1];
        pos_ += 2;
        if (raw) {
          value += '\\';
          value += e;
          continue;
        }
        switch (e) {
          case 'n': value += '\n'; break;
          case 't': value += '\t'; break;
          case 'r': value += '\r'; break;
          case '\n': break;
          default: value += e; break;
        }
        continue;
      }
      value += c;
      ++pos_;
    }
    const bool formatted = prefix.find('f') != std::string::npos;
    return {formatted ? TokenKind::FormattedString : TokenKind::String, std::move(value)};
  }

  Token number() {
    const std::size_t start = pos_;
    if (src_[pos_] == '0' && pos_ + 1 < src_.size() &&
        std::string_view("xXoObB").find(src_[pos_ + 1]) != std::string_view::npos) {
      pos_ += 2;
      while (pos_ < src_.size() && (is_name_char(src_[pos_]))) {
        ++pos_;
      }
      return {TokenKind::Number, std::string(src_.substr(start, pos_ - start))};
    }
    const auto digits = [&] {
      while (pos_ < src_.size() && (is_digit(src_[pos_]) || src_[pos_] == '_')) {
        ++pos_;
      }
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) {
        ++look;
      }
      if (look < src_.size() && is_digit(src_[look])) {
        pos_ = look;
        digits();
      }
    }
    // Imaginary literals and trailing identifier characters are not plain numbers.
    if (pos_ < src_.size() && is_name_char(src_[pos_])) {
      while (pos_ < src_.size() && is_name_char(src_[pos_])) {
        ++pos_;
      }
      return {TokenKind::Name, std::string(src_.substr(start, pos_ - start))};
    }
    return {TokenKind::Number, std::string(src_.substr(start, pos_ - start))};
  }

  Token op() {
    static constexpr std::string_view kMulti[] = {
        "**=", "//=", ">>=", "<<=", "...", "==", "!=", "<=", ">=", "->", ":=", "+=", "-=",
        "*=",  "/=",  "%=",  "&=",  "|=",  "^=", "@=", "**", "//", "<<", ">>"};
    const std::string_view rest = src_.substr(pos_);
    for (const auto m : kMulti) {
      if (rest.starts_with(m)) {
        pos_ += m.size();
        return {TokenKind::Op, std::string(m)};
      }
    }
    ++pos_;
    return {TokenKind::Op, std::string(1, rest.front())};
  }

  std::string_view src_;
  StepCounter& steps_;
  std::size_t pos_ = 0;
};

bool parse_number_literal(std::string_view text, double& value) {
  std::string clean;
  clean.reserve(text.size());
  for (const char c : text) {
    if (c != '_') {
      clean += c;
    }
  }
  if (clean.size() > 2 && clean[0] == '0' &&
      std::string_view("xXoObB").find(clean[1]) != std::string_view::npos) {
    const char kind = static_cast<char>(clean[1] | 0x20);
    const int base = kind == 'x' ? 16 : kind == 'o' ? 8 : 2;
    unsigned long long integer = 0;
    const auto r = std::from_chars(clean.data() + 2, clean.data() + clean.size(), integer, base);
    if (r.ec != std::errc{} || r.ptr != clean.data() + clean.size()) {
      return false;
    }
    value = static_cast<double>(integer);
    return true;
  }
  const auto r = std::from_chars(clean.data(), clean.data() + clean.size(), value);
  return r.ec == std::errc{} && r.ptr == clean.data() + clean.size() && std::isfinite(value);
}

struct ColumnData {
  std::string label;
  std::vector<Cell> cells;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, StepCounter& steps) : tokens_(std::move(tokens)), steps_(steps) {}

  Table run() {
    const auto target = find_target();
    if (!target) {
      throw Failure{diagnostics::kNoChartData};
    }
    pos_ = *target;
    return constructor_call();
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[i];
  }

  const Token& advance() {
    steps_.tick();
    const Token& t = peek();
    if (pos_ < tokens_.size() - 1) {
      ++pos_;
    }
    return t;
  }

  bool at_op(std::string_view op, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::Op && t.text == op;
  }

  void expect_op(std::string_view op) {
    if (!at_op(op)) {
      throw Failure{diagnostics::kSyntax};
    }
    advance();
  }

  bool is_target_name(std::size_t i) const {
    return tokens_[i].kind == TokenKind::Name && tokens_[i].text == "chart_data" &&
           !(i > 0 && tokens_[i - 1].kind == TokenKind::Op && tokens_[i - 1].text == ".");
  }

  // Offset of the first token of the right-hand side.
  std::optional<std::size_t> find_target() {
    int depth = 0;
    for (std::size_t i = 0; i + 1 < tokens_.size(); ++i) {
      steps_.tick();
      const Token& t = tokens_[i];
      if (t.kind == TokenKind::Op) {
        if (t.text == "(" || t.text == "[" || t.text == "{") {
          ++depth;
        } else if ((t.text == ")" || t.text == "]" || t.text == "}") && depth > 0) {
          --depth;
        }
        continue;
      }
      if (depth != 0 || !is_target_name(i)) {
        continue;
      }
      std::size_t j = i + 1;
      // Optional annotation: `chart_data: pd.DataFrame = ...`
      if (tokens_[j].kind == TokenKind::Op && tokens_[j].text == ":") {
        ++j;
        while (j + 1 < tokens_.size() && (tokens_[j].kind == TokenKind::Name ||
                                          (tokens_[j].kind == TokenKind::Op && tokens_[j].text == "."))) {
          ++j;
        }
      }
      if (tokens_[j].kind == TokenKind::Op && tokens_[j].text == "=") {
        return j + 1;
      }
    }
    return std::nullopt;
  }

  bool mutated_later() {
    for (std::size_t i = pos_; i + 1 < tokens_.size(); ++i) {
      steps_.tick();
      if (is_target_name(i) && tokens_[i + 1].kind == TokenKind::Op &&
          (tokens_[i + 1].text == "[" || tokens_[i + 1].text == ".")) {
        return true;
      }
    }
    return false;
  }

  Table constructor_call() {
    if (peek().kind != TokenKind::Name) {
      throw Failure{diagnostics::kNotConstructor};
    }
    advance();
    while (at_op(".") && peek(1).kind == TokenKind::Name) {
      advance();
      advance();
    }
    if (!at_op("(")) {
      throw Failure{diagnostics::kNotConstructor};
    }
    advance();
    if (at_op(")")) {
      advance();
      throw Failure{mutated_later() ? diagnostics::kIncremental : diagnostics::kEmptyConstructor};
    }

    std::optional<std::vector<ColumnData>> mapping;
    std::optional<std::vector<std::vector<Cell>>> records;
    std::optional<std::vector<std::string>> columns;
    std::size_t positional = 0;

    while (true) {
      if (peek().kind == TokenKind::Name && at_op("=", 1)) {
        const std::string key = advance().text;
        advance();
        if (key == "data") {
          data_argument(mapping, records);
        } else if (key == "columns") {
          columns = label_list();
        } else {
          skip_expression();
        }
      } else {
        if (positional == 0) {
          data_argument(mapping, records);
        } else if (positional == 2) {
          columns = label_list();
        } else {
          skip_expression();
        }
        ++positional;
      }
      if (at_op(",")) {
        advance();
        if (at_op(")")) {
          advance();
          break;
        }
        continue;
      }
      expect_op(")");
      break;
    }
    return assemble(std::move(mapping), std::move(records), std::move(columns));
  }

  void data_argument(std::optional<std::vector<ColumnData>>& mapping,
                     std::optional<std::vector<std::vector<Cell>>>& records) {
    if (at_op("{")) {
      mapping = column_mapping();
    } else if (at_op("[") || at_op("(")) {
      records = record_list();
    } else {
      throw Failure{diagnostics::kNonLiteral};
    }
  }

  static Table assemble(std::optional<std::vector<ColumnData>> mapping,
                        std::optional<std::vector<std::vector<Cell>>> records,
                        std::optional<std::vector<std::string>> columns) {
    if (mapping) {
      std::vector<ColumnData> cols = std::move(*mapping);
      if (columns) {
        // Explicit columns select and order the mapping; absent keys are all-missing.
        std::size_t n = cols.empty() ? 0 : cols.front().cells.size();
        std::vector<ColumnData> picked;
        for (const auto& label : *columns) {
          const auto it = std::find_if(cols.begin(), cols.end(),
                                       [&](const ColumnData& c) { return c.label == label; });
          if (it != cols.end()) {
            picked.push_back(*it);
          } else {
            picked.push_back({label, std::vector<Cell>(n)});
          }
        }
        cols = std::move(picked);
      }
      const std::size_t n = cols.empty() ? 0 : cols.front().cells.size();
      for (const auto& c : cols) {
        if (c.cells.size() != n) {
          throw Failure{diagnostics::kRaggedColumns};
        }
      }
      std::vector<std::string> labels;
      labels.reserve(cols.size());
      for (const auto& c : cols) {
        labels.push_back(c.label);
      }
      std::vector<std::vector<Cell>> rows(n);
      for (std::size_t r = 0; r < n; ++r) {
        rows[r].reserve(cols.size());
        for (const auto& c : cols) {
          rows[r].push_back(c.cells[r]);
        }
      }
      return Table(std::move(labels), std::move(rows));
    }
    if (records) {
      if (!columns) {
        throw Failure{diagnostics::kMissingColumns};
      }
      for (const auto& row : *records) {
        if (row.size() != columns->size()) {
          throw Failure{diagnostics::kRaggedRows};
        }
      }
      return Table(std::move(*columns), std::move(*records));
    }
    throw Failure{diagnostics::kNonLiteral};
  }

  std::vector<ColumnData> column_mapping() {
    expect_op("{");
    std::vector<ColumnData> cols;
    while (!at_op("}")) {
      std::string label = label_literal();
      expect_op(":");
      std::vector<Cell> cells = scalar_sequence();
      const auto it = std::find_if(cols.begin(), cols.end(),
                                   [&](const ColumnData& c) { return c.label == label; });
      if (it != cols.end()) {
        it->cells = std::move(cells);
      } else {
        cols.push_back({std::move(label), std::move(cells)});
      }
      if (at_op(",")) {
        advance();
      } else if (!at_op("}")) {
        throw Failure{diagnostics::kSyntax};
      }
    }
    advance();
    return cols;
  }

  std::vector<std::vector<Cell>> record_list() {
    const std::string close = at_op("[") ? "]" : ")";
    advance();
    std::vector<std::vector<Cell>> rows;
    while (!at_op(close)) {
      if (!at_op("[") && !at_op("(")) {
        throw Failure{diagnostics::kNonLiteral};
      }
      rows.push_back(scalar_sequence());
      if (at_op(",")) {
        advance();
      } else if (!at_op(close)) {
        throw Failure{diagnostics::kSyntax};
      }
    }
    advance();
    return rows;
  }

  std::vector<std::string> label_list() {
    if (!at_op("[") && !at_op("(")) {
      throw Failure{diagnostics::kNonLiteral};
    }
    const std::string close = at_op("[") ? "]" : ")";
    advance();
    std::vector<std::string> labels;
    while (!at_op(close)) {
      labels.push_back(label_literal());
      if (at_op(",")) {
        advance();
      } else if (!at_op(close)) {
        throw Failure{diagnostics::kSyntax};
      }
    }
    advance();
    return labels;
  }

  std::string label_literal() {
    const Token& t = peek();
    if (t.kind == TokenKind::String) {
      return string_run();
    }
    if (t.kind == TokenKind::Number) {
      return advance().text;
    }
    if (t.kind == TokenKind::End || t.kind == TokenKind::Invalid) {
      throw Failure{diagnostics::kSyntax};
    }
    throw Failure{diagnostics::kNonLiteral};
  }

  // Adjacent string literals concatenate.
  std::string string_run() {
    std::string out;
    while (peek().kind == TokenKind::String) {
      out += advance().text;
    }
    if (peek().kind == TokenKind::FormattedString) {
      throw Failure{diagnostics::kNonLiteral};
    }
    return out;
  }

  std::vector<Cell> scalar_sequence() {
    if (!at_op("[") && !at_op("(")) {
      if (peek().kind == TokenKind::End || peek().kind == TokenKind::Invalid) {
        throw Failure{diagnostics::kSyntax};
      }
      throw Failure{diagnostics::kNonLiteral};
    }
    const std::string close = at_op("[") ? "]" : ")";
    advance();
    std::vector<Cell> cells;
    while (!at_op(close)) {
      cells.push_back(scalar());
      if (at_op(",")) {
        advance();
      } else if (!at_op(close)) {
        const Token& t = peek();
        if (t.kind == TokenKind::End || t.kind == TokenKind::Invalid ||
            (t.kind == TokenKind::Op && (t.text == "]" || t.text == ")" || t.text == "}"))) {
          throw Failure{diagnostics::kSyntax};
        }
        throw Failure{diagnostics::kNonLiteral};
      }
    }
    advance();
    return cells;
  }

  Cell scalar() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::String:
        return Cell::text(string_run());
      case TokenKind::Number:
        return number_cell(false);
      case TokenKind::Name:
        return missing_name();
      case TokenKind::Op:
        if ((t.text == "-" || t.text == "+") && peek(1).kind == TokenKind::Number) {
          const bool negative = t.text == "-";
          advance();
          return number_cell(negative);
        }
        if (t.text == "]" || t.text == ")" || t.text == "}" || t.text == ",") {
          throw Failure{diagnostics::kSyntax};
        }
        throw Failure{diagnostics::kNonLiteral};
      case TokenKind::End:
      case TokenKind::Invalid:
        throw Failure{diagnostics::kSyntax};
      case TokenKind::FormattedString:
        break;
    }
    throw Failure{diagnostics::kNonLiteral};
  }

  Cell number_cell(bool negative) {
    double value = 0.0;
    if (!parse_number_literal(advance().text, value)) {
      throw Failure{diagnostics::kNonLiteral};
    }
    return Cell::number(negative ? -value : value);
  }

  // `nan`, `np.nan`, `None`, `math.NaN` ... are missing; any other name is not a literal.
  Cell missing_name() {
    std::string last = advance().text;
    while (at_op(".") && peek(1).kind == TokenKind::Name) {
      advance();
      last = advance().text;
    }
    const std::string key = lower(last);
    if ((key == "nan" || key == "none") && !at_op("(") && !at_op("[") && !at_op(".")) {
      return Cell::missing();
    }
    throw Failure{diagnostics::kNonLiteral};
  }

  void skip_expression() {
    int depth = 0;
    while (true) {
      const Token& t = peek();
      if (t.kind == TokenKind::End || t.kind == TokenKind::Invalid) {
        throw Failure{diagnostics::kSyntax};
      }
      if (t.kind == TokenKind::Op) {
        if (depth == 0 && (t.text == "," || t.text == ")")) {
          return;
        }
        if (t.text == "(" || t.text == "[" || t.text == "{") {
          ++depth;
        } else if (t.text == ")" || t.text == "]" || t.text == "}") {
          if (depth == 0) {
            throw Failure{diagnostics::kSyntax};
          }
          --depth;
        }
      }
      advance();
    }
  }

  std::vector<Token> tokens_;
  StepCounter& steps_;
  std::size_t pos_ = 0;
};

}  // namespace

ExtractionResult extract_table_from_code(std::string_view code, const ExtractionLimits& limits) {
  StepCounter steps(limits.budget(code.size()));
  ExtractionResult result;
  try {
    Lexer lexer(code, steps);
    Parser parser(lexer.run(), steps);
    result.table = parser.run();
  } catch (const Failure& failure) {
    result.diagnostic = std::string(failure.diagnostic);
  }
  result.steps = steps.used();
  return result;
}

}  // namespace chartrl
