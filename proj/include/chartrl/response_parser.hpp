#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace chartrl {

enum class Strategy { Code, Direct };

inline constexpr std::string_view kCodeToken = "<CODE>";
inline constexpr std::string_view kDirectToken = "<DIRECT>";

std::string_view to_token(Strategy strategy);

// Exact, case-sensitive match against the two literal tokens.
std::optional<Strategy> strategy_from_token(std::string_view token);

/// Structured view of one raw model output.
///
/// `strategy` comes from the first strategy token that precedes every fenced
/// code block. `code_text` joins all closed fenced blocks in document order,
/// separated by newlines. `boxed_answer` is the brace-balanced content of the
/// last `\boxed{` in the text.
struct ParsedResponse {
  std::string raw;
  std::optional<Strategy> strategy;
  std::optional<std::string> code_text;
  std::optional<std::string> boxed_answer;
};

// Total: never throws on any input; missing structure shows up as empty fields.
ParsedResponse parse_response(std::string raw);

// Content of the final `\boxed{...}`. Returns nullopt when there is no box or
// when the final box is not closed. `\{` and `\}` are literal braces and do
// not change the depth.
std::optional<std::string> extract_boxed(std::string_view raw);

}  // namespace chartrl
