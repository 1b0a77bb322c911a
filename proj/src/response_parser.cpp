#include "chartrl/response_parser.hpp"

#include <vector>

namespace chartrl {

namespace {

constexpr std::string_view kFence = "```";
constexpr std::string_view kBoxed = "\\boxed{";

struct FencedBlock {
  std::size_t open = 0;  // offset of the opening fence
  std::string_view body;
};

// Closed ``` blocks in document order. An opening fence followed by text on
// the same line treats that text as a language tag unless the closing fence
// is also on that line (inline block). Unclosed fences are dropped.
std::vector<FencedBlock> find_fenced_blocks(std::string_view raw) {
  std::vector<FencedBlock> blocks;
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = raw.find(kFence, pos);
    if (open == std::string_view::npos) {
      break;
    }
    const std::size_t after = open + kFence.size();
    const std::size_t close = raw.find(kFence, after);
    if (close == std::string_view::npos) {
      break;
    }
    const std::size_t eol = raw.find('\n', after);
    const std::size_t body_begin =
        (eol != std::string_view::npos && eol < close) ? eol + 1 : after;
    std::string_view body = raw.substr(body_begin, close - body_begin);
    if (!body.empty() && body.back() == '\n') {
      body.remove_suffix(1);
    }
    blocks.push_back({open, body});
    pos = close + kFence.size();
  }
  return blocks;
}

}  // namespace

std::string_view to_token(Strategy strategy) {
  return strategy == Strategy::Code ? kCodeToken : kDirectToken;
}

std::optional<Strategy> strategy_from_token(std::string_view token) {
  if (token == kCodeToken) {
    return Strategy::Code;
  }
  if (token == kDirectToken) {
    return Strategy::Direct;
  }
  return std::nullopt;
}

std::optional<std::string> extract_boxed(std::string_view raw) {
  const std::size_t start = raw.rfind(kBoxed);
  if (start == std::string_view::npos) {
    return std::nullopt;
  }
  const std::size_t body = start + kBoxed.size();
  int depth = 1;
  for (std::size_t i = body; i < raw.size(); ++i) {
    const char c = raw[i];
    if (c == '\\' && i + 1 < raw.size() && (raw[i + 1] == '{' || raw[i + 1] == '}')) {
      ++i;
      continue;
    }
    if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) {
        return std::string(raw.substr(body, i - body));
      }
    }
  }
  return std::nullopt;
}

ParsedResponse parse_response(std::string raw) {
  ParsedResponse out;
  out.raw = std::move(raw);
  const std::string_view text = out.raw;

  const auto blocks = find_fenced_blocks(text);
  if (!blocks.empty()) {
    std::string joined;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (i > 0) {
        joined += '\n';
      }
      joined += blocks[i].body;
    }
    out.code_text = std::move(joined);
  }

  // The strategy must be committed before any code is written.
  const std::string_view preamble =
      blocks.empty() ? text : text.substr(0, blocks.front().open);
  const std::size_t code_at = preamble.find(kCodeToken);
  const std::size_t direct_at = preamble.find(kDirectToken);
  if (code_at != std::string_view::npos || direct_at != std::string_view::npos) {
    out.strategy = code_at < direct_at ? Strategy::Code : Strategy::Direct;
  }

  out.boxed_answer = extract_boxed(text);
  return out;
}

}  // namespace chartrl
