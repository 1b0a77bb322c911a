#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "chartrl/table.hpp"

namespace chartrl {

// Opt-in execution parity: run generated code in an external interpreter and
// read back `chart_data` as CSV. Disabled unless explicitly enabled.
struct ExecutionSettings {
  bool enabled = false;
  std::string interpreter = "python3";
  double timeout_seconds = 5.0;
};

struct ExecutionResult {
  std::optional<Table> table;
  std::string diagnostic;
};

// Appends a pandas CSV dump of `chart_data` to `code`, runs it in a fresh
// temporary directory with stdout/stderr discarded, and kills the process
// group once the timeout elapses.
ExecutionResult execute_chart_data(std::string_view code, const ExecutionSettings& settings);

}  // namespace chartrl
