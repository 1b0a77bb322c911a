#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "chartrl/table.hpp"

namespace chartrl {

namespace diagnostics {
inline constexpr std::string_view kNoChartData = "no chart_data";
inline constexpr std::string_view kRaggedColumns = "ragged columns";
inline constexpr std::string_view kRaggedRows = "ragged rows";
inline constexpr std::string_view kNonLiteral = "non-literal value";
inline constexpr std::string_view kNotConstructor = "not a table constructor";
inline constexpr std::string_view kMissingColumns = "missing columns";
inline constexpr std::string_view kEmptyConstructor = "empty constructor";
inline constexpr std::string_view kIncremental = "incremental construction";
inline constexpr std::string_view kSyntax = "syntax error";
inline constexpr std::string_view kStepBudget = "step budget exceeded";
}  // namespace diagnostics

struct ExtractionLimits {
  std::size_t steps_per_byte = 8;
  std::size_t base_steps = 64;

  std::size_t budget(std::size_t input_size) const { return steps_per_byte * input_size + base_steps; }
};

/// Outcome of static `chart_data` extraction.
///
/// Exactly one of `table` / `diagnostic` is meaningful: `table` is empty iff
/// `diagnostic` is non-empty. `steps` counts lexer and parser work and never
/// exceeds the limits' budget.
struct ExtractionResult {
  std::optional<Table> table;
  std::string diagnostic;
  std::size_t steps = 0;
};

// Locates the first top-level `chart_data = Ctor(...)` assignment and reads
// its data argument, either a mapping of label -> list of literals or a
// `data=[[...], ...], columns=[...]` pair. Nothing is evaluated: only string
// and numeric literals plus nan/None names are accepted as cells.
ExtractionResult extract_table_from_code(std::string_view code, const ExtractionLimits& limits = {});

}  // namespace chartrl
