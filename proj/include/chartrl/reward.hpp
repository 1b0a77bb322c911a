#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chartrl/code_extractor.hpp"
#include "chartrl/response_parser.hpp"
#include "chartrl/table.hpp"

namespace chartrl {

enum class Programmability { High, Low };

std::string_view to_string(Programmability p);
// Case-insensitive "high" / "low".
std::optional<Programmability> programmability_from_string(std::string_view text);

struct RewardWeights {
  double accuracy = 0.8;
  double decision = 0.3;
  double data = 0.15;
  double format = 0.05;

  bool valid() const { return accuracy >= 0 && decision >= 0 && data >= 0 && format >= 0; }
};

struct DecisionRewardParams {
  double full = 1.0;
  double partial = 0.3;
  double wrong = 0.0;

  bool valid() const { return 0.0 <= wrong && wrong <= partial && partial <= full && full <= 1.0; }
};

enum class FormatMode {
  StrategyAndBoxed,  // adaptive protocol: token + boxed answer
  BoxedOnly,         // fixed-strategy baselines
};

struct ScoringContext {
  std::string gold_answer;
  Programmability programmability = Programmability::High;
  std::optional<Table> gt_table;
  double numeric_answer_tolerance = 0.05;
};

struct ColumnMatch {
  std::string gt_column;
  std::optional<std::string> pred_column;
  int score = 0;              // best fuzzy score seen for this gt column
  std::size_t correct = 0;    // cells that compared equal
  std::size_t compared = 0;   // min(row counts) when matched
};

struct ColumnReport {
  std::vector<ColumnMatch> columns;
  double r_col = 0.0;
  double r_row = 0.0;
  double r_values = 0.0;
  std::string diagnostic;
};

struct DataScore {
  double value = 0.0;
  ColumnReport report;
};

struct RewardBreakdown {
  double accuracy = 0.0;
  double decision = 0.0;
  double data = 0.0;
  double format = 0.0;
  double total = 0.0;
  std::string diagnostic;
};

// Column-match threshold on the 0-100 fuzzy scale (strict).
inline constexpr int kColumnMatchThreshold = 50;

double accuracy_reward(const ParsedResponse& resp, const ScoringContext& ctx);

double decision_reward(const ParsedResponse& resp, double r_acc, const ScoringContext& ctx,
                       const DecisionRewardParams& params = {});

// Data-fidelity score of a predicted table against ground truth:
// 0.2 * column completeness + 0.1 * row-count agreement + 0.7 * value accuracy.
DataScore score_tables(const Table& predicted, const Table& truth);

// Extracts `chart_data` from the response code and scores it with
// score_tables. Any missing piece yields 0 with a diagnostic.
DataScore data_accuracy_reward(const ParsedResponse& resp, const ScoringContext& ctx);

double format_reward(const ParsedResponse& resp, FormatMode mode = FormatMode::StrategyAndBoxed);

// w.accuracy*r_acc + w.decision*r_decision + w.data*r_data + w.format*r_format,
// with the four products summed in ascending order of magnitude.
double weighted_total(const RewardWeights& w, double r_acc, double r_decision, double r_data,
                      double r_format);

RewardBreakdown total_reward(const ParsedResponse& resp, const ScoringContext& ctx,
                             const RewardWeights& weights = {},
                             const DecisionRewardParams& decision = {},
                             FormatMode mode = FormatMode::StrategyAndBoxed);

// Same as total_reward, but the predicted table (or its failure diagnostic)
// was obtained by the caller, e.g. by executing the code.
RewardBreakdown total_reward_with_table(const ParsedResponse& resp, const ScoringContext& ctx,
                                        const std::optional<Table>& predicted,
                                        std::string_view extraction_diagnostic,
                                        const RewardWeights& weights = {},
                                        const DecisionRewardParams& decision = {},
                                        FormatMode mode = FormatMode::StrategyAndBoxed);

}  // namespace chartrl
