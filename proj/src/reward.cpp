#include "chartrl/reward.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace chartrl {

std::string_view to_string(Programmability p) { return p == Programmability::High ? "High" : "Low"; }

std::optional<Programmability> programmability_from_string(std::string_view text) {
  const std::string key = normalize_label(text);
  if (key == "high") {
    return Programmability::High;
  }
  if (key == "low") {
    return Programmability::Low;
  }
  return std::nullopt;
}

double accuracy_reward(const ParsedResponse& resp, const ScoringContext& ctx) {
  if (!resp.boxed_answer) {
    return 0.0;
  }
  const auto predicted = parse_number(*resp.boxed_answer);
  const auto gold = parse_number(ctx.gold_answer);
  if (predicted && gold) {
    const double scale = std::max(std::fabs(*gold), kValueAbsoluteFloor);
    return std::fabs(*predicted - *gold) <= ctx.numeric_answer_tolerance * scale ? 1.0 : 0.0;
  }
  return normalize_label(*resp.boxed_answer) == normalize_label(ctx.gold_answer) ? 1.0 : 0.0;
}

double decision_reward(const ParsedResponse& resp, double r_acc, const ScoringContext& ctx,
                       const DecisionRewardParams& params) {
  if (!resp.strategy) {
    return params.wrong;
  }
  const bool wants_code = ctx.programmability == Programmability::High;
  const bool correct_strategy = (*resp.strategy == Strategy::Code) == wants_code;
  if (!correct_strategy) {
    return params.wrong;
  }
  return r_acc >= 1.0 ? params.full : params.partial;
}

DataScore score_tables(const Table& predicted, const Table& truth) {
  DataScore out;
  ColumnReport& report = out.report;
  if (truth.column_count() == 0) {
    report.diagnostic = "empty ground-truth table";
    return out;
  }

  std::vector<std::string> pred_labels;
  pred_labels.reserve(predicted.column_count());
  for (const auto& label : predicted.columns()) {
    pred_labels.push_back(normalize_label(label));
  }
  std::vector<bool> claimed(pred_labels.size(), false);

  const std::size_t num_comparisons = std::min(predicted.row_count(), truth.row_count());
  std::size_t matched = 0;
  double total_accuracy = 0.0;

  for (std::size_t g = 0; g < truth.column_count(); ++g) {
    ColumnMatch match;
    match.gt_column = truth.columns()[g];
    const std::string gt_label = normalize_label(match.gt_column);

    std::optional<std::size_t> best;
    int best_score = -1;
    for (std::size_t p = 0; p < pred_labels.size(); ++p) {
      if (claimed[p]) {
        continue;
      }
      const int score = fuzzy_match_score(gt_label, pred_labels[p]);
      if (score > best_score) {
        best_score = score;
        best = p;
      }
    }
    match.score = std::max(best_score, 0);

    if (best && best_score > kColumnMatchThreshold) {
      claimed[*best] = true;
      match.pred_column = predicted.columns()[*best];
      ++matched;
      for (std::size_t r = 0; r < num_comparisons; ++r) {
        if (compare_values(predicted.at(r, *best), truth.at(r, g))) {
          ++match.correct;
        }
      }
      match.compared = num_comparisons;
      if (num_comparisons > 0) {
        total_accuracy += static_cast<double>(match.correct) / static_cast<double>(num_comparisons);
      }
    }
    report.columns.push_back(std::move(match));
  }

  report.r_col = static_cast<double>(matched) / static_cast<double>(truth.column_count());
  report.r_row = predicted.row_count() == truth.row_count() ? 1.0 : 0.0;
  report.r_values = matched > 0 ? total_accuracy / static_cast<double>(matched) : 0.0;
  out.value = 0.2 * report.r_col + 0.1 * report.r_row + 0.7 * report.r_values;
  return out;
}

namespace {

DataScore data_score_for(const ParsedResponse& resp, const ScoringContext& ctx,
                         const std::optional<Table>& predicted, std::string_view diagnostic) {
  DataScore out;
  if (!ctx.gt_table) {
    out.report.diagnostic = "no ground-truth table";
    return out;
  }
  if (!resp.code_text) {
    out.report.diagnostic = "no code block";
    return out;
  }
  if (!predicted) {
    out.report.diagnostic = std::string(diagnostic);
    return out;
  }
  return score_tables(*predicted, *ctx.gt_table);
}

}  // namespace

DataScore data_accuracy_reward(const ParsedResponse& resp, const ScoringContext& ctx) {
  if (!resp.code_text || !ctx.gt_table) {
    return data_score_for(resp, ctx, std::nullopt, {});
  }
  const ExtractionResult extracted = extract_table_from_code(*resp.code_text);
  return data_score_for(resp, ctx, extracted.table, extracted.diagnostic);
}

double format_reward(const ParsedResponse& resp, FormatMode mode) {
  if (!resp.boxed_answer) {
    return 0.0;
  }
  if (mode == FormatMode::StrategyAndBoxed && !resp.strategy) {
    return 0.0;
  }
  return 1.0;
}

double weighted_total(const RewardWeights& w, double r_acc, double r_decision, double r_data,
                      double r_format) {
  std::array<double, 4> terms = {w.accuracy * r_acc, w.decision * r_decision, w.data * r_data,
                                 w.format * r_format};
  std::stable_sort(terms.begin(), terms.end(),
                   [](double a, double b) { return std::fabs(a) < std::fabs(b); });
  double total = 0.0;
  for (const double t : terms) {
    total += t;
  }
  return total;
}

namespace {

RewardBreakdown combine(const ParsedResponse& resp, const ScoringContext& ctx, const DataScore* data,
                        const RewardWeights& weights, const DecisionRewardParams& decision,
                        FormatMode mode) {
  RewardBreakdown out;
  out.accuracy = accuracy_reward(resp, ctx);
  out.decision = decision_reward(resp, out.accuracy, ctx, decision);
  out.format = format_reward(resp, mode);
  if (data != nullptr) {
    out.data = data->value;
    out.diagnostic = data->report.diagnostic;
  }
  out.total = weighted_total(weights, out.accuracy, out.decision, out.data, out.format);
  return out;
}

}  // namespace

RewardBreakdown total_reward(const ParsedResponse& resp, const ScoringContext& ctx,
                             const RewardWeights& weights, const DecisionRewardParams& decision,
                             FormatMode mode) {
  if (resp.strategy != Strategy::Code) {
    return combine(resp, ctx, nullptr, weights, decision, mode);
  }
  const DataScore data = data_accuracy_reward(resp, ctx);
  return combine(resp, ctx, &data, weights, decision, mode);
}

RewardBreakdown total_reward_with_table(const ParsedResponse& resp, const ScoringContext& ctx,
                                        const std::optional<Table>& predicted,
                                        std::string_view extraction_diagnostic,
                                        const RewardWeights& weights,
                                        const DecisionRewardParams& decision, FormatMode mode) {
  if (resp.strategy != Strategy::Code) {
    return combine(resp, ctx, nullptr, weights, decision, mode);
  }
  const DataScore data = data_score_for(resp, ctx, predicted, extraction_diagnostic);
  return combine(resp, ctx, &data, weights, decision, mode);
}

}  // namespace chartrl
