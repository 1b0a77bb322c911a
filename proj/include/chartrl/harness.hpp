#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chartrl/config.hpp"
#include "chartrl/reward.hpp"

namespace chartrl {

enum ExitCode : int {
  kExitOk = 0,
  kExitIoError = 1,
  kExitNoInput = 2,
  kExitDiverged = 3,
};

class RecordError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RecordLine {
  std::string id;
  std::string benchmark;
  std::string question;
  std::string gold_answer;
  std::optional<Programmability> programmability;
  std::optional<std::string> gt_table_csv;
  std::string response;
};

// Throws RecordError naming the offending field.
RecordLine record_from_json(const nlohmann::ordered_json& j);

// Input record with `strategy`, `rewards` and `diagnostic` added. Throws
// RecordError when the record lacks a programmability label or carries an
// unreadable gt_table_csv.
nlohmann::ordered_json score_record(const nlohmann::ordered_json& input, const ScoringSettings& settings);

struct ScoreStats {
  std::size_t scored = 0;
  std::size_t skipped = 0;
};

// Line-by-line. Malformed lines (bad JSON, bad record, duplicate id) are
// reported on `log` with their 1-based line number and produce no output.
ScoreStats score_stream(std::istream& in, std::ostream& out, std::ostream& log,
                        const ScoringSettings& settings);

struct BenchmarkSummary {
  std::string name;
  std::size_t count = 0;
  std::size_t code_count = 0;
  double accuracy_sum = 0.0;
  double code_data_sum = 0.0;

  double accuracy_pct() const;
  double code_usage_pct() const;
  // Mean r_data over Code-path responses; nullopt without any.
  std::optional<double> mean_code_data() const;
};

struct BandSummary {
  std::string label;
  std::size_t count = 0;
  double accuracy_sum = 0.0;

  std::optional<double> accuracy_pct() const;
};

struct EvalSummary {
  std::vector<BenchmarkSummary> benchmarks;  // first-seen order
  // Macro averages over benchmarks; count is the total.
  std::size_t total_count = 0;
  double average_accuracy_pct = 0.0;
  double average_code_usage_pct = 0.0;
  std::optional<double> average_code_data;
  // Code-path responses bucketed by r_data: < 0.6, [0.6, 0.8], > 0.8.
  std::array<BandSummary, 3> bands{BandSummary{"<0.6"}, BandSummary{"0.6-0.8"}, BandSummary{">0.8"}};
  std::size_t skipped = 0;
};

// Reads scored lines; unusable lines are logged and counted in `skipped`.
EvalSummary summarize_scored(std::istream& in, std::ostream& log);
std::string format_summary(const EvalSummary& summary);
std::string summary_to_csv(const EvalSummary& summary);

struct RewardVariant {
  std::string name;
  RewardWeights weights;
};

// full, acc (accuracy + format), data (no decision), decision (no data).
std::optional<RewardVariant> reward_variant(const std::string& name, const RewardWeights& base);

int cmd_score(const std::filesystem::path& input, const std::optional<std::filesystem::path>& config,
              const std::filesystem::path& output, std::ostream& log);
int cmd_eval(const std::filesystem::path& scored, const std::optional<std::filesystem::path>& csv,
             std::ostream& out, std::ostream& log);
int cmd_train_sim(const std::filesystem::path& env_config, const std::filesystem::path& train_config,
                  const std::filesystem::path& out_dir, const std::vector<std::string>& configs,
                  std::ostream& out, std::ostream& log);
int cmd_report(const std::filesystem::path& traces, std::ostream& out, std::ostream& log);

}  // namespace chartrl
