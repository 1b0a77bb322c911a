#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "chartrl/executor.hpp"
#include "chartrl/grpo.hpp"
#include "chartrl/reward.hpp"
#include "chartrl/synthetic_env.hpp"

namespace chartrl {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `section.key = value` settings. `#` starts a comment; blank lines are
/// ignored. Duplicate keys and unknown keys are errors.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text);
  static KeyValueConfig load(const std::filesystem::path& path);

  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

  double number(const std::string& key, double fallback) const;
  std::size_t count(const std::string& key, std::size_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;

 private:
  std::map<std::string, std::string> entries_;
};

struct ScoringSettings {
  RewardWeights weights;
  DecisionRewardParams decision;
  FormatMode format_mode = FormatMode::StrategyAndBoxed;
  double numeric_answer_tolerance = 0.05;
  // grading.<benchmark>.numeric_answer_tolerance
  std::map<std::string, double> benchmark_tolerance;
  ExecutionSettings execution;

  double tolerance_for(const std::string& benchmark) const;
};

ScoringSettings scoring_settings_from(const KeyValueConfig& cfg);
EnvConfig env_config_from(const KeyValueConfig& cfg);
// Also reads the reward.*, decision.* and scoring.format_mode keys.
TrainConfig train_config_from(const KeyValueConfig& cfg);

}  // namespace chartrl
