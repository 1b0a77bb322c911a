#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "chartrl/reward.hpp"
#include "chartrl/rng.hpp"
#include "chartrl/synthetic_env.hpp"

namespace chartrl {

// Strategy policy: P(Code | x) = logistic(theta . x).
struct PolicyParams {
  std::vector<double> theta;
};

double logistic(double z);
double policy_logit(std::span<const double> theta, std::span<const double> features);
double code_probability(std::span<const double> theta, std::span<const double> features);
double log_prob(std::span<const double> theta, std::span<const double> features, Strategy strategy);
// KL(Bernoulli(p_theta) || Bernoulli(p_ref)) at one feature vector.
double strategy_kl(std::span<const double> theta, std::span<const double> ref_theta,
                   std::span<const double> features);

struct TrainConfig {
  std::size_t group_size = 5;
  double clip_epsilon = 0.2;
  double kl_coefficient = 0.0;
  double learning_rate = 0.05;
  std::size_t steps = 300;
  std::size_t batch_tasks_per_step = 16;
  // Gradient steps per sampled batch; with 1 the clip never binds.
  std::size_t update_epochs = 1;
  std::uint64_t seed = 0;
  double advantage_std_floor = 1e-8;
  double max_theta_norm = 1e6;
  // Empty means all zeros (P(Code) = 0.5 everywhere).
  std::vector<double> initial_theta;

  RewardWeights weights;
  DecisionRewardParams decision;
  FormatMode format_mode = FormatMode::StrategyAndBoxed;

  void validate() const;
};

/// One task's group of G rollouts sampled from the old policy.
struct GroupSample {
  std::size_t task_id = 0;
  std::vector<double> features;
  std::vector<SimulatedRollout> rollouts;
  std::vector<double> rewards;
  std::vector<double> advantages;
  std::vector<double> old_logprobs;
};

// (r - mean) / max(std, std_floor) with population statistics. A constant
// group maps to all zeros. Throws std::invalid_argument on empty input.
std::vector<double> normalize_advantages(std::span<const double> rewards, double std_floor);

// Mean over the group of min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A),
// minus kl_coefficient * KL(pi_theta || pi_ref) at the group's features.
// Throws std::invalid_argument for non-finite theta.
double surrogate_objective(std::span<const double> theta, std::span<const double> ref_theta,
                           const GroupSample& group, const TrainConfig& cfg);

// Analytic gradient of surrogate_objective with respect to theta. On a clip
// boundary the clipped (zero-gradient) branch is taken.
std::vector<double> surrogate_gradient(std::span<const double> theta,
                                       std::span<const double> ref_theta, const GroupSample& group,
                                       const TrainConfig& cfg);

// Draws G strategies from the policy `old_theta`, simulates and scores each
// rollout end to end, and fills rewards, advantages and old log-probs.
GroupSample sample_group(const SyntheticTask& task, std::span<const double> old_theta,
                         const TrainConfig& cfg, double fidelity_concentration, Rng& rng);

struct TraceRow {
  std::size_t step = 0;
  double mean_reward = 0.0;
  double code_usage_all = 0.0;
  double code_usage_high = 0.0;
  double code_usage_low = 0.0;
  double theta_norm = 0.0;
};

struct TrainingTrace {
  std::vector<TraceRow> rows;
  std::vector<double> final_theta;
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Row 0 is the initial policy; row t is the policy after t updates, with the
// mean reward of the batch used for that update. Code usage is the expected
// P(Code) over the task pool. Throws DivergenceError when |theta| exceeds
// cfg.max_theta_norm or becomes non-finite.
TrainingTrace train(const EnvConfig& env_cfg, const TrainConfig& cfg);

// `step,mean_reward,code_usage_all,code_usage_high,code_usage_low,theta_norm`
std::string trace_to_csv(const TrainingTrace& trace);

}  // namespace chartrl
