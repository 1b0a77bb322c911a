#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "chartrl/response_parser.hpp"
#include "chartrl/reward.hpp"
#include "chartrl/rng.hpp"
#include "chartrl/table.hpp"

namespace chartrl {

struct SuccessProfile {
  double code = 0.0;
  double direct = 0.0;
};

/// Synthetic chart-task generator settings.
///
/// Success probabilities are environment design: code is the better path on
/// high-programmability tasks and the worse one on low-programmability tasks.
struct EnvConfig {
  std::size_t n_tasks = 256;
  double frac_high = 0.5;
  SuccessProfile high{0.9, 0.6};
  SuccessProfile low{0.2, 0.7};
  // Mean fraction of correct cells in the table the code path reconstructs.
  double data_fidelity_high = 0.9;
  double data_fidelity_low = 0.3;
  // Beta concentration (alpha + beta) of the per-rollout fidelity draw.
  double fidelity_concentration = 20.0;
  double noise_sigma = 0.25;
  std::size_t noise_channels = 1;
  std::size_t table_rows = 5;
  std::uint64_t seed = 0;

  std::size_t feature_dim() const { return 2 + noise_channels; }
  // Throws std::invalid_argument.
  void validate() const;
};

struct SyntheticTask {
  std::size_t id = 0;
  Programmability programmability = Programmability::High;
  // [1, +-1 + N(0, sigma^2), N(0,1)...]
  std::vector<double> features;
  double p_success_code = 0.0;
  double p_success_direct = 0.0;
  double p_data_fidelity_given_code = 0.0;
  Table gt_table;
  std::string gold_answer;
};

struct SimulatedRollout {
  std::size_t task_id = 0;
  Strategy strategy = Strategy::Direct;
  bool answer_correct = false;
  // Realised fraction of correct cells in the emitted table; 0 on the direct path.
  double data_fidelity = 0.0;
  std::string synthesized_response;
};

// Deterministic in cfg.seed. round(n * frac_high) tasks are High, in shuffled order.
std::vector<SyntheticTask> sample_tasks(const EnvConfig& cfg);

SimulatedRollout simulate_rollout(const SyntheticTask& task, Strategy strategy, Rng& rng,
                                  double fidelity_concentration = 20.0);

// Protocol-conformant response text. On the code path `correct_cells` of the
// task table's cells are reproduced exactly and the rest are corrupted; the
// boxed answer is the gold answer when `answer_correct`, otherwise a value
// well outside the numeric grading tolerance.
std::string synthesize_response(const SyntheticTask& task, Strategy strategy, bool answer_correct,
                                std::size_t correct_cells, Rng& rng);

ScoringContext scoring_context(const SyntheticTask& task);

}  // namespace chartrl
