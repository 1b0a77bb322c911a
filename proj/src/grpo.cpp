#include "chartrl/grpo.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>

namespace chartrl {

namespace {

// Neumaier-compensated sum.
double accurate_sum(std::span<const double> values) {
  double sum = 0.0;
  double compensation = 0.0;
  for (const double v : values) {
    const double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v)) {
      compensation += (sum - t) + v;
    } else {
      compensation += (v - t) + sum;
    }
    sum = t;
  }
  return sum + compensation;
}

// log(logistic(z)) without overflow.
double log_sigmoid(double z) { return z >= 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z)); }

void require_finite(std::span<const double> theta) {
  for (const double v : theta) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("policy parameters must be finite");
    }
  }
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (const double x : v) {
    s += x * x;
  }
  return std::sqrt(s);
}

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), r.ptr);
}

}  // namespace

double logistic(double z) {
  if (z >= 0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double policy_logit(std::span<const double> theta, std::span<const double> features) {
  if (theta.size() != features.size()) {
    throw std::invalid_argument("theta and feature dimensions differ");
  }
  double z = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    z += theta[i] * features[i];
  }
  return z;
}

double code_probability(std::span<const double> theta, std::span<const double> features) {
  return logistic(policy_logit(theta, features));
}

double log_prob(std::span<const double> theta, std::span<const double> features, Strategy strategy) {
  const double z = policy_logit(theta, features);
  return strategy == Strategy::Code ? log_sigmoid(z) : log_sigmoid(-z);
}

double strategy_kl(std::span<const double> theta, std::span<const double> ref_theta,
                   std::span<const double> features) {
  const double z = policy_logit(theta, features);
  const double z_ref = policy_logit(ref_theta, features);
  const double p = logistic(z);
  return p * (log_sigmoid(z) - log_sigmoid(z_ref)) + (1.0 - p) * (log_sigmoid(-z) - log_sigmoid(-z_ref));
}

void TrainConfig::validate() const {
  if (group_size < 2) {
    throw std::invalid_argument("train: group_size must be at least 2");
  }
  if (!(clip_epsilon > 0.0)) {
    throw std::invalid_argument("train: clip_epsilon must be positive");
  }
  if (!(kl_coefficient >= 0.0)) {
    throw std::invalid_argument("train: kl_coefficient must be non-negative");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("train: learning_rate must be positive");
  }
  if (batch_tasks_per_step == 0 || update_epochs == 0) {
    throw std::invalid_argument("train: batch_tasks_per_step and update_epochs must be positive");
  }
  if (!(advantage_std_floor > 0.0)) {
    throw std::invalid_argument("train: advantage_std_floor must be positive");
  }
  if (!weights.valid()) {
    throw std::invalid_argument("train: reward weights must be non-negative");
  }
  if (!decision.valid()) {
    throw std::invalid_argument("train: decision rewards must satisfy 0 <= wrong <= partial <= full <= 1");
  }
}

std::vector<double> normalize_advantages(std::span<const double> rewards, double std_floor) {
  if (rewards.empty()) {
    throw std::invalid_argument("normalize_advantages: empty group");
  }
  std::vector<double> out(rewards.size(), 0.0);
  if (std::all_of(rewards.begin(), rewards.end(), [&](double r) { return r == rewards.front(); })) {
    return out;
  }
  const auto n = static_cast<double>(rewards.size());
  const double mean = accurate_sum(rewards) / n;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    out[i] = rewards[i] - mean;
  }
  // second centering pass removes the rounding error of the first mean
  const double residual = accurate_sum(out) / n;
  std::vector<double> squares(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    out[i] -= residual;
    squares[i] = out[i] * out[i];
  }
  const double std_dev = std::sqrt(accurate_sum(squares) / n);
  const double scale = std::max(std_dev, std_floor);
  for (double& a : out) {
    a /= scale;
  }
  return out;
}

double surrogate_objective(std::span<const double> theta, std::span<const double> ref_theta,
                           const GroupSample& group, const TrainConfig& cfg) {
  require_finite(theta);
  const std::size_t g = group.rollouts.size();
  std::vector<double> terms(g);
  for (std::size_t i = 0; i < g; ++i) {
    const double ratio = std::exp(log_prob(theta, group.features, group.rollouts[i].strategy) -
                                  group.old_logprobs[i]);
    const double a = group.advantages[i];
    const double clipped = std::clamp(ratio, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon);
    terms[i] = std::min(ratio * a, clipped * a);
  }
  double objective = accurate_sum(terms) / static_cast<double>(g);
  if (cfg.kl_coefficient > 0.0) {
    objective -= cfg.kl_coefficient * strategy_kl(theta, ref_theta, group.features);
  }
  return objective;
}

std::vector<double> surrogate_gradient(std::span<const double> theta,
                                       std::span<const double> ref_theta, const GroupSample& group,
                                       const TrainConfig& cfg) {
  require_finite(theta);
  const std::span<const double> x = group.features;
  const double z = policy_logit(theta, x);
  const double p = logistic(z);
  double dz = 0.0;  // d objective / d logit
  for (std::size_t i = 0; i < group.rollouts.size(); ++i) {
    const Strategy s = group.rollouts[i].strategy;
    const double ratio = std::exp(log_prob(theta, x, s) - group.old_logprobs[i]);
    const double a = group.advantages[i];
    const bool active = a > 0.0 ? ratio < 1.0 + cfg.clip_epsilon : (a < 0.0 && ratio > 1.0 - cfg.clip_epsilon);
    if (active) {
      const double dlogp = s == Strategy::Code ? 1.0 - p : -p;
      dz += a * ratio * dlogp;
    }
  }
  dz /= static_cast<double>(group.rollouts.size());
  if (cfg.kl_coefficient > 0.0) {
    const double z_ref = policy_logit(ref_theta, x);
    dz -= cfg.kl_coefficient * p * (1.0 - p) * (z - z_ref);
  }
  std::vector<double> grad(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    grad[k] = dz * x[k];
  }
  return grad;
}

GroupSample sample_group(const SyntheticTask& task, std::span<const double> old_theta,
                         const TrainConfig& cfg, double fidelity_concentration, Rng& rng) {
  GroupSample group;
  group.task_id = task.id;
  group.features = task.features;
  const double p_code = code_probability(old_theta, task.features);
  const ScoringContext ctx = scoring_context(task);
  std::bernoulli_distribution pick_code(p_code);
  for (std::size_t i = 0; i < cfg.group_size; ++i) {
    const Strategy s = pick_code(rng) ? Strategy::Code : Strategy::Direct;
    SimulatedRollout rollout = simulate_rollout(task, s, rng, fidelity_concentration);
    const ParsedResponse parsed = parse_response(rollout.synthesized_response);
    const RewardBreakdown r = total_reward(parsed, ctx, cfg.weights, cfg.decision, cfg.format_mode);
    group.rewards.push_back(r.total);
    group.old_logprobs.push_back(log_prob(old_theta, task.features, s));
    group.rollouts.push_back(std::move(rollout));
  }
  group.advantages = normalize_advantages(group.rewards, cfg.advantage_std_floor);
  return group;
}

namespace {

TraceRow evaluate(std::size_t step, std::span<const double> theta,
                  const std::vector<SyntheticTask>& tasks, double mean_reward) {
  TraceRow row;
  row.step = step;
  row.mean_reward = mean_reward;
  row.theta_norm = norm(theta);
  double all = 0.0;
  double high = 0.0;
  double low = 0.0;
  std::size_t n_high = 0;
  std::size_t n_low = 0;
  for (const auto& t : tasks) {
    const double p = code_probability(theta, t.features);
    all += p;
    if (t.programmability == Programmability::High) {
      high += p;
      ++n_high;
    } else {
      low += p;
      ++n_low;
    }
  }
  row.code_usage_all = tasks.empty() ? 0.0 : all / static_cast<double>(tasks.size());
  row.code_usage_high = n_high ? high / static_cast<double>(n_high) : 0.0;
  row.code_usage_low = n_low ? low / static_cast<double>(n_low) : 0.0;
  return row;
}

std::vector<GroupSample> sample_batch(std::size_t step, const std::vector<SyntheticTask>& tasks,
                                      std::span<const double> theta, const EnvConfig& env_cfg,
                                      const TrainConfig& cfg) {
  Rng picker = make_rng(cfg.seed, step, 0);
  std::uniform_int_distribution<std::size_t> pick(0, tasks.size() - 1);
  std::vector<std::size_t> chosen(cfg.batch_tasks_per_step);
  for (auto& c : chosen) {
    c = pick(picker);
  }
  std::vector<GroupSample> groups;
  groups.reserve(chosen.size());
  for (std::size_t b = 0; b < chosen.size(); ++b) {
    Rng rng = make_rng(cfg.seed, step, b + 1);
    groups.push_back(sample_group(tasks[chosen[b]], theta, cfg, env_cfg.fidelity_concentration, rng));
  }
  return groups;
}

double batch_mean_reward(const std::vector<GroupSample>& groups) {
  std::vector<double> all;
  for (const auto& g : groups) {
    all.insert(all.end(), g.rewards.begin(), g.rewards.end());
  }
  return all.empty() ? 0.0 : accurate_sum(all) / static_cast<double>(all.size());
}

}  // namespace

TrainingTrace train(const EnvConfig& env_cfg, const TrainConfig& cfg) {
  cfg.validate();
  const std::vector<SyntheticTask> tasks = sample_tasks(env_cfg);
  const std::size_t dim = env_cfg.feature_dim();

  std::vector<double> theta = cfg.initial_theta.empty() ? std::vector<double>(dim, 0.0) : cfg.initial_theta;
  if (theta.size() != dim) {
    throw std::invalid_argument("train: initial_theta has " + std::to_string(theta.size()) +
                                " entries, features have " + std::to_string(dim));
  }
  require_finite(theta);
  const std::vector<double> ref_theta = theta;

  TrainingTrace trace;
  if (tasks.empty()) {
    trace.rows.push_back(evaluate(0, theta, tasks, 0.0));
    trace.final_theta = theta;
    return trace;
  }
  trace.rows.push_back(evaluate(0, theta, tasks, batch_mean_reward(sample_batch(0, tasks, theta, env_cfg, cfg))));

  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    const std::vector<GroupSample> groups = sample_batch(step, tasks, theta, env_cfg, cfg);
    for (std::size_t epoch = 0; epoch < cfg.update_epochs; ++epoch) {
      std::vector<double> grad(dim, 0.0);
      for (const auto& g : groups) {
        const auto gg = surrogate_gradient(theta, ref_theta, g, cfg);
        for (std::size_t k = 0; k < dim; ++k) {
          grad[k] += gg[k];
        }
      }
      for (std::size_t k = 0; k < dim; ++k) {
        theta[k] += cfg.learning_rate * grad[k] / static_cast<double>(groups.size());
      }
    }
    const double n = norm(theta);
    if (!std::isfinite(n) || n > cfg.max_theta_norm) {
      throw DivergenceError("policy diverged at step " + std::to_string(step) + ": |theta| = " +
                            format_number(n) + " exceeds " + format_number(cfg.max_theta_norm));
    }
    trace.rows.push_back(evaluate(step, theta, tasks, batch_mean_reward(groups)));
  }
  trace.final_theta = theta;
  return trace;
}

std::string trace_to_csv(const TrainingTrace& trace) {
  std::string out = "step,mean_reward,code_usage_all,code_usage_high,code_usage_low,theta_norm\n";
  for (const auto& r : trace.rows) {
    out += std::to_string(r.step) + ',' + format_number(r.mean_reward) + ',' +
           format_number(r.code_usage_all) + ',' + format_number(r.code_usage_high) + ',' +
           format_number(r.code_usage_low) + ',' + format_number(r.theta_norm) + '\n';
  }
  return out;
}

}  // namespace chartrl
