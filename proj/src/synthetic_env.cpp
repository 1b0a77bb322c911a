#include "chartrl/synthetic_env.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace chartrl {

namespace {

constexpr std::array<std::string_view, 8> kCategories = {
    "North", "South", "East", "West", "Central", "Online", "Retail", "Export"};

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), r.ptr);
}

std::string category_name(std::size_t row) {
  if (row < kCategories.size()) {
    return std::string(kCategories[row]);
  }
  return "Group " + std::to_string(row + 1);
}

bool probability(double p) { return p >= 0.0 && p <= 1.0; }

double beta_draw(double mean, double concentration, Rng& rng) {
  if (mean <= 0.0) {
    return 0.0;
  }
  if (mean >= 1.0) {
    return 1.0;
  }
  std::gamma_distribution<double> a(concentration * mean, 1.0);
  std::gamma_distribution<double> b(concentration * (1.0 - mean), 1.0);
  const double x = a(rng);
  const double y = b(rng);
  if (x + y <= 0.0) {
    return mean;
  }
  return std::clamp(x / (x + y), 0.0, 1.0);
}

std::string quoted(std::string_view s) {
  std::string out = "'";
  for (const char c : s) {
    if (c == '\'' || c == '\\') {
      out += '\\';
    }
    out += c;
  }
  out += '\'';
  return out;
}

std::string python_literal(const Cell& cell) {
  if (cell.is_number()) {
    return format_number(cell.as_number());
  }
  if (cell.is_text()) {
    return quoted(cell.as_text());
  }
  return "None";
}

Cell corrupt(const Cell& cell) {
  if (cell.is_number()) {
    return Cell::number(cell.as_number() * 1.5 + 10.0);
  }
  if (cell.is_text()) {
    return Cell::text("wrong " + cell.as_text());
  }
  return Cell::number(-1.0);
}

}  // namespace

void EnvConfig::validate() const {
  if (!probability(frac_high) || !probability(high.code) || !probability(high.direct) ||
      !probability(low.code) || !probability(low.direct) || !probability(data_fidelity_high) ||
      !probability(data_fidelity_low)) {
    throw std::invalid_argument("env: probabilities must lie in [0, 1]");
  }
  if (!(fidelity_concentration > 0.0)) {
    throw std::invalid_argument("env: fidelity_concentration must be positive");
  }
  if (!(noise_sigma >= 0.0)) {
    throw std::invalid_argument("env: noise_sigma must be non-negative");
  }
  if (table_rows == 0) {
    throw std::invalid_argument("env: table_rows must be at least 1");
  }
}

std::vector<SyntheticTask> sample_tasks(const EnvConfig& cfg) {
  cfg.validate();
  std::vector<SyntheticTask> tasks;
  if (cfg.n_tasks == 0) {
    return tasks;
  }
  Rng rng = make_rng(cfg.seed, 0x7a5c);
  const auto n_high = static_cast<std::size_t>(
      std::floor(static_cast<double>(cfg.n_tasks) * cfg.frac_high + 0.5));

  std::vector<Programmability> labels(cfg.n_tasks, Programmability::Low);
  std::fill_n(labels.begin(), std::min(n_high, cfg.n_tasks), Programmability::High);
  std::shuffle(labels.begin(), labels.end(), rng);

  std::normal_distribution<double> gaussian(0.0, 1.0);
  std::uniform_real_distribution<double> magnitude(10.0, 100.0);
  tasks.reserve(cfg.n_tasks);
  for (std::size_t i = 0; i < cfg.n_tasks; ++i) {
    SyntheticTask task;
    task.id = i;
    task.programmability = labels[i];
    const bool high = labels[i] == Programmability::High;
    task.features.push_back(1.0);
    task.features.push_back((high ? 1.0 : -1.0) + cfg.noise_sigma * gaussian(rng));
    for (std::size_t k = 0; k < cfg.noise_channels; ++k) {
      task.features.push_back(gaussian(rng));
    }
    const SuccessProfile& profile = high ? cfg.high : cfg.low;
    task.p_success_code = profile.code;
    task.p_success_direct = profile.direct;
    task.p_data_fidelity_given_code = high ? cfg.data_fidelity_high : cfg.data_fidelity_low;

    std::vector<std::vector<Cell>> rows;
    double best = -1.0;
    for (std::size_t r = 0; r < cfg.table_rows; ++r) {
      const double value = std::round(magnitude(rng) * 10.0) / 10.0;
      best = std::max(best, value);
      rows.push_back({Cell::text(category_name(r)), Cell::number(value)});
    }
    task.gt_table = Table({"category", "value"}, std::move(rows));
    task.gold_answer = format_number(best);
    tasks.push_back(std::move(task));
  }
  return tasks;
}

std::string synthesize_response(const SyntheticTask& task, Strategy strategy, bool answer_correct,
                                std::size_t correct_cells, Rng& rng) {
  std::string answer = task.gold_answer;
  if (!answer_correct) {
    const auto gold = parse_number(task.gold_answer);
    answer = gold ? format_number(*gold * 1.5 + 10.0) : "not " + task.gold_answer;
  }

  if (strategy == Strategy::Direct) {
    return std::string(kDirectToken) +
           "\nReading the chart directly, the largest bar stands out.\n\\boxed{" + answer + "}";
  }

  const Table& gt = task.gt_table;
  const std::size_t n_cells = gt.row_count() * gt.column_count();
  std::vector<std::size_t> order(n_cells);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> keep(n_cells, false);
  for (std::size_t k = 0; k < std::min(correct_cells, n_cells); ++k) {
    keep[order[k]] = true;
  }

  std::string code = "import pandas as pd\n\nchart_data = pd.DataFrame({\n";
  for (std::size_t c = 0; c < gt.column_count(); ++c) {
    code += "    " + quoted(gt.columns()[c]) + ": [";
    for (std::size_t r = 0; r < gt.row_count(); ++r) {
      if (r > 0) {
        code += ", ";
      }
      const Cell& truth = gt.at(r, c);
      code += python_literal(keep[r * gt.column_count() + c] ? truth : corrupt(truth));
    }
    code += "],\n";
  }
  code += "})\nanswer = chart_data['value'].max()\nprint(answer)\n";

  return std::string(kCodeToken) + "\n```python\n" + code + "```\nThe maximum value is \\boxed{" +
         answer + "}.";
}

SimulatedRollout simulate_rollout(const SyntheticTask& task, Strategy strategy, Rng& rng,
                                  double fidelity_concentration) {
  SimulatedRollout out;
  out.task_id = task.id;
  out.strategy = strategy;
  const double p = strategy == Strategy::Code ? task.p_success_code : task.p_success_direct;
  out.answer_correct = std::bernoulli_distribution(p)(rng);

  std::size_t correct_cells = 0;
  if (strategy == Strategy::Code) {
    const std::size_t n_cells = task.gt_table.row_count() * task.gt_table.column_count();
    const double draw = beta_draw(task.p_data_fidelity_given_code, fidelity_concentration, rng);
    correct_cells = static_cast<std::size_t>(std::lround(draw * static_cast<double>(n_cells)));
    out.data_fidelity =
        n_cells > 0 ? static_cast<double>(correct_cells) / static_cast<double>(n_cells) : 0.0;
  }
  out.synthesized_response = synthesize_response(task, strategy, out.answer_correct, correct_cells, rng);
  return out;
}

ScoringContext scoring_context(const SyntheticTask& task) {
  ScoringContext ctx;
  ctx.gold_answer = task.gold_answer;
  ctx.programmability = task.programmability;
  ctx.gt_table = task.gt_table;
  return ctx;
}

}  // namespace chartrl
