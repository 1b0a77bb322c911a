#include "chartrl/config.hpp"

#include <algorithm>
#include <iterator>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace chartrl {

namespace {

std::string_view trim(std::string_view s) {
  const auto not_space = [](char c) { return c != ' ' && c != '\t' && c != '\r' && c != '\n'; };
  while (!s.empty() && !not_space(s.front())) {
    s.remove_prefix(1);
  }
  while (!s.empty() && !not_space(s.back())) {
    s.remove_suffix(1);
  }
  return s;
}

constexpr std::string_view kKnownKeys[] = {
    "reward.w_acc",
    "reward.w_decision",
    "reward.w_data",
    "reward.w_format",
    "decision.full",
    "decision.partial",
    "decision.wrong",
    "scoring.numeric_answer_tolerance",
    "scoring.format_mode",
    "execution.enabled",
    "execution.interpreter",
    "execution.timeout_seconds",
    "env.n_tasks",
    "env.frac_high",
    "env.p_code_high",
    "env.p_direct_high",
    "env.p_code_low",
    "env.p_direct_low",
    "env.data_fidelity_high",
    "env.data_fidelity_low",
    "env.fidelity_concentration",
    "env.noise_sigma",
    "env.noise_channels",
    "env.table_rows",
    "env.seed",
    "train.group_size",
    "train.clip_epsilon",
    "train.kl_coefficient",
    "train.learning_rate",
    "train.steps",
    "train.batch_tasks_per_step",
    "train.update_epochs",
    "train.seed",
    "train.advantage_std_floor",
    "train.max_theta_norm",
    "train.initial_theta",
};

constexpr std::string_view kGradingPrefix = "grading.";
constexpr std::string_view kGradingSuffix = ".numeric_answer_tolerance";

bool is_grading_key(std::string_view key) {
  return key.size() > kGradingPrefix.size() + kGradingSuffix.size() && key.starts_with(kGradingPrefix) &&
         key.ends_with(kGradingSuffix);
}

bool is_known(std::string_view key) {
  if (is_grading_key(key)) {
    return true;
  }
  return std::find(std::begin(kKnownKeys), std::end(kKnownKeys), key) != std::end(kKnownKeys);
}

double parse_double(const std::string& key, std::string_view text) {
  double value = 0.0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), value);
  if (r.ec != std::errc{} || r.ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw ConfigError("config: " + key + " expects a number, got '" + std::string(text) + "'");
  }
  return value;
}

std::uint64_t parse_unsigned(const std::string& key, std::string_view text) {
  std::uint64_t value = 0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), value);
  if (r.ec != std::errc{} || r.ptr != text.data() + text.size()) {
    throw ConfigError("config: " + key + " expects a non-negative integer, got '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
  KeyValueConfig cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);

    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'section.key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty() || key.find('.') == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": key must be 'section.key'");
    }
    if (!is_known(key)) {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (!cfg.entries_.emplace(key, value).second) {
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot read config file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    return std::nullopt;
  }
  return it->second;
}

double KeyValueConfig::number(const std::string& key, double fallback) const {
  const auto v = get(key);
  return v ? parse_double(key, *v) : fallback;
}

std::size_t KeyValueConfig::count(const std::string& key, std::size_t fallback) const {
  const auto v = get(key);
  return v ? static_cast<std::size_t>(parse_unsigned(key, *v)) : fallback;
}

bool KeyValueConfig::flag(const std::string& key, bool fallback) const {
  const auto v = get(key);
  if (!v) {
    return fallback;
  }
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") {
    return true;
  }
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") {
    return false;
  }
  throw ConfigError("config: " + key + " expects true or false, got '" + *v + "'");
}

double ScoringSettings::tolerance_for(const std::string& benchmark) const {
  const auto it = benchmark_tolerance.find(benchmark);
  return it == benchmark_tolerance.end() ? numeric_answer_tolerance : it->second;
}

namespace {

void read_rewards(const KeyValueConfig& cfg, RewardWeights& w, DecisionRewardParams& d, FormatMode& mode) {
  w.accuracy = cfg.number("reward.w_acc", w.accuracy);
  w.decision = cfg.number("reward.w_decision", w.decision);
  w.data = cfg.number("reward.w_data", w.data);
  w.format = cfg.number("reward.w_format", w.format);
  if (!w.valid()) {
    throw ConfigError("config: reward weights must be non-negative");
  }
  d.full = cfg.number("decision.full", d.full);
  d.partial = cfg.number("decision.partial", d.partial);
  d.wrong = cfg.number("decision.wrong", d.wrong);
  if (!d.valid()) {
    throw ConfigError("config: decision rewards must satisfy 0 <= wrong <= partial <= full <= 1");
  }
  if (const auto m = cfg.get("scoring.format_mode")) {
    if (*m == "strategy_and_boxed") {
      mode = FormatMode::StrategyAndBoxed;
    } else if (*m == "boxed_only") {
      mode = FormatMode::BoxedOnly;
    } else {
      throw ConfigError("config: scoring.format_mode must be strategy_and_boxed or boxed_only");
    }
  }
}

}  // namespace

ScoringSettings scoring_settings_from(const KeyValueConfig& cfg) {
  ScoringSettings s;
  read_rewards(cfg, s.weights, s.decision, s.format_mode);
  s.numeric_answer_tolerance = cfg.number("scoring.numeric_answer_tolerance", s.numeric_answer_tolerance);
  if (s.numeric_answer_tolerance < 0) {
    throw ConfigError("config: scoring.numeric_answer_tolerance must be non-negative");
  }
  for (const auto& [key, value] : cfg.entries()) {
    if (!is_grading_key(key)) {
      continue;
    }
    const std::string benchmark =
        key.substr(kGradingPrefix.size(), key.size() - kGradingPrefix.size() - kGradingSuffix.size());
    const double tol = parse_double(key, value);
    if (tol < 0) {
      throw ConfigError("config: " + key + " must be non-negative");
    }
    s.benchmark_tolerance[benchmark] = tol;
  }
  s.execution.enabled = cfg.flag("execution.enabled", s.execution.enabled);
  if (const auto interp = cfg.get("execution.interpreter")) {
    s.execution.interpreter = *interp;
  }
  s.execution.timeout_seconds = cfg.number("execution.timeout_seconds", s.execution.timeout_seconds);
  if (!(s.execution.timeout_seconds > 0)) {
    throw ConfigError("config: execution.timeout_seconds must be positive");
  }
  return s;
}

EnvConfig env_config_from(const KeyValueConfig& cfg) {
  EnvConfig e;
  e.n_tasks = cfg.count("env.n_tasks", e.n_tasks);
  e.frac_high = cfg.number("env.frac_high", e.frac_high);
  e.high.code = cfg.number("env.p_code_high", e.high.code);
  e.high.direct = cfg.number("env.p_direct_high", e.high.direct);
  e.low.code = cfg.number("env.p_code_low", e.low.code);
  e.low.direct = cfg.number("env.p_direct_low", e.low.direct);
  e.data_fidelity_high = cfg.number("env.data_fidelity_high", e.data_fidelity_high);
  e.data_fidelity_low = cfg.number("env.data_fidelity_low", e.data_fidelity_low);
  e.fidelity_concentration = cfg.number("env.fidelity_concentration", e.fidelity_concentration);
  e.noise_sigma = cfg.number("env.noise_sigma", e.noise_sigma);
  e.noise_channels = cfg.count("env.noise_channels", e.noise_channels);
  e.table_rows = cfg.count("env.table_rows", e.table_rows);
  if (const auto seed = cfg.get("env.seed")) {
    e.seed = parse_unsigned("env.seed", *seed);
  }
  try {
    e.validate();
  } catch (const std::invalid_argument& err) {
    throw ConfigError(std::string("config: ") + err.what());
  }
  return e;
}

TrainConfig train_config_from(const KeyValueConfig& cfg) {
  TrainConfig t;
  t.group_size = cfg.count("train.group_size", t.group_size);
  t.clip_epsilon = cfg.number("train.clip_epsilon", t.clip_epsilon);
  t.kl_coefficient = cfg.number("train.kl_coefficient", t.kl_coefficient);
  t.learning_rate = cfg.number("train.learning_rate", t.learning_rate);
  t.steps = cfg.count("train.steps", t.steps);
  t.batch_tasks_per_step = cfg.count("train.batch_tasks_per_step", t.batch_tasks_per_step);
  t.update_epochs = cfg.count("train.update_epochs", t.update_epochs);
  if (const auto seed = cfg.get("train.seed")) {
    t.seed = parse_unsigned("train.seed", *seed);
  }
  t.advantage_std_floor = cfg.number("train.advantage_std_floor", t.advantage_std_floor);
  t.max_theta_norm = cfg.number("train.max_theta_norm", t.max_theta_norm);
  if (const auto init = cfg.get("train.initial_theta"); init && !init->empty()) {
    std::string_view rest = *init;
    while (true) {
      const std::size_t comma = rest.find(',');
      t.initial_theta.push_back(parse_double("train.initial_theta", trim(rest.substr(0, comma))));
      if (comma == std::string_view::npos) {
        break;
      }
      rest = rest.substr(comma + 1);
    }
  }
  read_rewards(cfg, t.weights, t.decision, t.format_mode);
  try {
    t.validate();
  } catch (const std::invalid_argument& err) {
    throw ConfigError(std::string("config: ") + err.what());
  }
  return t;
}

}  // namespace chartrl
