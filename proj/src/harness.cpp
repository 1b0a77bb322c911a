#include "chartrl/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "chartrl/executor.hpp"
#include "chartrl/grpo.hpp"
#include "chartrl/response_parser.hpp"
#include "chartrl/synthetic_env.hpp"
#include "chartrl/table.hpp"

namespace chartrl {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

const std::string& required_string(const ordered_json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw RecordError(std::string("field '") + key + "' must be a string");
  }
  return it->get_ref<const std::string&>();
}

double required_number(const ordered_json& j, const char* key) {
  if (!j.is_object()) {
    throw RecordError("expected an object");
  }
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    throw RecordError(std::string("field '") + key + "' must be a number");
  }
  return it->get<double>();
}

}  // namespace

RecordLine record_from_json(const ordered_json& j) {
  if (!j.is_object()) {
    throw RecordError("record must be a JSON object");
  }
  RecordLine r;
  r.id = required_string(j, "id");
  r.benchmark = required_string(j, "benchmark");
  r.question = required_string(j, "question");
  r.gold_answer = required_string(j, "gold_answer");
  r.response = required_string(j, "response");
  if (const auto it = j.find("programmability"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) {
      throw RecordError("field 'programmability' must be High or Low");
    }
    r.programmability = programmability_from_string(it->get_ref<const std::string&>());
    if (!r.programmability) {
      throw RecordError("field 'programmability' must be High or Low");
    }
  }
  if (const auto it = j.find("gt_table_csv"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) {
      throw RecordError("field 'gt_table_csv' must be a string");
    }
    r.gt_table_csv = it->get<std::string>();
  }
  return r;
}

ordered_json score_record(const ordered_json& input, const ScoringSettings& settings) {
  const RecordLine rec = record_from_json(input);
  if (!rec.programmability) {
    throw RecordError("field 'programmability' is required for scoring");
  }
  ScoringContext ctx;
  ctx.gold_answer = rec.gold_answer;
  ctx.programmability = *rec.programmability;
  ctx.numeric_answer_tolerance = settings.tolerance_for(rec.benchmark);
  if (rec.gt_table_csv) {
    try {
      ctx.gt_table = parse_csv(*rec.gt_table_csv);
    } catch (const CsvError& err) {
      throw RecordError(std::string("gt_table_csv: ") + err.what());
    }
  }

  const ParsedResponse parsed = parse_response(rec.response);
  RewardBreakdown rb;
  if (settings.execution.enabled && parsed.strategy == Strategy::Code && parsed.code_text &&
      ctx.gt_table) {
    const ExecutionResult exec = execute_chart_data(*parsed.code_text, settings.execution);
    rb = total_reward_with_table(parsed, ctx, exec.table, exec.diagnostic, settings.weights, settings.decision,
                                 settings.format_mode);
  } else {
    rb = total_reward(parsed, ctx, settings.weights, settings.decision, settings.format_mode);
  }

  ordered_json out = input;
  if (parsed.strategy) {
    out["strategy"] = std::string(to_token(*parsed.strategy));
  } else {
    out["strategy"] = nullptr;
  }
  out["rewards"] = ordered_json{{"acc", rb.accuracy},
                                {"decision", rb.decision},
                                {"data", rb.data},
                                {"format", rb.format},
                                {"total", rb.total}};
  out["diagnostic"] = rb.diagnostic;
  return out;
}

ScoreStats score_stream(std::istream& in, std::ostream& out, std::ostream& log, const ScoringSettings& settings) {
  ScoreStats stats;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      const ordered_json j = ordered_json::parse(line);
      ordered_json scored = score_record(j, settings);
      const std::string& id = j.at("id").get_ref<const std::string&>();
      if (!seen_ids.insert(id).second) {
        throw RecordError("duplicate id '" + id + "'");
      }
      out << scored.dump() << '\n';
      ++stats.scored;
    } catch (const std::exception& err) {
      log << "line " << line_no << ": skipped: " << err.what() << '\n';
      ++stats.skipped;
    }
  }
  return stats;
}

double BenchmarkSummary::accuracy_pct() const {
  return count == 0 ? 0.0 : 100.0 * accuracy_sum / static_cast<double>(count);
}

double BenchmarkSummary::code_usage_pct() const {
  return count == 0 ? 0.0 : 100.0 * static_cast<double>(code_count) / static_cast<double>(count);
}

std::optional<double> BenchmarkSummary::mean_code_data() const {
  if (code_count == 0) {
    return std::nullopt;
  }
  return code_data_sum / static_cast<double>(code_count);
}

std::optional<double> BandSummary::accuracy_pct() const {
  if (count == 0) {
    return std::nullopt;
  }
  return 100.0 * accuracy_sum / static_cast<double>(count);
}

EvalSummary summarize_scored(std::istream& in, std::ostream& log) {
  EvalSummary s;
  std::unordered_map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      const ordered_json j = ordered_json::parse(line);
      if (!j.is_object()) {
        throw RecordError("expected an object");
      }
      const std::string& benchmark = required_string(j, "benchmark");
      const auto rewards = j.find("rewards");
      if (rewards == j.end()) {
        throw RecordError("field 'rewards' is missing");
      }
      const double acc = required_number(*rewards, "acc");
      const double data = required_number(*rewards, "data");
      const auto strat = j.find("strategy");
      if (strat == j.end() || !(strat->is_null() || strat->is_string())) {
        throw RecordError("field 'strategy' must be a string or null");
      }
      const bool code = strat->is_string() && strat->get_ref<const std::string&>() == kCodeToken;

      auto [it, inserted] = index.emplace(benchmark, s.benchmarks.size());
      if (inserted) {
        s.benchmarks.push_back(BenchmarkSummary{benchmark});
      }
      BenchmarkSummary& b = s.benchmarks[it->second];
      ++b.count;
      b.accuracy_sum += acc;
      if (code) {
        ++b.code_count;
        b.code_data_sum += data;
        BandSummary& band = data < 0.6 ? s.bands[0] : (data <= 0.8 ? s.bands[1] : s.bands[2]);
        ++band.count;
        band.accuracy_sum += acc;
      }
    } catch (const std::exception& err) {
      log << "line " << line_no << ": skipped: " << err.what() << '\n';
      ++s.skipped;
    }
  }

  double acc_sum = 0.0;
  double usage_sum = 0.0;
  double data_sum = 0.0;
  std::size_t with_code = 0;
  for (const BenchmarkSummary& b : s.benchmarks) {
    s.total_count += b.count;
    acc_sum += b.accuracy_pct();
    usage_sum += b.code_usage_pct();
    if (const auto d = b.mean_code_data()) {
      data_sum += *d;
      ++with_code;
    }
  }
  if (!s.benchmarks.empty()) {
    const auto n = static_cast<double>(s.benchmarks.size());
    s.average_accuracy_pct = acc_sum / n;
    s.average_code_usage_pct = usage_sum / n;
  }
  if (with_code > 0) {
    s.average_code_data = data_sum / static_cast<double>(with_code);
  }
  return s;
}

std::string format_summary(const EvalSummary& s) {
  std::ostringstream os;
  std::size_t width = std::string("benchmark").size();
  for (const BenchmarkSummary& b : s.benchmarks) {
    width = std::max(width, b.name.size());
  }
  width = std::max(width, std::string("Average").size());
  const auto row = [&](const std::string& name, std::size_t count, double acc, double usage,
                       const std::optional<double>& data) {
    os << std::left << std::setw(static_cast<int>(width)) << name << std::right << std::setw(8) << count
       << std::setw(11) << fixed(acc, 1) << std::setw(9) << fixed(usage, 1) << std::setw(10)
       << (data ? fixed(*data, 3) : std::string("-")) << '\n';
  };
  os << std::left << std::setw(static_cast<int>(width)) << "benchmark" << std::right << std::setw(8) << "count"
     << std::setw(11) << "accuracy%" << std::setw(9) << "code%" << std::setw(10) << "r_data" << '\n';
  for (const BenchmarkSummary& b : s.benchmarks) {
    row(b.name, b.count, b.accuracy_pct(), b.code_usage_pct(), b.mean_code_data());
  }
  row("Average", s.total_count, s.average_accuracy_pct, s.average_code_usage_pct, s.average_code_data);
  os << '\n' << std::left << std::setw(10) << "r_data" << std::right << std::setw(8) << "count" << std::setw(11)
     << "accuracy%" << '\n';
  for (const BandSummary& band : s.bands) {
    const auto acc = band.accuracy_pct();
    os << std::left << std::setw(10) << band.label << std::right << std::setw(8) << band.count << std::setw(11)
       << (acc ? fixed(*acc, 1) : std::string("-")) << '\n';
  }
  return os.str();
}

std::string summary_to_csv(const EvalSummary& s) {
  std::ostringstream os;
  const auto opt = [](const std::optional<double>& v) { return v ? shortest(*v) : std::string(); };
  os << "kind,name,count,accuracy_pct,code_usage_pct,mean_r_data_code\n";
  for (const BenchmarkSummary& b : s.benchmarks) {
    os << "benchmark," << b.name << ',' << b.count << ',' << shortest(b.accuracy_pct()) << ','
       << shortest(b.code_usage_pct()) << ',' << opt(b.mean_code_data()) << '\n';
  }
  os << "average,Average," << s.total_count << ',' << shortest(s.average_accuracy_pct) << ','
     << shortest(s.average_code_usage_pct) << ',' << opt(s.average_code_data) << '\n';
  for (const BandSummary& band : s.bands) {
    os << "band," << band.label << ',' << band.count << ',' << opt(band.accuracy_pct()) << ",,\n";
  }
  return os.str();
}

std::optional<RewardVariant> reward_variant(const std::string& name, const RewardWeights& base) {
  RewardVariant v{name, base};
  if (name == "full") {
    return v;
  }
  if (name == "acc") {
    v.weights.decision = 0.0;
    v.weights.data = 0.0;
    return v;
  }
  if (name == "data") {
    v.weights.decision = 0.0;
    return v;
  }
  if (name == "decision") {
    v.weights.data = 0.0;
    return v;
  }
  return std::nullopt;
}

int cmd_score(const fs::path& input, const std::optional<fs::path>& config, const fs::path& output,
              std::ostream& log) {
  ScoringSettings settings;
  if (config) {
    try {
      settings = scoring_settings_from(KeyValueConfig::load(*config));
    } catch (const ConfigError& err) {
      log << "score: " << err.what() << '\n';
      return kExitIoError;
    }
  }
  std::ifstream in(input, std::ios::binary);
  if (!in) {
    log << "score: cannot read " << input.string() << '\n';
    return kExitIoError;
  }
  std::ofstream out(output, std::ios::binary | std::ios::trunc);
  if (!out) {
    log << "score: cannot write " << output.string() << '\n';
    return kExitIoError;
  }
  const ScoreStats stats = score_stream(in, out, log, settings);
  out.flush();
  if (!out) {
    log << "score: write to " << output.string() << " failed\n";
    return kExitIoError;
  }
  log << "score: " << stats.scored << " scored, " << stats.skipped << " skipped\n";
  return stats.scored == 0 ? kExitNoInput : kExitOk;
}

int cmd_eval(const fs::path& scored, const std::optional<fs::path>& csv, std::ostream& out, std::ostream& log) {
  std::ifstream in(scored, std::ios::binary);
  if (!in) {
    log << "eval: cannot read " << scored.string() << '\n';
    return kExitIoError;
  }
  const EvalSummary summary = summarize_scored(in, log);
  if (summary.total_count == 0) {
    log << "eval: no usable scored lines\n";
    return kExitNoInput;
  }
  out << format_summary(summary);
  if (csv) {
    std::ofstream f(*csv, std::ios::binary | std::ios::trunc);
    f << summary_to_csv(summary);
    if (!f) {
      log << "eval: cannot write " << csv->string() << '\n';
      return kExitIoError;
    }
  }
  return kExitOk;
}

namespace {

bool write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  return static_cast<bool>(f);
}

}  // namespace

int cmd_train_sim(const fs::path& env_config, const fs::path& train_config, const fs::path& out_dir,
                  const std::vector<std::string>& configs, std::ostream& out, std::ostream& log) {
  EnvConfig env;
  TrainConfig base;
  try {
    env = env_config_from(KeyValueConfig::load(env_config));
    base = train_config_from(KeyValueConfig::load(train_config));
  } catch (const ConfigError& err) {
    log << "train-sim: " << err.what() << '\n';
    return kExitIoError;
  }
  std::vector<RewardVariant> variants;
  for (const std::string& name : configs) {
    const auto v = reward_variant(name, base.weights);
    if (!v) {
      log << "train-sim: unknown configuration '" << name << "'\n";
      return kExitIoError;
    }
    variants.push_back(*v);
  }
  if (variants.empty()) {
    log << "train-sim: no configurations requested\n";
    return kExitNoInput;
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    log << "train-sim: cannot create " << out_dir.string() << ": " << ec.message() << '\n';
    return kExitIoError;
  }

  std::ostringstream comparison;
  comparison << "config,w_acc,w_decision,w_data,w_format,final_step,final_mean_reward,code_usage_all,"
                "code_usage_high,code_usage_low,theta_norm,collapsed,adaptive\n";
  for (const RewardVariant& v : variants) {
    TrainConfig cfg = base;
    cfg.weights = v.weights;
    TrainingTrace trace;
    try {
      trace = train(env, cfg);
    } catch (const DivergenceError& err) {
      log << "train-sim: configuration '" << v.name << "' diverged: " << err.what() << '\n';
      return kExitDiverged;
    }
    if (!write_file(out_dir / ("trace_" + v.name + ".csv"), trace_to_csv(trace))) {
      log << "train-sim: cannot write trace for '" << v.name << "'\n";
      return kExitIoError;
    }
    const TraceRow& last = trace.rows.back();
    const bool collapsed = last.code_usage_all < 0.05 || last.code_usage_all > 0.95;
    const bool adaptive = last.code_usage_high >= 0.6 && last.code_usage_low <= 0.2;
    comparison << v.name << ',' << shortest(v.weights.accuracy) << ',' << shortest(v.weights.decision) << ','
               << shortest(v.weights.data) << ',' << shortest(v.weights.format) << ',' << last.step << ','
               << shortest(last.mean_reward) << ',' << shortest(last.code_usage_all) << ','
               << shortest(last.code_usage_high) << ',' << shortest(last.code_usage_low) << ','
               << shortest(last.theta_norm) << ',' << (collapsed ? 1 : 0) << ',' << (adaptive ? 1 : 0) << '\n';
    out << std::left << std::setw(10) << v.name << std::right << " step " << last.step << "  reward "
        << fixed(last.mean_reward, 4) << "  code% all " << fixed(100.0 * last.code_usage_all, 1) << " high "
        << fixed(100.0 * last.code_usage_high, 1) << " low " << fixed(100.0 * last.code_usage_low, 1) << '\n';
  }
  if (!write_file(out_dir / "comparison.csv", comparison.str())) {
    log << "train-sim: cannot write comparison.csv\n";
    return kExitIoError;
  }
  return kExitOk;
}

int cmd_report(const fs::path& traces, std::ostream& out, std::ostream& log) {
  std::error_code ec;
  if (!fs::is_directory(traces, ec)) {
    log << "report: " << traces.string() << " is not a directory\n";
    return kExitIoError;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(traces, ec)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("trace_") && name.ends_with(".csv")) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  const std::vector<std::string> wanted = {"step", "mean_reward", "code_usage_all", "code_usage_high",
                                           "code_usage_low", "theta_norm"};
  std::size_t reported = 0;
  std::ostringstream body;
  for (const fs::path& path : files) {
    const std::string name = path.stem().string().substr(6);
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::optional<Table> table;
    try {
      table = parse_csv(buf.str());
    } catch (const CsvError& err) {
      log << "report: " << path.filename().string() << ": " << err.what() << '\n';
      continue;
    }
    if (table->columns() != wanted || table->row_count() == 0) {
      log << "report: " << path.filename().string() << ": not a training trace\n";
      continue;
    }
    const auto& last = table->rows().back();
    const bool numeric = std::all_of(last.begin(), last.end(), [](const Cell& c) { return c.is_number(); });
    if (!numeric) {
      log << "report: " << path.filename().string() << ": non-numeric final row\n";
      continue;
    }
    const auto& first = table->rows().front();
    body << std::left << std::setw(12) << name << std::right << std::setw(7)
         << static_cast<long long>(last[0].as_number()) << std::setw(10) << fixed(first[1].as_number(), 4)
         << std::setw(10) << fixed(last[1].as_number(), 4) << std::setw(9) << fixed(100.0 * last[2].as_number(), 1)
         << std::setw(9) << fixed(100.0 * last[3].as_number(), 1) << std::setw(9)
         << fixed(100.0 * last[4].as_number(), 1) << std::setw(10) << fixed(last[5].as_number(), 3) << '\n';
    ++reported;
  }
  if (reported == 0) {
    log << "report: no training traces in " << traces.string() << '\n';
    return kExitNoInput;
  }
  out << std::left << std::setw(12) << "config" << std::right << std::setw(7) << "steps" << std::setw(10)
      << "reward0" << std::setw(10) << "reward" << std::setw(9) << "code%" << std::setw(9) << "high%"
      << std::setw(9) << "low%" << std::setw(10) << "|theta|" << '\n'
      << body.str();
  return kExitOk;
}

}  // namespace chartrl
