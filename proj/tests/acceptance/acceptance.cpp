// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status is
// non-zero when any criterion fails. `acceptance N` runs only criterion N.
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "chartrl/code_extractor.hpp"
#include "chartrl/config.hpp"
#include "chartrl/grpo.hpp"
#include "chartrl/harness.hpp"
#include "chartrl/response_parser.hpp"
#include "chartrl/reward.hpp"
#include "chartrl/synthetic_env.hpp"
#include "chartrl/table.hpp"

namespace fs = std::filesystem;
using namespace chartrl;
using nlohmann::ordered_json;

namespace {

const fs::path kSource = CHARTRL_SOURCE_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Scratch {
 public:
  Scratch() {
    static std::atomic<int> n{0};
    path_ = fs::temp_directory_path() / ("chartrl-accept-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

// ---------------------------------------------------------------------------
// Brute-force data-accuracy oracle, written against the scoring rules only.

namespace oracle {

struct Value {
  enum Kind { Num, Str, None } kind = None;
  double num = 0;
  std::string str;
};

std::string norm(const std::string& s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      continue;
    }
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

int edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::vector<int>> dp(a.size() + 1, std::vector<int>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) {
    dp[i][0] = static_cast<int>(i);
  }
  for (std::size_t j = 0; j <= b.size(); ++j) {
    dp[0][j] = static_cast<int>(j);
  }
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      dp[i][j] = std::min({dp[i - 1][j] + 1, dp[i][j - 1] + 1, dp[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
  }
  return dp[a.size()][b.size()];
}

int similarity(const std::string& a, const std::string& b) {
  const int len = static_cast<int>(std::max(a.size(), b.size()));
  if (len == 0) {
    return 100;
  }
  const int num = 100 * (len - edit_distance(a, b));
  int s = num / len;
  if (2 * (num % len) >= len) {
    ++s;
  }
  return s;
}

// Plain optionally-signed decimals, the only numeric texts the generator emits.
bool as_number(const std::string& s, double& out) {
  if (s.empty()) {
    return false;
  }
  std::size_t i = (s[0] == '-') ? 1 : 0;
  bool digits = false, dot = false;
  for (; i < s.size(); ++i) {
    if (std::isdigit(static_cast<unsigned char>(s[i]))) {
      digits = true;
    } else if (s[i] == '.' && !dot) {
      dot = true;
    } else {
      return false;
    }
  }
  if (!digits) {
    return false;
  }
  out = std::stod(s);
  return true;
}

bool same(const Value& p, const Value& g) {
  if (p.kind == Value::None || g.kind == Value::None) {
    return p.kind == g.kind;
  }
  double pn = 0, gn = 0;
  if (p.kind == Value::Str && g.kind == Value::Str) {
    return norm(p.str) == norm(g.str);
  }
  if (p.kind == Value::Num) {
    pn = p.num;
  } else if (!as_number(p.str, pn)) {
    return false;
  }
  if (g.kind == Value::Num) {
    gn = g.num;
  } else if (!as_number(g.str, gn)) {
    return false;
  }
  return std::fabs(pn - gn) <= 0.01 * std::max(std::fabs(gn), 1e-9);
}

struct Frame {
  std::vector<std::string> labels;
  std::vector<std::vector<Value>> rows;  // row-major
};

double score(const Frame& pred, const Frame& gt) {
  if (gt.labels.empty()) {
    return 0.0;
  }
  std::vector<int> owner(pred.labels.size(), -1);
  const std::size_t n = std::min(pred.rows.size(), gt.rows.size());
  int matched = 0;
  double acc_sum = 0.0;
  for (std::size_t g = 0; g < gt.labels.size(); ++g) {
    int best = -1, best_score = -1;
    for (std::size_t p = 0; p < pred.labels.size(); ++p) {
      if (owner[p] >= 0) {
        continue;
      }
      const int s = similarity(norm(gt.labels[g]), norm(pred.labels[p]));
      if (s > best_score) {
        best_score = s;
        best = static_cast<int>(p);
      }
    }
    if (best < 0 || best_score <= 50) {
      continue;
    }
    owner[best] = static_cast<int>(g);
    ++matched;
    int correct = 0;
    for (std::size_t r = 0; r < n; ++r) {
      correct += same(pred.rows[r][best], gt.rows[r][g]) ? 1 : 0;
    }
    acc_sum += n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n);
  }
  const double r_col = static_cast<double>(matched) / static_cast<double>(gt.labels.size());
  const double r_row = pred.rows.size() == gt.rows.size() ? 1.0 : 0.0;
  const double r_values = matched == 0 ? 0.0 : acc_sum / matched;
  return 0.2 * r_col + 0.1 * r_row + 0.7 * r_values;
}

}  // namespace oracle

struct PairGenerator {
  std::mt19937_64 rng;
  explicit PairGenerator(std::uint64_t seed) : rng(seed) {}

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng); }

  std::string base_label() {
    static const std::vector<std::string> words = {"Year",  "Sales",   "Revenue", "Country", "Profit", "Share",
                                                   "Month", "Region",  "Count",   "Value",   "Cost",   "Units",
                                                   "Q1",    "Q2",      "Growth",  "Total Sales", "Market share"};
    return words[static_cast<std::size_t>(uniform(0, static_cast<int>(words.size()) - 1))];
  }

  std::string perturb_label(std::string s) {
    const int edits = uniform(0, 4);
    for (int e = 0; e < edits; ++e) {
      const int op = uniform(0, 5);
      const auto pos = static_cast<std::size_t>(uniform(0, static_cast<int>(s.size())));
      const char c = static_cast<char>('a' + uniform(0, 25));
      if (op == 0 && pos < s.size()) {
        s[pos] = c;
      } else if (op == 1) {
        s.insert(pos, 1, c);
      } else if (op == 2 && pos < s.size()) {
        s.erase(pos, 1);
      } else if (op == 3) {
        s.insert(pos, 1, ' ');
      } else if (op == 4) {
        for (char& ch : s) {
          ch = static_cast<char>(chance(0.5) ? std::toupper(static_cast<unsigned char>(ch))
                                             : std::tolower(static_cast<unsigned char>(ch)));
        }
      } else {
        s = base_label();
      }
    }
    return s;
  }

  oracle::Value random_value() {
    oracle::Value v;
    switch (uniform(0, 5)) {
      case 0:
      case 1:
        v.kind = oracle::Value::Num;
        v.num = std::round(std::uniform_real_distribution<double>(-1000, 1000)(rng) * 100) / 100;
        break;
      case 2:
        v.kind = oracle::Value::Num;
        v.num = uniform(-20, 20);
        break;
      case 3: {
        static const std::vector<std::string> words = {"North", "south", "East Asia", "US", "Other", "n/a"};
        v.kind = oracle::Value::Str;
        v.str = words[static_cast<std::size_t>(uniform(0, static_cast<int>(words.size()) - 1))];
        break;
      }
      case 4:
        v.kind = oracle::Value::Str;
        v.str = std::to_string(uniform(-50, 50));
        break;
      default:
        v.kind = oracle::Value::None;
        break;
    }
    return v;
  }

  oracle::Value perturb_value(const oracle::Value& g) {
    oracle::Value v = g;
    switch (uniform(0, 7)) {
      case 0:
      case 1:
      case 2:
        break;
      case 3:
        if (v.kind == oracle::Value::Num) {
          // inside or outside the 1% band, occasionally right next to its edge
          const double f = chance(0.5) ? std::uniform_real_distribution<double>(-0.009, 0.009)(rng)
                                       : std::uniform_real_distribution<double>(0.02, 0.5)(rng);
          v.num = g.num * (1 + f) + (g.num == 0 ? f : 0);
        } else if (v.kind == oracle::Value::Str) {
          v.str = chance(0.5) ? " " + g.str + " " : g.str + "x";
        }
        break;
      case 4:
        if (g.kind == oracle::Value::Num && g.num == std::round(g.num)) {
          v.kind = oracle::Value::Str;
          v.str = std::to_string(static_cast<long long>(g.num));
        } else if (g.kind == oracle::Value::Str) {
          double x = 0;
          if (oracle::as_number(g.str, x)) {
            v.kind = oracle::Value::Num;
            v.num = x;
          }
        }
        break;
      case 5:
        v.kind = oracle::Value::None;
        break;
      default:
        v = random_value();
        break;
    }
    return v;
  }

  std::pair<oracle::Frame, oracle::Frame> next() {
    oracle::Frame gt, pred;
    const int gcols = uniform(1, 6);
    const int grows = uniform(0, 10);
    for (int c = 0; c < gcols; ++c) {
      gt.labels.push_back(base_label() + (chance(0.3) ? std::to_string(c) : ""));
    }
    for (int r = 0; r < grows; ++r) {
      std::vector<oracle::Value> row;
      for (int c = 0; c < gcols; ++c) {
        row.push_back(random_value());
      }
      gt.rows.push_back(row);
    }

    std::vector<int> source;  // gt column index or -1 for an invented column
    for (int c = 0; c < gcols; ++c) {
      if (chance(0.8)) {
        source.push_back(c);
      }
    }
    for (int extra = uniform(0, 2); extra > 0; --extra) {
      source.push_back(-1);
    }
    if (source.empty()) {
      source.push_back(-1);
    }
    std::shuffle(source.begin(), source.end(), rng);
    for (int s : source) {
      std::string label = s >= 0 ? perturb_label(gt.labels[static_cast<std::size_t>(s)]) : base_label();
      while (std::find(pred.labels.begin(), pred.labels.end(), label) != pred.labels.end()) {
        label += "_";
      }
      pred.labels.push_back(label);
    }
    const int prows = chance(0.7) ? grows : uniform(0, 10);
    for (int r = 0; r < prows; ++r) {
      std::vector<oracle::Value> row;
      for (int s : source) {
        if (s >= 0 && r < grows) {
          row.push_back(perturb_value(gt.rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)]));
        } else {
          row.push_back(random_value());
        }
      }
      pred.rows.push_back(row);
    }
    return {pred, gt};
  }
};

std::string py_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string py_value(const oracle::Value& v, std::mt19937_64& rng) {
  static const std::vector<std::string> missing = {"nan", "np.nan", "None", "math.nan", "NaN", "numpy.NAN"};
  switch (v.kind) {
    case oracle::Value::Num:
      return py_number(v.num);
    case oracle::Value::Str: {
      const char q = std::bernoulli_distribution(0.5)(rng) ? '\'' : '"';
      std::string out(1, q);
      for (char c : v.str) {
        if (c == q || c == '\\') {
          out += '\\';
        }
        out += c;
      }
      return out + q;
    }
    default:
      return missing[std::uniform_int_distribution<std::size_t>(0, missing.size() - 1)(rng)];
  }
}

std::string as_code(const oracle::Frame& f, std::mt19937_64& rng) {
  std::string code = "import pandas as pd\nimport numpy as np\n";
  oracle::Value label;
  label.kind = oracle::Value::Str;
  if (std::bernoulli_distribution(0.7)(rng)) {
    code += "chart_data = pd.DataFrame({";
    for (std::size_t c = 0; c < f.labels.size(); ++c) {
      label.str = f.labels[c];
      code += (c ? ",\n    " : "\n    ") + py_value(label, rng) + ": [";
      for (std::size_t r = 0; r < f.rows.size(); ++r) {
        code += (r ? ", " : "") + py_value(f.rows[r][c], rng);
      }
      code += "]";
    }
    code += "\n})\n";
  } else {
    code += "chart_data = pd.DataFrame(data=[";
    for (std::size_t r = 0; r < f.rows.size(); ++r) {
      code += r ? ", [" : "[";
      for (std::size_t c = 0; c < f.labels.size(); ++c) {
        code += (c ? ", " : "") + py_value(f.rows[r][c], rng);
      }
      code += "]";
    }
    code += "], columns=[";
    for (std::size_t c = 0; c < f.labels.size(); ++c) {
      label.str = f.labels[c];
      code += (c ? ", " : "") + py_value(label, rng);
    }
    code += "])\n";
  }
  return code;
}

Table as_table(const oracle::Frame& f) {
  std::vector<std::vector<Cell>> rows;
  for (const auto& r : f.rows) {
    std::vector<Cell> row;
    for (const auto& v : r) {
      row.push_back(v.kind == oracle::Value::Num   ? Cell::number(v.num)
                    : v.kind == oracle::Value::Str ? Cell::text(v.str)
                                                   : Cell::missing());
    }
    rows.push_back(row);
  }
  return Table(f.labels, rows);
}

Outcome criterion_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  PairGenerator gen(2024);
  std::mt19937_64 text_rng(7);
  double worst = 0.0;
  int mismatches = 0;
  int partial = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto [pred, gt] = gen.next();
    ScoringContext ctx;
    ctx.gold_answer = "0";
    ctx.gt_table = as_table(gt);
    const ParsedResponse resp =
        parse_response("<CODE>\n```python\n" + as_code(pred, text_rng) + "```\n\\boxed{0}");
    const DataScore got = data_accuracy_reward(resp, ctx);
    const double want = oracle::score(pred, gt);
    const double diff = std::fabs(got.value - want);
    worst = std::max(worst, diff);
    if (!(diff < 1e-9)) {
      ++mismatches;
      if (mismatches <= 3) {
        std::cerr << "  pair " << i << ": got " << got.value << " want " << want << " ("
                  << got.report.diagnostic << ")\n";
      }
    }
    partial += (want > 0.0 && want < 1.0) ? 1 : 0;
  }
  const double elapsed = seconds_since(t0);
  return {mismatches == 0 && elapsed < 10.0,
          "1000 pairs, " + std::to_string(partial) + " with partial credit, max |diff| " + py_number(worst) + ", " +
              fmt(elapsed) + " s"};
}

// ---------------------------------------------------------------------------

Outcome criterion_exact_totals() {
  ScoringContext high;
  high.gold_answer = "15";
  high.programmability = Programmability::High;
  high.gt_table = parse_csv("Year,Sales\n2019,10.5\n2020,12\n2021,15\n");
  const RewardBreakdown code = total_reward(
      parse_response("<CODE>\n```python\nimport pandas as pd\nchart_data = pd.DataFrame({'Year': [2019, 2020, "
                     "2021], 'Sales': [10.5, 12, 15]})\n```\nThe latest value is \\boxed{15}."),
      high);
  ScoringContext low;
  low.gold_answer = "7";
  low.programmability = Programmability::Low;
  const RewardBreakdown direct = total_reward(parse_response("<DIRECT>\nThe tallest bar reads \\boxed{7}"), low);
  return {code.total == 1.3 && direct.total == 1.15,
          "code total " + py_number(code.total) + ", direct total " + py_number(direct.total)};
}

Outcome criterion_advantages() {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_int_distribution<int> lattice(0, 26);
  double worst_mean = 0.0, worst_std = 0.0;
  int groups = 0;
  while (groups < 10000) {
    std::vector<double> r(5);
    const int mode = groups % 3;
    for (double& v : r) {
      // continuous, reward-lattice (multiples of 0.05 in [0, 1.3]), or tightly clustered
      v = mode == 0 ? u(rng) : (mode == 1 ? 0.05 * lattice(rng) : 1.0 + 1e-6 * u(rng));
    }
    if (std::all_of(r.begin(), r.end(), [&](double x) { return x == r[0]; })) {
      continue;
    }
    const auto a = normalize_advantages(r, 1e-8);
    double mean = 0.0;
    for (double x : a) {
      mean += x;
    }
    mean /= 5.0;
    double var = 0.0;
    for (double x : a) {
      var += (x - mean) * (x - mean);
    }
    worst_mean = std::max(worst_mean, std::fabs(mean));
    worst_std = std::max(worst_std, std::fabs(std::sqrt(var / 5.0) - 1.0));
    ++groups;
  }
  bool constant_ok = true;
  for (double c : {0.0, 0.35, 1.15, 1.3, -2.0}) {
    constant_ok &= normalize_advantages(std::vector<double>(5, c), 1e-8) == std::vector<double>(5, 0.0);
  }
  const auto example = normalize_advantages(std::vector<double>{1, 0, 0, 0, 0}, 1e-8);
  const bool example_ok = example == std::vector<double>{2.0, -0.5, -0.5, -0.5, -0.5};
  return {worst_mean < 1e-12 && worst_std < 1e-12 && constant_ok && example_ok,
          "10000 groups, max |mean| " + py_number(worst_mean) + ", max |std-1| " + py_number(worst_std) +
              ", constant groups " + (constant_ok ? "zero" : "NOT zero") + ", [1,0,0,0,0] " +
              (example_ok ? "exact" : "inexact")};
}

Outcome criterion_gradient() {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> n(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  TrainConfig cfg;
  const double h = 1e-5;
  double worst = 0.0;
  int points = 0;
  while (points < 100) {
    GroupSample g;
    g.features = {1.0, (coin(rng) ? 1.0 : -1.0) + 0.25 * n(rng), n(rng)};
    std::vector<double> old = {0.5 * n(rng), n(rng), 0.5 * n(rng)};
    std::vector<double> theta = old;
    for (double& t : theta) {
      t += 0.1 * n(rng);
    }
    for (int i = 0; i < 5; ++i) {
      SimulatedRollout r;
      r.strategy = coin(rng) ? Strategy::Code : Strategy::Direct;
      g.rollouts.push_back(r);
      g.rewards.push_back(0.05 * std::floor(27 * std::uniform_real_distribution<double>(0, 1)(rng)));
      g.old_logprobs.push_back(log_prob(old, g.features, r.strategy));
    }
    g.advantages = normalize_advantages(g.rewards, cfg.advantage_std_floor);
    bool off_boundary = true;
    for (int i = 0; i < 5; ++i) {
      const double ratio = std::exp(log_prob(theta, g.features, g.rollouts[i].strategy) - g.old_logprobs[i]);
      off_boundary &= std::fabs(ratio - (1 + cfg.clip_epsilon)) > 1e-3 && std::fabs(ratio - (1 - cfg.clip_epsilon)) > 1e-3;
    }
    const auto grad = surrogate_gradient(theta, theta, g, cfg);
    double gnorm = 0.0;
    for (double x : grad) {
      gnorm += x * x;
    }
    if (!off_boundary || std::sqrt(gnorm) < 1e-3) {
      continue;
    }
    double diff = 0.0, fnorm = 0.0;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      auto hi = theta, lo = theta;
      hi[k] += h;
      lo[k] -= h;
      const double fd = (surrogate_objective(hi, hi, g, cfg) - surrogate_objective(lo, lo, g, cfg)) / (2 * h);
      diff += (fd - grad[k]) * (fd - grad[k]);
      fnorm += fd * fd;
    }
    worst = std::max(worst, std::sqrt(diff) / std::max(std::sqrt(gnorm), std::sqrt(fnorm)));
    ++points;
  }

  TrainConfig with_kl = cfg;
  with_kl.kl_coefficient = 0.1;
  bool kl_zero = true;
  for (int i = 0; i < 100; ++i) {
    GroupSample g;
    g.features = {1.0, n(rng), n(rng)};
    const std::vector<double> theta = {n(rng), n(rng), n(rng)};
    for (int k = 0; k < 5; ++k) {
      SimulatedRollout r;
      r.strategy = coin(rng) ? Strategy::Code : Strategy::Direct;
      g.rollouts.push_back(r);
      g.rewards.push_back(n(rng));
      g.old_logprobs.push_back(log_prob(theta, g.features, r.strategy) + 0.1 * n(rng));
    }
    g.advantages = normalize_advantages(g.rewards, cfg.advantage_std_floor);
    kl_zero &= surrogate_objective(theta, theta, g, cfg) == surrogate_objective(theta, theta, g, with_kl);
    kl_zero &= surrogate_gradient(theta, theta, g, cfg) == surrogate_gradient(theta, theta, g, with_kl);
  }
  return {worst < 1e-5 && kl_zero, "100 points, max relative error " + py_number(worst) +
                                       ", KL contribution at the reference policy " + (kl_zero ? "exactly 0" : "non-zero")};
}

Outcome criterion_mode_collapse() {
  const auto t0 = std::chrono::steady_clock::now();
  const RewardWeights base;
  int collapsed = 0, adaptive = 0;
  std::ostringstream acc_usage, full_split;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EnvConfig env;
    env.seed = seed;
    TrainConfig cfg;
    cfg.seed = seed;

    cfg.weights = reward_variant("acc", base)->weights;
    const TraceRow acc = train(env, cfg).rows.back();
    collapsed += (acc.code_usage_all < 0.05 || acc.code_usage_all > 0.95) ? 1 : 0;
    acc_usage << (seed ? " " : "") << fmt(100 * acc.code_usage_all, 1);

    cfg.weights = reward_variant("full", base)->weights;
    const TraceRow full = train(env, cfg).rows.back();
    adaptive += (full.code_usage_high >= 0.6 && full.code_usage_low <= 0.2) ? 1 : 0;
    full_split << (seed ? " " : "") << fmt(100 * full.code_usage_high, 1) << "/" << fmt(100 * full.code_usage_low, 1);
  }
  const double elapsed = seconds_since(t0);
  return {collapsed >= 8 && adaptive >= 8 && elapsed < 120.0,
          "acc+format collapsed in " + std::to_string(collapsed) + "/10 seeds (overall code% " + acc_usage.str() +
              "); full reward adaptive in " + std::to_string(adaptive) + "/10 (high/low code% " + full_split.str() +
              "); " + fmt(elapsed, 1) + " s"};
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  for (char c : line) {
    if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

Outcome criterion_banded_accuracy() {
  Scratch dir;
  EnvConfig env;
  env.n_tasks = 200;
  env.frac_high = 1.0;
  env.seed = 3;
  const auto tasks = sample_tasks(env);
  Rng rng = make_rng(3, 6);
  std::uniform_int_distribution<std::size_t> cells(0, 2 * env.table_rows);
  {
    std::ofstream out(dir / "banded.jsonl", std::ios::binary);
    std::size_t id = 0;
    for (int rep = 0; rep < 15; ++rep) {
      for (const auto& task : tasks) {
        const std::size_t n_cells = task.gt_table.row_count() * task.gt_table.column_count();
        const std::size_t k = std::min(cells(rng), n_cells);
        const double fidelity = static_cast<double>(k) / static_cast<double>(n_cells);
        // correctness probability rises with the fraction of correct cells
        const bool correct = std::bernoulli_distribution(0.15 + 0.8 * fidelity)(rng);
        ordered_json j{{"id", "b" + std::to_string(id++)},
                       {"benchmark", "synthetic"},
                       {"question", "What is the largest value?"},
                       {"gold_answer", task.gold_answer},
                       {"programmability", "High"},
                       {"gt_table_csv", render_csv(task.gt_table)},
                       {"response", synthesize_response(task, Strategy::Code, correct, k, rng)}};
        out << j.dump() << '\n';
      }
    }
  }
  std::ostringstream log, table;
  if (cmd_score(dir / "banded.jsonl", std::nullopt, dir / "banded_scored.jsonl", log) != 0 ||
      cmd_eval(dir / "banded_scored.jsonl", dir / "banded.csv", table, log) != 0) {
    return {false, "pipeline failed: " + log.str()};
  }
  std::vector<double> acc;
  std::vector<std::string> counts;
  std::istringstream csv(slurp(dir / "banded.csv"));
  std::string line;
  while (std::getline(csv, line)) {
    const auto f = split_csv_line(line);
    if (f[0] == "band") {
      counts.push_back(f[2]);
      acc.push_back(f[3].empty() ? std::nan("") : std::stod(f[3]));
    }
  }
  const bool ok = acc.size() == 3 && acc[0] < acc[1] && acc[1] < acc[2];
  std::string detail = "band accuracy";
  const char* labels[] = {"<0.6", "0.6-0.8", ">0.8"};
  for (std::size_t i = 0; i < acc.size(); ++i) {
    detail += std::string(i ? ", " : " ") + labels[i] + " " + fmt(acc[i], 1) + "% (n=" + counts[i] + ")";
  }
  return {ok, detail};
}

Outcome criterion_golden() {
  Scratch dir;
  const fs::path fixtures = kSource / "tests" / "fixtures";
  const fs::path config = kSource / "configs" / "default.conf";
  std::ostringstream log;
  std::string scored[2], tables[2], csvs[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path out = dir / ("scored" + std::to_string(run) + ".jsonl");
    const fs::path csv = dir / ("eval" + std::to_string(run) + ".csv");
    std::ostringstream table;
    if (cmd_score(fixtures / "golden_input.jsonl", config, out, log) != 0 || cmd_eval(out, csv, table, log) != 0) {
      return {false, "pipeline failed: " + log.str()};
    }
    scored[run] = slurp(out);
    tables[run] = table.str();
    csvs[run] = slurp(csv);
  }
  const bool identical = scored[0] == scored[1] && tables[0] == tables[1] && csvs[0] == csvs[1];

  std::istringstream got(scored[0]);
  std::istringstream want(slurp(fixtures / "golden_expected.jsonl"));
  std::string g, w;
  int lines = 0, wrong = 0;
  while (std::getline(want, w)) {
    ++lines;
    const auto e = ordered_json::parse(w);
    if (!std::getline(got, g)) {
      ++wrong;
      continue;
    }
    const auto s = ordered_json::parse(g);
    if (s["id"] != e["id"] || s["strategy"] != e["strategy"] || s["rewards"] != e["rewards"]) {
      ++wrong;
      std::cerr << "  " << e["id"] << ": got " << s["rewards"].dump() << " want " << e["rewards"].dump() << '\n';
    }
  }
  const bool extra = static_cast<bool>(std::getline(got, g));
  const bool eval_match = csvs[0] == slurp(fixtures / "golden_eval.csv");
  return {identical && lines == 50 && wrong == 0 && !extra && eval_match,
          std::to_string(lines) + " lines, " + std::to_string(wrong) + " reward mismatches, two runs " +
              (identical ? "byte-identical" : "DIFFER") + ", eval summary " +
              (eval_match ? "matches expectation" : "DIFFERS from expectation")};
}

std::vector<std::string> fuzz_corpus(const fs::path& sentinel, std::size_t count) {
  const std::string s = sentinel.string();
  const std::vector<std::string> seeds = {
      "chart_data = pd.DataFrame({'a': [1, 2], 'b': ['x', 'y']})",
      "chart_data = pd.DataFrame(data=[[1, 2]], columns=['a', 'b'])",
      "import os\nos.system('touch " + s + "')\nchart_data = pd.DataFrame({'a': [1]})",
      "chart_data = pd.DataFrame({'a': [__import__('os').system('touch " + s + "')]})",
      "open('" + s + "', 'w').write('x')\nchart_data = DF({'a': [1]})",
      "chart_data = pd.DataFrame({'a': [exec(\"open('" + s + "','w')\")]})",
      "import subprocess; subprocess.run(['touch', '" + s + "'])",
      "while True:\n    pass\nchart_data = DF({'a': [1]})",
      "def f():\n    return f()\nf()\nchart_data = DF({'a': [f()]})",
      "chart_data = pd.DataFrame({'a': [1e999999, -0x1f, 0b101, 1_000, 3j]})",
      "chart_data = pd.DataFrame({'a': ['''multi\nline''', r'raw\\', b'bytes', f'{x}']})",
      "chart_data: 'pd.DataFrame' = pd.DataFrame({\\\n 'a': [1,\\\n 2]})",
      "chart_data = pd.DataFrame()\nchart_data['a'] = [1]",
      "chart_data = pd.DataFrame({'a': [1, nan, None, np.nan, x.NaN]}, index=[1, 2, 3, 4, 5])",
      "chart_data = lambda: 0",
      "chart_data = [[[[[[[[[[[[[[[[[[[[[[[[[[[[[",
      "chart_data = DF({'a': '" + std::string(5000, 'a') + "'})",
      "chart_data = DF({" + std::string(3000, '{') + "})",
      "chart_data = DF(" + std::string(3000, '(') + ")",
      "chart_data=DF({'a':[1,2,3]})#\xff\xfe\xfd invalid utf8",
  };
  const std::string noise = "()[]{}'\"\\,:=.#\n\t abcxyz019_-+*/@!$%^&`<>|~;";
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> pick_seed(0, seeds.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_noise(0, noise.size() - 1);
  std::uniform_int_distribution<int> op(0, 9);
  std::vector<std::string> corpus;
  corpus.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string code = seeds[pick_seed(rng)];
    const int mutations = static_cast<int>(i % 12);
    for (int m = 0; m < mutations && !code.empty(); ++m) {
      const std::size_t pos = std::uniform_int_distribution<std::size_t>(0, code.size() - 1)(rng);
      switch (op(rng)) {
        case 0:
          code.erase(pos, 1);
          break;
        case 1:
          code.insert(pos, 1, noise[pick_noise(rng)]);
          break;
        case 2:
          code[pos] = noise[pick_noise(rng)];
          break;
        case 3:
          code.insert(pos, seeds[pick_seed(rng)]);
          break;
        case 4:
          code = code.substr(0, pos);
          break;
        case 5:
          code.insert(pos, std::string(std::uniform_int_distribution<std::size_t>(1, 400)(rng), noise[pick_noise(rng)]));
          break;
        case 6:
          code[pos] = static_cast<char>(std::uniform_int_distribution<int>(0, 255)(rng));
          break;
        default:
          code.insert(pos, "```");
          break;
      }
    }
    std::string raw;
    switch (i % 5) {
      case 0:
        raw = code;
        break;
      case 1:
        raw = "<CODE>\n```python\n" + code + "\n```\n\\boxed{" + std::to_string(i) + "}";
        break;
      case 2:
        raw = "<CODE>\n```\n" + code + "\n```\n```py\n" + code + "\n```\\boxed{\\boxed{" + code;
        break;
      case 3:
        raw = "<DIRECT>" + std::string(i % 97, '{') + "\\boxed{" + code + std::string(i % 89, '}');
        break;
      default:
        raw = "```" + code;
        break;
    }
    corpus.push_back(std::move(raw));
  }
  return corpus;
}

Outcome criterion_fuzz() {
  Scratch dir;
  const fs::path sentinel = dir / "sentinel_touched";
  const auto corpus = fuzz_corpus(sentinel, 10000);
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t crashes = 0, over_budget = 0, tables = 0;
  const ExtractionLimits limits;
  for (const std::string& raw : corpus) {
    try {
      const ParsedResponse r = parse_response(raw);
      for (const std::string* code : {&raw, r.code_text ? &*r.code_text : nullptr}) {
        if (code == nullptr) {
          continue;
        }
        const ExtractionResult e = extract_table_from_code(*code, limits);
        over_budget += e.steps > limits.budget(code->size()) ? 1 : 0;
        crashes += (e.table.has_value() == !e.diagnostic.empty()) ? 1 : 0;
        tables += e.table ? 1 : 0;
      }
    } catch (...) {
      ++crashes;
    }
  }
  const double elapsed = seconds_since(t0);
  const bool side_effect = fs::exists(sentinel);
  return {crashes == 0 && over_budget == 0 && !side_effect,
          std::to_string(corpus.size()) + " cases, " + std::to_string(crashes) + " crashes, " +
              std::to_string(over_budget) + " over step budget, " + std::to_string(tables) + " tables extracted, " +
              (side_effect ? "sentinel file CREATED" : "no side effects") + ", " + fmt(elapsed) + " s"};
}

}  // namespace

int main(int argc, char** argv) {
  using Check = std::pair<const char*, std::function<Outcome()>>;
  const std::vector<Check> checks = {
      {"data-accuracy score equals brute-force oracle", criterion_oracle},
      {"weighted total exactness", criterion_exact_totals},
      {"group advantage normalization", criterion_advantages},
      {"clipped surrogate gradient check", criterion_gradient},
      {"reward ablation: collapse vs adaptive usage", criterion_mode_collapse},
      {"r_data-banded accuracy increases", criterion_banded_accuracy},
      {"golden pipeline", criterion_golden},
      {"parser robustness fuzz", criterion_fuzz},
  };
  int only = 0;
  if (argc > 1) {
    only = std::atoi(argv[1]);
  }
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    if (only != 0 && static_cast<int>(i) + 1 != only) {
      continue;
    }
    Outcome o;
    try {
      o = checks[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << i + 1 << ": " << checks[i].first << " | "
              << o.detail << std::endl;
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
