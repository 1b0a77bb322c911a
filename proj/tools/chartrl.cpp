#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chartrl/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Adaptive chart-reasoning reward scoring and GRPO simulation"};
  app.require_subcommand(1);

  std::string input, config, output;
  auto* score = app.add_subcommand("score", "Score a JSONL response log");
  score->add_option("--input", input, "RecordLine JSONL file")->required();
  score->add_option("--config", config, "key = value config file");
  score->add_option("--output", output, "Scored JSONL destination")->required();

  std::string scored, csv;
  auto* eval = app.add_subcommand("eval", "Aggregate a scored JSONL file");
  eval->add_option("--scored", scored, "Scored JSONL file")->required();
  eval->add_option("--csv", csv, "Write the summary as CSV");

  std::string env, train, out_dir;
  std::vector<std::string> configs{"full", "acc", "data", "decision"};
  auto* sim = app.add_subcommand("train-sim", "Run GRPO on the synthetic environment");
  sim->add_option("--env", env, "Environment config")->required();
  sim->add_option("--train", train, "Training config")->required();
  sim->add_option("--out", out_dir, "Output directory")->required();
  sim->add_option("--configs", configs, "Reward configurations")->delimiter(',');

  std::string traces;
  auto* report = app.add_subcommand("report", "Summarise training traces");
  report->add_option("--traces", traces, "Directory holding trace_*.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : chartrl::kExitIoError;
  }

  try {
    if (*score) {
      return chartrl::cmd_score(input, config.empty() ? std::nullopt : std::optional<std::filesystem::path>(config),
                                output, std::cerr);
    }
    if (*eval) {
      return chartrl::cmd_eval(scored, csv.empty() ? std::nullopt : std::optional<std::filesystem::path>(csv),
                               std::cout, std::cerr);
    }
    if (*sim) {
      return chartrl::cmd_train_sim(env, train, out_dir, configs, std::cout, std::cerr);
    }
    if (*report) {
      return chartrl::cmd_report(traces, std::cout, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return chartrl::kExitIoError;
  }
  return chartrl::kExitIoError;
}
