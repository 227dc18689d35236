#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tspo/config.hpp"

namespace tspo::cli {

enum ExitCode : int {
  kOk = 0,
  kValidation = 1,
  kIo = 2,
  kCheckFailed = 3,
};

// Entry point shared by the tspo binary and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct RunArtifacts {
  std::vector<StepMetrics> metrics;
  PolicyParams params;
};

// Trains and writes metrics.csv, trajectories.jsonl, checkpoint.json (and
// advantages.jsonl when log_advantages is set) under config.output_dir.
RunArtifacts run_training(const RunConfig& config, bool log_advantages, ExecutionMode mode,
                          std::ostream& log);

// Mean of mean_reward over the last min(10, n) steps.
double final_mean_reward(const std::vector<StepMetrics>& metrics);
// Sum of mean_reward over all steps divided by their count.
double reward_auc(const std::vector<StepMetrics>& metrics);

}  // namespace tspo::cli
