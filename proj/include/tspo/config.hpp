#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "tspo/environment.hpp"
#include "tspo/trainer.hpp"

namespace tspo {

// A training run as read from a JSON config file. Train fields sit at the
// top level; the world is either an inline "world" object or a "world_path".
struct RunConfig {
  TrainConfig train;
  WorldConfig world;
  std::string output_dir = "out";
  std::size_t log_every = 10;  // trajectory JSONL sample: every Nth step

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);

// Applies the keys of `j` on top of `base`. Unknown keys raise
// ValidationError naming the key.
TrainConfig apply_train_json(TrainConfig base, const nlohmann::json& j);
RunConfig run_config_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
nlohmann::json read_json_file(const std::string& path);

inline constexpr const char* kMetricsHeader =
    "step,mean_reward,entropy,kl,grad_norm,frac_all_correct,frac_mixed,frac_all_wrong,mean_len,"
    "n_opp,n_omp,n_omm,n_opm";

// Round-trip exact (%.17g) so identical runs give identical bytes.
std::string metrics_csv_row(const StepMetrics& m);
void write_metrics_csv(std::ostream& out, const std::vector<StepMetrics>& rows);

nlohmann::json checkpoint_json(const PolicyParams& params, const RunConfig& config, std::size_t step);
PolicyParams params_from_checkpoint(const nlohmann::json& j);

std::string format_double(double v);

}  // namespace tspo
