#include "tspo/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "tspo/error.hpp"

namespace tspo {

using nlohmann::json;

void RunConfig::validate() const {
  train.validate();
  world.validate();
  if (output_dir.empty()) throw ValidationError("output_dir", "must not be empty");
  if (log_every < 1) throw ValidationError("log_every", "must be at least 1");
}

json to_json(const TrainConfig& c) {
  return {{"alpha", c.alpha},
          {"strategy", to_string(c.strategy)},
          {"group_size", c.group_size},
          {"clip_epsilon", c.clip_epsilon},
          {"kl_beta", c.kl_beta},
          {"norm_epsilon", c.norm_epsilon},
          {"learning_rate", c.learning_rate},
          {"steps", c.steps},
          {"batch_questions", c.batch_questions},
          {"seed", c.seed},
          {"inner_epochs", c.inner_epochs},
          {"threads", c.threads}};
}

TrainConfig apply_train_json(TrainConfig c, const json& j) {
  if (!j.is_object()) throw ValidationError("config", "expected a JSON object");
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "alpha") c.alpha = v.get<double>();
      else if (key == "strategy") c.strategy = parse_strategy(v.get<std::string>());
      else if (key == "group_size") c.group_size = v.get<std::size_t>();
      else if (key == "clip_epsilon") c.clip_epsilon = v.get<double>();
      else if (key == "kl_beta") c.kl_beta = v.get<double>();
      else if (key == "norm_epsilon") c.norm_epsilon = v.get<double>();
      else if (key == "learning_rate") c.learning_rate = v.get<double>();
      else if (key == "steps") c.steps = v.get<std::size_t>();
      else if (key == "batch_questions") c.batch_questions = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "inner_epochs") c.inner_epochs = v.get<std::size_t>();
      else if (key == "threads") c.threads = v.get<int>();
      else throw ValidationError(key, "unknown config field");
    } catch (const json::exception&) {
      throw ValidationError(key, "wrong type");
    }
  }
  return c;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(0, path + ": " + e.what());
  }
}

RunConfig run_config_from_json(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ValidationError("config", "expected a JSON object");
  RunConfig rc;
  json train = json::object();
  for (const auto& [key, v] : j.items()) {
    if (key == "world") {
      rc.world = world_config_from_json(v);
    } else if (key == "world_path") {
      std::filesystem::path p = v.get<std::string>();
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      rc.world = world_config_from_json(read_json_file(p.string()));
    } else if (key == "output_dir") {
      rc.output_dir = v.get<std::string>();
    } else if (key == "log_every") {
      rc.log_every = v.get<std::size_t>();
    } else {
      train[key] = v;
    }
  }
  rc.train = apply_train_json(rc.train, train);
  return rc;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string metrics_csv_row(const StepMetrics& m) {
  std::string row = std::to_string(m.step);
  for (double v : {m.mean_reward, m.entropy, m.kl, m.grad_norm, m.frac_all_correct, m.frac_mixed,
                   m.frac_all_wrong, m.mean_len}) {
    row += ',' + format_double(v);
  }
  for (std::size_t v : {m.n_opp, m.n_omp, m.n_omm, m.n_opm}) row += ',' + std::to_string(v);
  return row;
}

void write_metrics_csv(std::ostream& out, const std::vector<StepMetrics>& rows) {
  out << kMetricsHeader << '\n';
  for (const auto& m : rows) out << metrics_csv_row(m) << '\n';
}

json checkpoint_json(const PolicyParams& params, const RunConfig& config, std::size_t step) {
  json weights = json::array();
  for (std::size_t f = 0; f < params.num_features(); ++f) {
    auto r = params.weights.row(f);
    weights.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return {{"step", step},
          {"n_features", params.num_features()},
          {"n_actions", params.num_actions()},
          {"config", to_json(config.train)},
          {"world", to_json(config.world)},
          {"weights", std::move(weights)}};
}

PolicyParams params_from_checkpoint(const json& j) {
  try {
    const auto nf = j.at("n_features").get<std::size_t>();
    const auto na = j.at("n_actions").get<std::size_t>();
    const json& w = j.at("weights");
    if (w.size() != nf) throw ParseError(0, "checkpoint weights: expected " + std::to_string(nf) + " rows");
    PolicyParams p(nf, na);
    for (std::size_t f = 0; f < nf; ++f) {
      const auto row = w.at(f).get<std::vector<double>>();
      if (row.size() != na) throw ParseError(0, "checkpoint weights: ragged row " + std::to_string(f));
      for (std::size_t a = 0; a < na; ++a) p.weights(f, a) = row[a];
    }
    return p;
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("checkpoint: ") + e.what());
  }
}

}  // namespace tspo
