#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "tspo/advantage.hpp"
#include "tspo/diagnostics.hpp"
#include "tspo/error.hpp"
#include "tspo/reward.hpp"
#include "tspo/trajectory_io.hpp"

namespace tspo::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flags shared by train and sweep-alpha. Optionals stay unset unless given so
// the config file value survives.
struct TrainFlags {
  std::string config_path;
  std::string world_path;
  std::string output_dir;
  std::optional<double> alpha;
  std::optional<std::string> strategy;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> world_seed;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> group_size;
  std::optional<double> clip_epsilon;
  std::optional<double> kl_beta;
  std::optional<double> norm_epsilon;
  std::optional<double> learning_rate;
  std::optional<std::size_t> batch_questions;
  std::optional<std::size_t> inner_epochs;
  std::optional<int> threads;
  std::optional<std::size_t> log_every;
  bool serial = false;
  bool log_advantages = false;

  void attach(CLI::App& app, bool with_alpha) {
    app.add_option("--config", config_path, "JSON run config");
    app.add_option("--world", world_path, "JSON world config (overrides the run config's)");
    app.add_option("--out,--output-dir,--output_dir", output_dir, "output directory");
    if (with_alpha) app.add_option("--alpha", alpha, "first-occurrence reward coefficient in [0,1]");
    app.add_option("--strategy", strategy, "none | all-groups | all-wrong");
    app.add_option("--seed", seed, "training seed");
    app.add_option("--world-seed,--world_seed", world_seed, "world generation seed");
    app.add_option("--steps", steps);
    app.add_option("--group-size,--group_size", group_size);
    app.add_option("--clip-epsilon,--clip_epsilon", clip_epsilon);
    app.add_option("--kl-beta,--kl_beta", kl_beta);
    app.add_option("--norm-epsilon,--norm_epsilon", norm_epsilon);
    app.add_option("--learning-rate,--learning_rate", learning_rate);
    app.add_option("--batch-questions,--batch_questions", batch_questions);
    app.add_option("--inner-epochs,--inner_epochs", inner_epochs);
    app.add_option("--threads", threads);
    app.add_option("--log-every,--log_every", log_every, "write trajectories of every Nth step");
    app.add_flag("--serial", serial, "use the serial reference step");
    app.add_flag("--log-advantages,--log_advantages", log_advantages,
                 "write advantages.jsonl for all-wrong groups");
  }

  RunConfig resolve() const {
    RunConfig rc;
    if (!config_path.empty()) {
      rc = run_config_from_json(read_json_file(config_path), fs::path(config_path).parent_path().string());
    }
    if (!world_path.empty()) rc.world = world_config_from_json(read_json_file(world_path));
    if (const char* env_seed = std::getenv("TSPO_SEED"); env_seed && *env_seed) {
      try {
        rc.train.seed = std::stoull(env_seed);
      } catch (const std::exception&) {
        throw ValidationError("TSPO_SEED", "not an unsigned integer");
      }
    }
    if (!output_dir.empty()) rc.output_dir = output_dir;
    if (alpha) rc.train.alpha = *alpha;
    if (strategy) rc.train.strategy = parse_strategy(*strategy);
    if (seed) rc.train.seed = *seed;
    if (world_seed) rc.world.seed = *world_seed;
    if (steps) rc.train.steps = *steps;
    if (group_size) rc.train.group_size = *group_size;
    if (clip_epsilon) rc.train.clip_epsilon = *clip_epsilon;
    if (kl_beta) rc.train.kl_beta = *kl_beta;
    if (norm_epsilon) rc.train.norm_epsilon = *norm_epsilon;
    if (learning_rate) rc.train.learning_rate = *learning_rate;
    if (batch_questions) rc.train.batch_questions = *batch_questions;
    if (inner_epochs) rc.train.inner_epochs = *inner_epochs;
    if (threads) rc.train.threads = *threads;
    if (log_every) rc.log_every = *log_every;
    rc.validate();
    return rc;
  }
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

std::string alpha_label(double a) {
  std::ostringstream s;
  s << a;
  return s.str();
}

int cmd_train(const TrainFlags& flags, std::ostream& out) {
  const RunConfig rc = flags.resolve();
  const auto mode = flags.serial ? ExecutionMode::Serial : ExecutionMode::Parallel;
  const RunArtifacts art = run_training(rc, flags.log_advantages, mode, out);
  out << "final_mean_reward " << format_double(final_mean_reward(art.metrics)) << '\n';
  return kOk;
}

std::vector<double> parse_alphas(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ValidationError("alphas", "not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

int cmd_sweep_alpha(const TrainFlags& flags, const std::string& alpha_list, std::ostream& out) {
  const std::vector<double> alphas = parse_alphas(alpha_list);
  if (alphas.empty()) throw ValidationError("alphas", "need at least one value");
  for (double a : alphas) check_alpha(a);
  const RunConfig base = flags.resolve();
  ensure_dir(base.output_dir);
  const auto mode = flags.serial ? ExecutionMode::Serial : ExecutionMode::Parallel;

  std::ostringstream summary;
  summary << "alpha,final_mean_reward,reward_auc\n";
  for (double a : alphas) {
    RunConfig rc = base;
    rc.train.alpha = a;
    rc.output_dir = (fs::path(base.output_dir) / ("alpha_" + alpha_label(a))).string();
    out << "alpha " << alpha_label(a) << " -> " << rc.output_dir << '\n';
    const RunArtifacts art = run_training(rc, true, mode, out);
    summary << format_double(a) << ',' << format_double(final_mean_reward(art.metrics)) << ','
            << format_double(reward_auc(art.metrics)) << '\n';
  }
  auto f = open_out(fs::path(base.output_dir) / "summary.csv");
  f << summary.str();
  out << summary.str();
  return kOk;
}

int cmd_analyze(const std::string& path, const std::string& gold_field, const std::string& report_path,
                const std::string& composition_path, std::ostream& out, std::ostream& err) {
  const std::vector<TrajectoryRecord> records = read_jsonl_file(path, gold_field);
  const json report = analyze_records(records);
  if (report.contains("error")) err << "warning: " << report["error"].get<std::string>() << '\n';
  if (report_path.empty()) {
    out << report.dump(2) << '\n';
  } else {
    auto f = open_out(report_path);
    f << report.dump(2) << '\n';
  }
  if (!composition_path.empty()) {
    auto f = open_out(composition_path);
    f << "step,n_groups,frac_all_correct,frac_mixed,frac_all_wrong\n";
    for (const CompositionRow& row : composition_by_step(records)) {
      f << row.step << ',' << row.n_groups << ',' << format_double(row.composition.all_correct) << ','
        << format_double(row.composition.mixed) << ',' << format_double(row.composition.all_wrong) << '\n';
    }
  }
  return kOk;
}

// ---- reward-check -------------------------------------------------------

Trajectory canonical_trajectory(const std::string& name, bool gold_at_turn_2, bool correct) {
  Trajectory t;
  t.question = "What is the capital of France?";
  for (std::size_t k = 1; k <= 4; ++k) {
    Turn turn;
    turn.index = k;
    turn.reasoning = name + " step " + std::to_string(k);
    turn.query = "search " + std::to_string(k);
    turn.feedback = (gold_at_turn_2 && k >= 2) ? "Doc: Paris is the capital of France."
                                              : "Doc: France is a country in Europe.";
    t.turns.push_back(turn);
  }
  t.final_answer = correct ? "Paris" : "Lyon";
  return t;
}

struct CheckLog {
  std::vector<std::string> mismatches;
  void expect_near(const std::string& what, double got, double want, double tol) {
    if (!(std::abs(got - want) <= tol)) {
      mismatches.push_back(what + ": got " + format_double(got) + ", expected " + format_double(want) +
                           " (tol " + format_double(tol) + ")");
    }
  }
};

// Column-wise normalization written out directly; independent of
// group_normalize's code path.
std::vector<std::vector<double>> closed_form_advantages(const Matrix<double>& r, double eps) {
  std::vector<std::vector<double>> out(r.rows(), std::vector<double>(r.cols(), 0.0));
  for (std::size_t c = 0; c < r.cols(); ++c) {
    double mean = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < r.rows(); ++i) {
      mean += r(i, c) / static_cast<double>(r.rows());
      scale = std::max(scale, std::abs(r(i, c)));
    }
    double var = 0.0;
    for (std::size_t i = 0; i < r.rows(); ++i) var += (r(i, c) - mean) * (r(i, c) - mean);
    const double sd = std::sqrt(var / static_cast<double>(r.rows()));
    if (sd < 1e-15) continue;
    for (std::size_t i = 0; i < r.rows(); ++i) out[i][c] = (r(i, c) - mean) / (sd + eps * scale);
  }
  return out;
}

int cmd_reward_check(double alpha, const std::string& strategy_name, double eps, std::ostream& out,
                     std::ostream& err) {
  check_alpha(alpha);
  const Strategy strategy = parse_strategy(strategy_name);
  const GoldAnswer gold("Paris");
  const std::vector<Trajectory> group = {canonical_trajectory("O1", true, true),
                                         canonical_trajectory("O2", true, false),
                                         canonical_trajectory("OG", false, false)};
  const RewardMatrix rm = build_reward_matrix(group, gold, alpha, strategy);
  const AdvantageMatrix am = turn_advantages(rm, eps);
  // The near-miss and total failure alone form an all-wrong group.
  const std::vector<Trajectory> wrong(group.begin() + 1, group.end());
  const RewardMatrix rm_wrong = build_reward_matrix(wrong, gold, alpha, strategy);
  const AdvantageMatrix am_wrong = turn_advantages(rm_wrong, eps);

  CheckLog log;
  // Canonical (mixed) group: first-occurrence rewards apply under all-groups only.
  const bool folr_mixed = strategy == Strategy::AllGroups;
  const std::vector<std::vector<double>> want_rows = {
      {1, 1, 1, 1}, folr_mixed ? std::vector<double>{alpha, alpha, 0, 0} : std::vector<double>{0, 0, 0, 0},
      {0, 0, 0, 0}};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 4; ++k)
      log.expect_near("reward[" + std::to_string(i) + "][" + std::to_string(k) + "]", rm.rewards(i, k),
                      want_rows[i][k], 0.0);

  const auto closed = closed_form_advantages(rm.rewards, eps);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 4; ++k)
      log.expect_near("advantage[" + std::to_string(i) + "][" + std::to_string(k) + "]",
                      am.advantages(i, k), closed[i][k], 1e-9);
  if (alpha == 1.0 && strategy == Strategy::AllGroups) {
    const double turn1[3] = {0.71, 0.71, -1.41};
    const double turn3[3] = {1.41, -0.71, -0.71};
    for (std::size_t i = 0; i < 3; ++i) {
      log.expect_near("turn-1 advantage " + std::to_string(i), am.advantages(i, 0), turn1[i], 0.01);
      log.expect_near("turn-3 advantage " + std::to_string(i), am.advantages(i, 2), turn3[i], 0.01);
    }
  }

  // All-wrong subgroup: any alpha > 0 under a first-occurrence strategy gives
  // the alpha = 1 advantages; otherwise everything vanishes.
  const bool folr_wrong = strategy != Strategy::NoneStrategy && alpha > 0.0;
  const AdvantageMatrix am_wrong_ref =
      turn_advantages(build_reward_matrix(wrong, gold, 1.0, Strategy::AllWrongGroups), eps);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < 4; ++k)
      log.expect_near("all-wrong advantage[" + std::to_string(i) + "][" + std::to_string(k) + "]",
                      am_wrong.advantages(i, k), folr_wrong ? am_wrong_ref.advantages(i, k) : 0.0, 1e-9);

  json doc = {{"alpha", alpha},
              {"strategy", to_string(strategy)},
              {"trajectories", {"O1", "O2", "OG"}},
              {"reward_matrix", to_json(rm)},
              {"advantages", to_json(am)},
              {"all_wrong_subgroup", {{"trajectories", {"O2", "OG"}},
                                      {"reward_matrix", to_json(rm_wrong)},
                                      {"advantages", to_json(am_wrong)}}},
              {"mismatches", log.mismatches},
              {"ok", log.mismatches.empty()}};
  out << doc.dump(2) << '\n';
  for (const auto& m : log.mismatches) err << "mismatch: " << m << '\n';
  return log.mismatches.empty() ? kOk : kCheckFailed;
}

}  // namespace

double final_mean_reward(const std::vector<StepMetrics>& metrics) {
  if (metrics.empty()) return 0.0;
  const std::size_t n = std::min<std::size_t>(10, metrics.size());
  double s = 0.0;
  for (std::size_t i = metrics.size() - n; i < metrics.size(); ++i) s += metrics[i].mean_reward;
  return s / static_cast<double>(n);
}

double reward_auc(const std::vector<StepMetrics>& metrics) {
  if (metrics.empty()) return 0.0;
  double s = 0.0;
  for (const auto& m : metrics) s += m.mean_reward;
  return s / static_cast<double>(metrics.size());
}

RunArtifacts run_training(const RunConfig& rc, bool log_advantages, ExecutionMode mode, std::ostream& log) {
  rc.validate();
  const fs::path dir(rc.output_dir);
  ensure_dir(dir);
  auto world = std::make_shared<const World>(build_world(rc.world));

  auto traj_file = open_out(dir / "trajectories.jsonl");
  std::ofstream adv_file;
  if (log_advantages) adv_file = open_out(dir / "advantages.jsonl");

  Trainer trainer(world, rc.train);
  trainer.set_group_observer([&](const GroupRecord& g) {
    if (g.step % rc.log_every == 0) {
      for (const Trajectory& t : g.rollout.trajectories) {
        traj_file << to_jsonl_line({t, g.rollout.gold, static_cast<long long>(g.step),
                                    static_cast<long long>(g.slot)})
                  << '\n';
      }
    }
    if (log_advantages && g.rewards.group_type == GroupType::AllWrong) {
      json rec = {{"step", g.step}, {"slot", g.slot}, {"question_id", g.rollout.question_id}};
      rec.update(to_json(g.advantages));
      adv_file << rec.dump() << '\n';
    }
  });

  RunArtifacts art;
  for (std::size_t s = 0; s < rc.train.steps; ++s) art.metrics.push_back(trainer.step(mode));
  art.params = trainer.params();

  auto metrics_file = open_out(dir / "metrics.csv");
  write_metrics_csv(metrics_file, art.metrics);
  auto ckpt = open_out(dir / "checkpoint.json");
  ckpt << checkpoint_json(art.params, rc, trainer.steps_done()).dump(1) << '\n';
  if (!traj_file || !metrics_file || !ckpt || (log_advantages && !adv_file)) {
    throw IoError("write failed under " + dir.string());
  }
  log << "wrote " << (dir / "metrics.csv").string() << " (" << art.metrics.size() << " steps)\n";
  return art;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Turn-level stage-aware policy optimization on a synthetic search environment", "tspo"};
  app.require_subcommand(1);

  TrainFlags train_flags;
  auto* train = app.add_subcommand("train", "train a policy and write metrics, trajectories and a checkpoint");
  train_flags.attach(*train, true);

  TrainFlags sweep_flags;
  std::string alphas;
  auto* sweep = app.add_subcommand("sweep-alpha", "one training run per alpha with a shared seed");
  sweep_flags.attach(*sweep, false);
  sweep->add_option("--alphas", alphas, "comma-separated alpha values")->required();

  std::string jsonl_path, gold_field = "gold", report_path, composition_path;
  auto* analyze = app.add_subcommand("analyze", "outcome/evidence contingency diagnostics over a trajectory JSONL");
  analyze->add_option("jsonl", jsonl_path, "trajectory JSONL file")->required();
  analyze->add_option("--gold-field,--gold_field", gold_field, "key holding the gold answer(s)");
  analyze->add_option("--out,--report", report_path, "write the JSON report here instead of stdout");
  analyze->add_option("--composition-csv,--composition_csv", composition_path,
                      "per-step group composition CSV");

  double check_alpha_value = 1.0;
  std::string check_strategy = "all-groups";
  double check_eps = kDefaultNormEpsilon;
  auto* check = app.add_subcommand("reward-check", "verify the worked three-trajectory example");
  check->add_option("--alpha", check_alpha_value);
  check->add_option("--strategy", check_strategy);
  check->add_option("--norm-epsilon,--norm_epsilon", check_eps);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*train) return cmd_train(train_flags, out);
    if (*sweep) return cmd_sweep_alpha(sweep_flags, alphas, out);
    if (*analyze) return cmd_analyze(jsonl_path, gold_field, report_path, composition_path, out, err);
    if (*check) return cmd_reward_check(check_alpha_value, check_strategy, check_eps, out, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  }
  return kValidation;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("tspo");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace tspo::cli
