#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "tspo/trajectory_io.hpp"

using namespace tspo;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tspo_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string line_of(bool correct, bool present) {
  TrajectoryRecord r;
  r.trajectory.question = "q";
  r.trajectory.turns.push_back({1, "r", "s", present ? "gold" : "none"});
  r.trajectory.final_answer = correct ? "gold" : "no";
  r.gold = GoldAnswer("gold");
  return to_jsonl_line(r);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("reward-check default") {
  const Result r = run_cli({"reward-check"});
  REQUIRE(r.code == cli::kOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("ok") == true);
  CHECK(j.at("reward_matrix").at("rows") ==
        nlohmann::json::parse("[[1.0,1.0,1.0,1.0],[1.0,1.0,0.0,0.0],[0.0,0.0,0.0,0.0]]"));
  const auto adv = j.at("advantages").at("advantages");
  CHECK(std::abs(adv[0][0].get<double>() - 0.71) < 0.01);
  CHECK(std::abs(adv[2][0].get<double>() + 1.41) < 0.01);
}

TEST_CASE("reward-check variants") {
  Result r = run_cli({"reward-check", "--alpha", "0.5"});
  CHECK(r.code == cli::kOk);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("reward_matrix").at("rows")[1] == nlohmann::json::parse("[0.5,0.5,0.0,0.0]"));
  r = run_cli({"reward-check", "--strategy", "none"});
  CHECK(r.code == cli::kOk);
  j = nlohmann::json::parse(r.out);
  for (const auto& row : j.at("all_wrong_subgroup").at("advantages").at("advantages"))
    for (const auto& v : row) CHECK(v.get<double>() == 0.0);
  CHECK(run_cli({"reward-check", "--alpha", "3"}).code == cli::kValidation);
}

TEST_CASE("train writes artifacts deterministically") {
  const fs::path a = scratch("train_a"), b = scratch("train_b");
  const std::vector<std::string> common = {"--strategy", "all-wrong", "--alpha", "1.0", "--seed", "7", "--steps", "12"};
  auto args = std::vector<std::string>{"train", "--out", a.string()};
  args.insert(args.end(), common.begin(), common.end());
  REQUIRE(run_cli(args).code == cli::kOk);
  args[2] = b.string();
  REQUIRE(run_cli(args).code == cli::kOk);
  for (const char* f : {"metrics.csv", "trajectories.jsonl", "checkpoint.json"}) {
    CHECK(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const std::string csv = slurp(a / "metrics.csv");
  CHECK(csv.rfind(std::string(kMetricsHeader) + "\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == 13);
  const auto ckpt = nlohmann::json::parse(slurp(a / "checkpoint.json"));
  CHECK(ckpt.at("step") == 12);
  CHECK(params_from_checkpoint(ckpt).num_actions() == ckpt.at("n_actions").get<std::size_t>());
  // logged trajectories parse back and carry step/group ids
  const auto recs = read_jsonl_file((a / "trajectories.jsonl").string());
  CHECK(!recs.empty());
  CHECK(recs.front().step.has_value());
}

TEST_CASE("train: none vs all-wrong alpha 0 give identical metrics") {
  const fs::path a = scratch("deg_a"), b = scratch("deg_b");
  REQUIRE(run_cli({"train", "--strategy", "none", "--seed", "3", "--steps", "20", "--out", a.string()}).code == 0);
  REQUIRE(run_cli({"train", "--strategy", "all-wrong", "--alpha", "0", "--seed", "3", "--steps", "20", "--out",
                   b.string()})
              .code == 0);
  CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
}

TEST_CASE("train validation errors") {
  const fs::path d = scratch("bad");
  Result r = run_cli({"train", "--alpha", "1.5", "--out", d.string()});
  CHECK(r.code == cli::kValidation);
  CHECK(r.err.find("alpha") != std::string::npos);
  r = run_cli({"train", "--strategy", "maybe", "--out", d.string()});
  CHECK(r.code == cli::kValidation);
  CHECK(r.err.find("strategy") != std::string::npos);
  r = run_cli({"train", "--config", (d / "missing.json").string()});
  CHECK(r.code == cli::kIo);
  std::ofstream(d / "cfg.json") << R"({"steps": 2, "learning_rat": 0.1})";
  r = run_cli({"train", "--config", (d / "cfg.json").string(), "--out", d.string()});
  CHECK(r.code == cli::kValidation);
  CHECK(r.err.find("learning_rat") != std::string::npos);
}

TEST_CASE("config file, world file and seed precedence") {
  const fs::path d = scratch("cfg");
  std::ofstream(d / "world.json") << R"({"n_questions": 4, "n_docs": 16, "max_turns": 3})";
  std::ofstream(d / "cfg.json") << R"({"steps": 3, "seed": 5, "world_path": "world.json", "batch_questions": 2})";
  REQUIRE(run_cli({"train", "--config", (d / "cfg.json").string(), "--out", (d / "x").string()}).code == 0);
  auto ckpt = nlohmann::json::parse(slurp(d / "x" / "checkpoint.json"));
  CHECK(ckpt.at("world").at("n_questions") == 4);
  CHECK(ckpt.at("config").at("seed") == 5);
  CHECK(ckpt.at("step") == 3);

  setenv("TSPO_SEED", "11", 1);
  REQUIRE(run_cli({"train", "--config", (d / "cfg.json").string(), "--out", (d / "y").string()}).code == 0);
  REQUIRE(run_cli({"train", "--config", (d / "cfg.json").string(), "--seed", "12", "--out", (d / "z").string()})
              .code == 0);
  unsetenv("TSPO_SEED");
  CHECK(nlohmann::json::parse(slurp(d / "y" / "checkpoint.json")).at("config").at("seed") == 11);
  CHECK(nlohmann::json::parse(slurp(d / "z" / "checkpoint.json")).at("config").at("seed") == 12);
}

TEST_CASE("sweep-alpha") {
  const fs::path d = scratch("sweep");
  Result r = run_cli({"sweep-alpha", "--alphas", "0.5,1.0", "--steps", "25", "--seed", "2", "--out", d.string()});
  REQUIRE(r.code == cli::kOk);
  CHECK(fs::exists(d / "summary.csv"));
  // all-wrong advantages are logged identically for both alphas
  const std::string half = slurp(d / "alpha_0.5" / "advantages.jsonl");
  CHECK(!half.empty());
  CHECK(half == slurp(d / "alpha_1" / "advantages.jsonl"));

  const fs::path z = scratch("sweep0"), n = scratch("sweep_none");
  REQUIRE(run_cli({"sweep-alpha", "--alphas", "0", "--steps", "20", "--seed", "2", "--out", z.string()}).code == 0);
  REQUIRE(run_cli({"train", "--strategy", "none", "--steps", "20", "--seed", "2", "--out", n.string()}).code == 0);
  CHECK(slurp(z / "alpha_0" / "metrics.csv") == slurp(n / "metrics.csv"));

  CHECK(run_cli({"sweep-alpha", "--alphas", "", "--out", d.string()}).code != 0);
  CHECK(run_cli({"sweep-alpha", "--out", d.string()}).code != 0);
  CHECK(run_cli({"sweep-alpha", "--alphas", "0.5,2", "--out", d.string()}).code == cli::kValidation);
}

TEST_CASE("analyze") {
  const fs::path d = scratch("analyze");
  {
    std::ofstream f(d / "reference.jsonl");
    for (int i = 0; i < 10092; ++i) f << line_of(true, true) << '\n';
    for (int i = 0; i < 25645; ++i) f << line_of(false, true) << '\n';
    for (int i = 0; i < 15976; ++i) f << line_of(false, false) << '\n';
  }
  Result r = run_cli({"analyze", (d / "reference.jsonl").string()});
  REQUIRE(r.code == cli::kOk);
  auto j = nlohmann::json::parse(r.out);
  CHECK(std::abs(j.at("chi2").get<double>() - 5605.5) < 0.5);
  CHECK(j.at("p_lt_001") == true);

  std::ofstream(d / "one.jsonl") << line_of(true, true) << '\n';
  r = run_cli({"analyze", (d / "one.jsonl").string()});
  CHECK(r.code == cli::kOk);
  CHECK(nlohmann::json::parse(r.out).at("chi2").is_null());
  CHECK(r.err.find("warning") != std::string::npos);

  std::ofstream(d / "bad.jsonl") << line_of(true, true) << '\n' << line_of(false, true) << "\n{oops\n";
  r = run_cli({"analyze", (d / "bad.jsonl").string()});
  CHECK(r.code == cli::kIo);
  CHECK(r.err.find("line 3") != std::string::npos);

  CHECK(run_cli({"analyze", (d / "nope.jsonl").string()}).code == cli::kIo);
}

TEST_CASE("analyze a training log with a composition csv") {
  const fs::path d = scratch("analyze_train");
  REQUIRE(run_cli({"train", "--steps", "21", "--out", d.string()}).code == 0);
  const Result r = run_cli({"analyze", (d / "trajectories.jsonl").string(), "--out", (d / "report.json").string(),
                            "--composition-csv", (d / "comp.csv").string()});
  REQUIRE(r.code == cli::kOk);
  const auto j = nlohmann::json::parse(slurp(d / "report.json"));
  CHECK(j.at("n_trajectories") == 3 * 8 * 5);
  const std::string csv = slurp(d / "comp.csv");
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == 4);
}

TEST_CASE("usage errors") {
  CHECK(run_cli({}).code == cli::kValidation);
  CHECK(run_cli({"frobnicate"}).code == cli::kValidation);
  CHECK(run_cli({"--help"}).code == cli::kOk);
}

}  // TEST_SUITE
