#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "tspo/trajectory.hpp"

namespace tspo {

struct WorldConfig {
  std::size_t n_questions = 16;
  std::size_t n_docs = 64;
  std::size_t n_templates = 8;
  std::size_t answer_candidates = 6;
  std::size_t top_k = 3;
  std::size_t max_turns = 4;
  double two_hop_fraction = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const WorldConfig&) const = default;
};

nlohmann::json to_json(const WorldConfig& c);
// Missing keys keep their defaults; unknown keys are rejected.
WorldConfig world_config_from_json(const nlohmann::json& j);

struct Document {
  std::size_t id = 0;
  std::vector<std::string> tokens;

  bool operator==(const Document&) const = default;
};

struct Corpus {
  std::vector<Document> documents;
  std::map<std::size_t, std::set<std::size_t>> gold_locations;  // question id -> doc ids

  bool operator==(const Corpus&) const = default;
};

struct Question {
  std::size_t id = 0;
  std::string text;
  std::string gold;
  std::vector<std::string> candidates;  // gold is candidates[gold_candidate]
  std::size_t gold_candidate = 0;
  int hop_count = 1;
  std::size_t gold_doc = 0;
  std::size_t bridge_doc = 0;  // meaningful when hop_count == 2
  std::size_t gold_template = 0;
  std::size_t bridge_template = 0;

  bool operator==(const Question&) const = default;
};

// Immutable after build_world; shared read-only between workers.
struct World {
  WorldConfig config;
  Corpus corpus;
  std::vector<Question> questions;
  // score[(q * n_templates + t) * n_docs + d]: retrieval score of doc d for
  // template t asked about question q.
  std::vector<double> scores;

  double score(std::size_t q, std::size_t t, std::size_t d) const {
    return scores[(q * config.n_templates + t) * config.n_docs + d];
  }
  bool operator==(const World&) const = default;
};

World build_world(const WorldConfig& config, std::uint64_t seed);
inline World build_world(const WorldConfig& config) { return build_world(config, config.seed); }

struct EnvAction {
  enum class Kind { Query, Answer };
  Kind kind = Kind::Query;
  std::size_t id = 0;  // template id for Query, candidate slot for Answer

  static EnvAction query(std::size_t t) { return {Kind::Query, t}; }
  static EnvAction answer(std::size_t slot) { return {Kind::Answer, slot}; }
  bool operator==(const EnvAction&) const = default;
};

struct EnvState {
  std::size_t question_id = 0;
  std::size_t turn = 0;
  std::vector<unsigned char> retrieved;       // per doc
  std::vector<std::size_t> candidate_order;   // slot -> candidate index
  std::vector<unsigned char> candidate_seen;  // per slot: appeared in feedback
  bool bridge_found = false;
  bool done = false;
  std::string final_answer;

  std::size_t retrieved_count() const;
  bool operator==(const EnvState&) const = default;
};

struct StepResult {
  std::string feedback;
  EnvState next;
};

// Final answer recorded when the turn budget runs out before an Answer action.
inline constexpr const char* kNoAnswer = "[no answer]";

class Environment {
 public:
  explicit Environment(std::shared_ptr<const World> world);

  const World& world() const noexcept { return *world_; }
  std::size_t num_actions() const noexcept;
  std::size_t num_features() const noexcept;

  EnvAction action_from_index(std::size_t a) const;
  std::size_t action_index(const EnvAction& action) const;

  // The episode seed fixes the order in which answer candidates are offered.
  EnvState reset(std::size_t question_id, std::uint64_t episode_seed = 0) const;
  StepResult step(const EnvState& state, const EnvAction& action) const;

  // Indices of the top_k documents a query would retrieve.
  std::vector<std::size_t> retrieve(const EnvState& state, std::size_t template_id) const;

  // [bias | question one-hot | retrieved docs | bridge_found | turn one-hot |
  //  candidate slot seen in feedback]
  std::vector<double> features(const EnvState& state) const;

  // Appends the turn produced by `action` to `traj` and sets final_answer on
  // termination.
  void record_turn(Trajectory& traj, const EnvState& before, const EnvAction& action,
                   const StepResult& result) const;

  using Chooser = std::function<EnvAction(const EnvState&)>;
  Trajectory run_episode(std::size_t question_id, std::uint64_t episode_seed,
                         const Chooser& choose) const;

 private:
  std::shared_ptr<const World> world_;
};

}  // namespace tspo
