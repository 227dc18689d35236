#include "tspo/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tspo/error.hpp"
#include "tspo/random.hpp"

namespace tspo {

namespace {

int digits(std::size_t n) {
  int d = 1;
  while (n >= 10) {
    n /= 10;
    ++d;
  }
  return d;
}

std::string padded(const std::string& prefix, std::size_t value, int width) {
  std::string digits_str = std::to_string(value);
  if (static_cast<int>(digits_str.size()) < width) {
    digits_str.insert(0, static_cast<std::size_t>(width) - digits_str.size(), '0');
  }
  return prefix + digits_str;
}

std::size_t two_hop_count(const WorldConfig& c) {
  return static_cast<std::size_t>(std::llround(c.two_hop_fraction * static_cast<double>(c.n_questions)));
}

constexpr double kDesignatedScore = 2.0;
constexpr std::size_t kFillerPerDoc = 3;
constexpr std::size_t kFillerVocabulary = 500;

}  // namespace

void WorldConfig::validate() const {
  if (n_questions < 1) throw ValidationError("n_questions", "must be at least 1");
  if (n_docs < n_questions) throw ValidationError("n_docs", "must be at least n_questions");
  if (!(two_hop_fraction >= 0.0 && two_hop_fraction <= 1.0)) {
    throw ValidationError("two_hop_fraction", "must lie in [0, 1]");
  }
  if (n_docs < n_questions + two_hop_count(*this)) {
    throw ValidationError("n_docs", "needs one gold document per question plus one bridge "
                                    "document per two-hop question");
  }
  if (n_templates < 1) throw ValidationError("n_templates", "must be at least 1");
  if (answer_candidates < 2) throw ValidationError("answer_candidates", "must be at least 2");
  if (top_k < 1 || top_k > n_docs) throw ValidationError("top_k", "must lie in [1, n_docs]");
  if (max_turns < 2) throw ValidationError("max_turns", "must be at least 2");
}

nlohmann::json to_json(const WorldConfig& c) {
  return {{"n_questions", c.n_questions}, {"n_docs", c.n_docs},
          {"n_templates", c.n_templates}, {"answer_candidates", c.answer_candidates},
          {"top_k", c.top_k},             {"max_turns", c.max_turns},
          {"two_hop_fraction", c.two_hop_fraction}, {"seed", c.seed}};
}

WorldConfig world_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("world", "expected a JSON object");
  WorldConfig c;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "n_questions") c.n_questions = value.get<std::size_t>();
      else if (key == "n_docs") c.n_docs = value.get<std::size_t>();
      else if (key == "n_templates") c.n_templates = value.get<std::size_t>();
      else if (key == "answer_candidates") c.answer_candidates = value.get<std::size_t>();
      else if (key == "top_k") c.top_k = value.get<std::size_t>();
      else if (key == "max_turns") c.max_turns = value.get<std::size_t>();
      else if (key == "two_hop_fraction") c.two_hop_fraction = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else throw ValidationError(key, "unknown world config field");
    } catch (const nlohmann::json::exception&) {
      throw ValidationError(key, "wrong type");
    }
  }
  return c;
}

World build_world(const WorldConfig& config, std::uint64_t seed) {
  config.validate();
  World w;
  w.config = config;
  w.config.seed = seed;
  Rng rng(derive_seed(seed, 0x776f726c64ULL));

  const std::size_t nq = config.n_questions;
  const std::size_t nd = config.n_docs;
  const std::size_t nt = config.n_templates;
  const int qw = std::max(3, digits(nq - 1));
  const int cw = digits(config.answer_candidates - 1);
  const int fw = digits(kFillerVocabulary - 1);

  // Doc roles: the first nq shuffled ids hold gold answers, the next ones the
  // bridges of two-hop questions, the rest are distractors.
  std::vector<std::size_t> doc_ids(nd);
  std::iota(doc_ids.begin(), doc_ids.end(), 0);
  shuffle<std::size_t>(doc_ids, rng);

  std::vector<std::size_t> order(nq);
  std::iota(order.begin(), order.end(), 0);
  shuffle<std::size_t>(order, rng);
  std::vector<int> hops(nq, 1);
  for (std::size_t i = 0; i < two_hop_count(config); ++i) hops[order[i]] = 2;

  w.questions.resize(nq);
  std::size_t next_bridge = nq;
  for (std::size_t q = 0; q < nq; ++q) {
    Question& qu = w.questions[q];
    qu.id = q;
    qu.text = "question " + padded("q", q, qw);
    qu.hop_count = hops[q];
    for (std::size_t c = 0; c < config.answer_candidates; ++c) {
      qu.candidates.push_back(padded("ans-" + padded("q", q, qw) + "-c", c, cw));
    }
    qu.gold_candidate = uniform_below(rng, config.answer_candidates);
    qu.gold = qu.candidates[qu.gold_candidate];
    qu.gold_doc = doc_ids[q];
    qu.gold_template = uniform_below(rng, nt);
    if (qu.hop_count == 2) {
      qu.bridge_doc = doc_ids[next_bridge++];
      qu.bridge_template = uniform_below(rng, nt);
      if (nt > 1) {
        while (qu.bridge_template == qu.gold_template) qu.bridge_template = uniform_below(rng, nt);
      }
    }
    w.corpus.gold_locations[q] = {qu.gold_doc};
  }

  w.corpus.documents.resize(nd);
  for (std::size_t d = 0; d < nd; ++d) {
    Document& doc = w.corpus.documents[d];
    doc.id = d;
    for (std::size_t f = 0; f < kFillerPerDoc; ++f) {
      doc.tokens.push_back(padded("w", uniform_below(rng, kFillerVocabulary), fw));
    }
  }
  for (const Question& qu : w.questions) {
    const std::string tag = padded("q", qu.id, qw);
    w.corpus.documents[qu.gold_doc].tokens.push_back("topic-" + tag);
    w.corpus.documents[qu.gold_doc].tokens.push_back(qu.gold);
    if (qu.hop_count == 2) w.corpus.documents[qu.bridge_doc].tokens.push_back("link-" + tag);
  }
  // Distractors may mention a wrong candidate of some question.
  for (std::size_t i = next_bridge; i < nd; ++i) {
    if (uniform01(rng) < 0.5) {
      const Question& qu = w.questions[uniform_below(rng, nq)];
      std::size_t c = uniform_below(rng, config.answer_candidates - 1);
      if (c >= qu.gold_candidate) ++c;
      w.corpus.documents[doc_ids[i]].tokens.push_back(qu.candidates[c]);
    }
  }

  w.scores.resize(nq * nt * nd);
  for (double& s : w.scores) s = uniform01(rng);
  for (const Question& qu : w.questions) {
    auto at = [&](std::size_t t, std::size_t d) -> double& { return w.scores[(qu.id * nt + t) * nd + d]; };
    at(qu.gold_template, qu.gold_doc) = kDesignatedScore + uniform01(rng);
    if (qu.hop_count == 2) at(qu.bridge_template, qu.bridge_doc) = kDesignatedScore + uniform01(rng);
  }
  return w;
}

std::size_t EnvState::retrieved_count() const {
  return static_cast<std::size_t>(std::count(retrieved.begin(), retrieved.end(), 1));
}

Environment::Environment(std::shared_ptr<const World> world) : world_(std::move(world)) {
  if (!world_) throw std::invalid_argument("Environment: null world");
}

std::size_t Environment::num_actions() const noexcept {
  return world_->config.n_templates + world_->config.answer_candidates;
}

std::size_t Environment::num_features() const noexcept {
  const WorldConfig& c = world_->config;
  return 1 + c.n_questions + c.n_docs + 1 + c.max_turns + c.answer_candidates;
}

EnvAction Environment::action_from_index(std::size_t a) const {
  const std::size_t nt = world_->config.n_templates;
  if (a >= num_actions()) throw ValidationError("action", "index out of range");
  return a < nt ? EnvAction::query(a) : EnvAction::answer(a - nt);
}

std::size_t Environment::action_index(const EnvAction& action) const {
  return action.kind == EnvAction::Kind::Query ? action.id : world_->config.n_templates + action.id;
}

EnvState Environment::reset(std::size_t question_id, std::uint64_t episode_seed) const {
  const WorldConfig& c = world_->config;
  if (question_id >= world_->questions.size()) {
    throw ValidationError("question_id", "unknown question " + std::to_string(question_id));
  }
  EnvState s;
  s.question_id = question_id;
  s.retrieved.assign(c.n_docs, 0);
  s.candidate_order.resize(c.answer_candidates);
  std::iota(s.candidate_order.begin(), s.candidate_order.end(), 0);
  Rng rng(derive_seed(episode_seed, 0x736c6f7473ULL));
  shuffle<std::size_t>(s.candidate_order, rng);
  s.candidate_seen.assign(c.answer_candidates, 0);
  return s;
}

std::vector<std::size_t> Environment::retrieve(const EnvState& state, std::size_t template_id) const {
  const WorldConfig& c = world_->config;
  const Question& qu = world_->questions[state.question_id];
  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(c.n_docs);
  for (std::size_t d = 0; d < c.n_docs; ++d) {
    // A two-hop gold document is unreachable until its bridge is retrieved.
    if (qu.hop_count == 2 && d == qu.gold_doc && !state.bridge_found) continue;
    ranked.emplace_back(world_->score(qu.id, template_id, d), d);
  }
  const std::size_t k = std::min(c.top_k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k), ranked.end(),
                    [](const auto& a, const auto& b) {
                      return a.first != b.first ? a.first > b.first : a.second < b.second;
                    });
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = ranked[i].second;
  return out;
}

StepResult Environment::step(const EnvState& state, const EnvAction& action) const {
  if (state.done) throw std::logic_error("step called on a finished episode");
  const WorldConfig& c = world_->config;
  const Question& qu = world_->questions[state.question_id];
  StepResult out{{}, state};
  EnvState& next = out.next;

  if (action.kind == EnvAction::Kind::Query) {
    if (action.id >= c.n_templates) throw ValidationError("action", "template id out of range");
    for (std::size_t d : retrieve(state, action.id)) {
      next.retrieved[d] = 1;
      if (qu.hop_count == 2 && d == qu.bridge_doc) next.bridge_found = true;
      if (!out.feedback.empty()) out.feedback += " | ";
      out.feedback += "doc " + std::to_string(d) + ":";
      for (const std::string& tok : world_->corpus.documents[d].tokens) out.feedback += " " + tok;
    }
    for (std::size_t s = 0; s < c.answer_candidates; ++s) {
      if (out.feedback.find(qu.candidates[next.candidate_order[s]]) != std::string::npos) {
        next.candidate_seen[s] = 1;
      }
    }
    ++next.turn;
    if (next.turn >= c.max_turns) {
      next.done = true;
      next.final_answer = kNoAnswer;
    }
  } else {
    if (action.id >= c.answer_candidates) throw ValidationError("action", "candidate slot out of range");
    next.final_answer = qu.candidates[next.candidate_order[action.id]];
    out.feedback = next.final_answer;
    next.done = true;
    ++next.turn;
  }
  return out;
}

std::vector<double> Environment::features(const EnvState& state) const {
  const WorldConfig& c = world_->config;
  std::vector<double> x(num_features(), 0.0);
  std::size_t off = 0;
  x[off++] = 1.0;
  x[off + state.question_id] = 1.0;
  off += c.n_questions;
  for (std::size_t d = 0; d < c.n_docs; ++d) x[off + d] = state.retrieved[d] ? 1.0 : 0.0;
  off += c.n_docs;
  x[off++] = state.bridge_found ? 1.0 : 0.0;
  if (state.turn < c.max_turns) x[off + state.turn] = 1.0;
  off += c.max_turns;
  for (std::size_t s = 0; s < c.answer_candidates; ++s) x[off + s] = state.candidate_seen[s] ? 1.0 : 0.0;
  return x;
}

void Environment::record_turn(Trajectory& traj, const EnvState& before, const EnvAction& action,
                              const StepResult& result) const {
  Turn turn;
  turn.index = traj.turns.size() + 1;
  const Question& qu = world_->questions[before.question_id];
  if (action.kind == EnvAction::Kind::Query) {
    turn.reasoning = "search with template " + std::to_string(action.id);
    turn.query = "template " + std::to_string(action.id) + " about " + qu.text;
    turn.feedback = result.feedback;
  } else {
    // The synthesis step is not retrieval: its text goes to final_answer only.
    turn.reasoning = "answer with candidate slot " + std::to_string(action.id);
  }
  traj.turns.push_back(std::move(turn));
  if (result.next.done) traj.final_answer = result.next.final_answer;
}

Trajectory Environment::run_episode(std::size_t question_id, std::uint64_t episode_seed,
                                    const Chooser& choose) const {
  Trajectory traj;
  traj.question = world_->questions.at(question_id).text;
  EnvState state = reset(question_id, episode_seed);
  while (!state.done) {
    const EnvAction action = choose(state);
    StepResult r = step(state, action);
    record_turn(traj, state, action, r);
    state = std::move(r.next);
  }
  return traj;
}

}  // namespace tspo
