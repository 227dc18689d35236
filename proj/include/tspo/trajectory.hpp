#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tspo {

// One reasoning / tool-call / feedback cycle. Turns without a query (the
// final synthesis step) carry an empty feedback.
struct Turn {
  std::size_t index = 1;
  std::string reasoning;
  std::optional<std::string> query;
  std::string feedback;

  bool operator==(const Turn&) const = default;
};

struct Trajectory {
  std::string question;
  std::vector<Turn> turns;
  std::string final_answer;

  std::size_t size() const noexcept { return turns.size(); }
  bool operator==(const Trajectory&) const = default;
};

// Acceptable answer strings for one question. A match against any alias counts.
class GoldAnswer {
 public:
  GoldAnswer() = default;
  GoldAnswer(std::string single) : aliases_{std::move(single)} {}  // NOLINT
  GoldAnswer(const char* single) : aliases_{single} {}               // NOLINT
  explicit GoldAnswer(std::vector<std::string> aliases) : aliases_(std::move(aliases)) {}

  const std::vector<std::string>& aliases() const noexcept { return aliases_; }
  bool empty() const noexcept { return aliases_.empty(); }
  const std::string& primary() const { return aliases_.front(); }

  bool operator==(const GoldAnswer&) const = default;

 private:
  std::vector<std::string> aliases_;
};

enum class TrajectoryCategory {
  OPlusPPlus,    // correct answer, gold retrieved
  OMinusPPlus,   // near-miss: gold retrieved, wrong answer
  OMinusPMinus,  // total failure
  OPlusPMinus,   // correct without retrieving gold
};

const char* to_string(TrajectoryCategory c) noexcept;

// Lowercase (ASCII), trim, collapse internal whitespace, strip surrounding
// .,!?;:"' characters.
std::string normalize_answer(std::string_view text);

bool exact_match(std::string_view answer, std::string_view gold);
bool exact_match(std::string_view answer, const GoldAnswer& gold);
inline bool exact_match(std::string_view answer, const char* gold) {
  return exact_match(answer, std::string_view(gold));
}
inline bool exact_match(std::string_view answer, const std::string& gold) {
  return exact_match(answer, std::string_view(gold));
}

// True iff some alias, normalized and non-empty, is a substring of some
// normalized turn feedback.
bool evidence_presence(const Trajectory& traj, const GoldAnswer& gold);

// Index of the first turn whose feedback contains the gold answer.
std::optional<std::size_t> first_occurrence_turn(const Trajectory& traj, const GoldAnswer& gold);

TrajectoryCategory classify_trajectory(const Trajectory& traj, const GoldAnswer& gold);

// Throws ValidationError if turn indices are not contiguous 1..k or a query
// has no feedback field set.
void validate(const Trajectory& traj);

}  // namespace tspo
