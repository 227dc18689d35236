#include "tspo/trajectory.hpp"

#include <algorithm>

#include "tspo/error.hpp"

namespace tspo {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_edge_punct(char c) {
  switch (c) {
    case '.': case ',': case '!': case '?': case ';': case ':': case '"': case '\'':
      return true;
    default:
      return false;
  }
}

bool contains_normalized(const std::string& haystack, const GoldAnswer& gold) {
  return std::any_of(gold.aliases().begin(), gold.aliases().end(), [&](const std::string& alias) {
    const std::string needle = normalize_answer(alias);
    return !needle.empty() && haystack.find(needle) != std::string::npos;
  });
}

}  // namespace

const char* to_string(TrajectoryCategory c) noexcept {
  switch (c) {
    case TrajectoryCategory::OPlusPPlus: return "O+P+";
    case TrajectoryCategory::OMinusPPlus: return "O-P+";
    case TrajectoryCategory::OMinusPMinus: return "O-P-";
    case TrajectoryCategory::OPlusPMinus: return "O+P-";
  }
  return "?";
}

std::string normalize_answer(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && (is_space(text[begin]) || is_edge_punct(text[begin]))) ++begin;
  while (end > begin && (is_space(text[end - 1]) || is_edge_punct(text[end - 1]))) --end;

  std::string out;
  out.reserve(end - begin);
  bool pending_space = false;
  for (std::size_t i = begin; i < end; ++i) {
    const char c = text[i];
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    // Only ASCII is case-folded; UTF-8 continuation bytes pass through.
    out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c);
  }
  return out;
}

bool exact_match(std::string_view answer, std::string_view gold) {
  return normalize_answer(answer) == normalize_answer(gold);
}

bool exact_match(std::string_view answer, const GoldAnswer& gold) {
  const std::string a = normalize_answer(answer);
  return std::any_of(gold.aliases().begin(), gold.aliases().end(),
                     [&](const std::string& alias) { return normalize_answer(alias) == a; });
}

std::optional<std::size_t> first_occurrence_turn(const Trajectory& traj, const GoldAnswer& gold) {
  for (const Turn& turn : traj.turns) {
    if (contains_normalized(normalize_answer(turn.feedback), gold)) return turn.index;
  }
  return std::nullopt;
}

bool evidence_presence(const Trajectory& traj, const GoldAnswer& gold) {
  return first_occurrence_turn(traj, gold).has_value();
}

TrajectoryCategory classify_trajectory(const Trajectory& traj, const GoldAnswer& gold) {
  const bool correct = exact_match(traj.final_answer, gold);
  const bool present = evidence_presence(traj, gold);
  if (correct) return present ? TrajectoryCategory::OPlusPPlus : TrajectoryCategory::OPlusPMinus;
  return present ? TrajectoryCategory::OMinusPPlus : TrajectoryCategory::OMinusPMinus;
}

void validate(const Trajectory& traj) {
  for (std::size_t i = 0; i < traj.turns.size(); ++i) {
    const Turn& t = traj.turns[i];
    if (t.index != i + 1) {
      throw ValidationError("turns", "turn indices must be contiguous from 1, got " +
                                         std::to_string(t.index) + " at position " +
                                         std::to_string(i + 1));
    }
    if (t.query && t.feedback.empty()) {
      throw ValidationError("turns", "turn " + std::to_string(t.index) + " has a query but no feedback");
    }
  }
}

}  // namespace tspo
