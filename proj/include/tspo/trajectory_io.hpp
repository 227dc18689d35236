#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tspo/trajectory.hpp"

namespace tspo {

// One JSONL line: {question, gold, turns, final_answer} plus the optional
// bookkeeping fields step and group_id written by the rollout logger.
struct TrajectoryRecord {
  Trajectory trajectory;
  GoldAnswer gold;
  std::optional<long long> step;
  std::optional<long long> group_id;

  bool operator==(const TrajectoryRecord&) const = default;
};

std::string to_jsonl_line(const TrajectoryRecord& rec);

// `gold_field` names the key holding the gold answer (string or list of
// strings). Errors are ParseError carrying `line_no`.
TrajectoryRecord parse_jsonl_line(const std::string& line, std::size_t line_no,
                                  const std::string& gold_field = "gold");

// Blank lines are skipped; line numbers in errors count them.
std::vector<TrajectoryRecord> read_jsonl(std::istream& in, const std::string& gold_field = "gold");
std::vector<TrajectoryRecord> read_jsonl_file(const std::string& path,
                                              const std::string& gold_field = "gold");

void write_jsonl(std::ostream& out, const std::vector<TrajectoryRecord>& records);

}  // namespace tspo
