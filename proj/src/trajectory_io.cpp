#include "tspo/trajectory_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "tspo/error.hpp"

namespace tspo {

using nlohmann::json;

std::string to_jsonl_line(const TrajectoryRecord& rec) {
  json turns = json::array();
  for (const Turn& t : rec.trajectory.turns) {
    turns.push_back({{"index", t.index},
                     {"reasoning", t.reasoning},
                     {"query", t.query ? json(*t.query) : json(nullptr)},
                     {"feedback", t.feedback}});
  }
  json j = {{"question", rec.trajectory.question},
            {"gold", rec.gold.aliases()},
            {"turns", std::move(turns)},
            {"final_answer", rec.trajectory.final_answer}};
  if (rec.step) j["step"] = *rec.step;
  if (rec.group_id) j["group_id"] = *rec.group_id;
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

TrajectoryRecord parse_jsonl_line(const std::string& line, std::size_t line_no,
                                  const std::string& gold_field) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(line_no, "expected a JSON object");

  TrajectoryRecord rec;
  try {
    rec.trajectory.question = j.value("question", std::string{});
    if (!j.contains(gold_field)) throw ParseError(line_no, "missing field '" + gold_field + "'");
    const json& g = j.at(gold_field);
    if (g.is_string()) {
      rec.gold = GoldAnswer(g.get<std::string>());
    } else if (g.is_array()) {
      rec.gold = GoldAnswer(g.get<std::vector<std::string>>());
    } else {
      throw ParseError(line_no, "field '" + gold_field + "' must be a string or list of strings");
    }
    if (!j.contains("final_answer")) throw ParseError(line_no, "missing field 'final_answer'");
    rec.trajectory.final_answer = j.at("final_answer").get<std::string>();
    for (const json& t : j.value("turns", json::array())) {
      Turn turn;
      turn.index = t.at("index").get<std::size_t>();
      turn.reasoning = t.value("reasoning", std::string{});
      if (t.contains("query") && !t.at("query").is_null()) turn.query = t.at("query").get<std::string>();
      turn.feedback = t.value("feedback", std::string{});
      rec.trajectory.turns.push_back(std::move(turn));
    }
    if (j.contains("step")) rec.step = j.at("step").get<long long>();
    if (j.contains("group_id")) rec.group_id = j.at("group_id").get<long long>();
  } catch (const json::exception& e) {
    throw ParseError(line_no, std::string("bad field: ") + e.what());
  }
  try {
    validate(rec.trajectory);
  } catch (const ValidationError& e) {
    throw ParseError(line_no, e.what());
  }
  return rec;
}

std::vector<TrajectoryRecord> read_jsonl(std::istream& in, const std::string& gold_field) {
  std::vector<TrajectoryRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_jsonl_line(line, line_no, gold_field));
  }
  return out;
}

std::vector<TrajectoryRecord> read_jsonl_file(const std::string& path, const std::string& gold_field) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_jsonl(in, gold_field);
}

void write_jsonl(std::ostream& out, const std::vector<TrajectoryRecord>& records) {
  for (const auto& r : records) out << to_jsonl_line(r) << '\n';
}

}  // namespace tspo
