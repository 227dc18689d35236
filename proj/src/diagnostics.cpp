#include "tspo/diagnostics.hpp"

#include <map>

#include "tspo/error.hpp"

namespace tspo {

namespace {

std::pair<int, int> coords(TrajectoryCategory c) {
  switch (c) {
    case TrajectoryCategory::OPlusPPlus: return {0, 0};
    case TrajectoryCategory::OPlusPMinus: return {0, 1};
    case TrajectoryCategory::OMinusPPlus: return {1, 0};
    case TrajectoryCategory::OMinusPMinus: return {1, 1};
  }
  return {1, 1};
}

}  // namespace

ContingencyTable ContingencyTable::from_cells(std::uint64_t opp, std::uint64_t omp, std::uint64_t opm,
                                              std::uint64_t omm) {
  ContingencyTable t;
  t.n[0][0] = opp;
  t.n[1][0] = omp;
  t.n[0][1] = opm;
  t.n[1][1] = omm;
  return t;
}

std::uint64_t ContingencyTable::cell(TrajectoryCategory c) const {
  const auto [i, j] = coords(c);
  return n[i][j];
}

ContingencyTable ContingencyTable::transposed() const {
  ContingencyTable t;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) t.n[j][i] = n[i][j];
  return t;
}

ContingencyTable build_contingency(std::span<const TrajectoryCategory> categories) {
  if (categories.empty()) throw ValidationError("categories", "empty input");
  ContingencyTable t;
  for (TrajectoryCategory c : categories) {
    const auto [i, j] = coords(c);
    ++t.n[i][j];
  }
  return t;
}

ExpectedTable expected_frequencies(const ContingencyTable& t) {
  const std::uint64_t total = t.grand_total();
  if (total == 0) throw UndefinedStatistic("expected frequencies of an empty table");
  ExpectedTable e{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      e[i][j] = static_cast<double>(t.row_total(i)) * static_cast<double>(t.col_total(j)) /
                static_cast<double>(total);
  return e;
}

double chi_squared(const ContingencyTable& t) {
  const ExpectedTable e = expected_frequencies(t);
  double chi2 = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      if (e[i][j] <= 0.0) {
        throw UndefinedStatistic("chi-squared undefined: expected frequency of a cell is zero");
      }
      const double d = static_cast<double>(t.n[i][j]) - e[i][j];
      chi2 += d * d / e[i][j];
    }
  }
  return chi2;
}

GroupComposition group_composition(std::span<const GroupType> groups) {
  if (groups.empty()) throw ValidationError("groups", "empty step");
  std::size_t c = 0, m = 0, w = 0;
  for (GroupType g : groups) {
    switch (g) {
      case GroupType::AllCorrect: ++c; break;
      case GroupType::Mixed: ++m; break;
      case GroupType::AllWrong: ++w; break;
    }
  }
  const double n = static_cast<double>(groups.size());
  return {static_cast<double>(c) / n, static_cast<double>(m) / n, static_cast<double>(w) / n};
}

nlohmann::json analyze_records(const std::vector<TrajectoryRecord>& records) {
  using nlohmann::json;
  std::vector<TrajectoryCategory> cats;
  cats.reserve(records.size());
  for (const auto& r : records) cats.push_back(classify_trajectory(r.trajectory, r.gold));

  json report;
  report["n_trajectories"] = records.size();
  json hist = json::object();
  for (auto c : {TrajectoryCategory::OPlusPPlus, TrajectoryCategory::OMinusPPlus,
                 TrajectoryCategory::OMinusPMinus, TrajectoryCategory::OPlusPMinus}) {
    hist[to_string(c)] = 0;
  }
  for (auto c : cats) hist[to_string(c)] = hist[to_string(c)].get<std::size_t>() + 1;
  report["category_histogram"] = hist;
  if (cats.empty()) {
    report["contingency"] = nullptr;
    report["expected"] = nullptr;
    report["chi2"] = nullptr;
    report["p_lt_001"] = nullptr;
    report["error"] = "no trajectories";
    return report;
  }

  const ContingencyTable t = build_contingency(cats);
  report["contingency"] = {{"O+P+", t.n[0][0]}, {"O-P+", t.n[1][0]}, {"O+P-", t.n[0][1]},
                           {"O-P-", t.n[1][1]}, {"total", t.grand_total()}};
  const ExpectedTable e = expected_frequencies(t);
  report["expected"] = {{"O+P+", e[0][0]}, {"O-P+", e[1][0]}, {"O+P-", e[0][1]}, {"O-P-", e[1][1]}};
  try {
    const double chi2 = chi_squared(t);
    report["chi2"] = chi2;
    report["p_lt_001"] = p_below_001(chi2);
  } catch (const UndefinedStatistic& ex) {
    report["chi2"] = nullptr;
    report["p_lt_001"] = nullptr;
    report["error"] = ex.what();
  }
  return report;
}

std::vector<CompositionRow> composition_by_step(const std::vector<TrajectoryRecord>& records) {
  // step -> group -> outcome rewards
  std::map<long long, std::map<long long, std::vector<double>>> grouped;
  for (const auto& r : records) {
    if (!r.step || !r.group_id) continue;
    grouped[*r.step][*r.group_id].push_back(outcome_reward(r.trajectory, r.gold));
  }
  std::vector<CompositionRow> out;
  for (const auto& [step, groups] : grouped) {
    std::vector<GroupType> types;
    for (const auto& [id, rewards] : groups) types.push_back(classify_group(rewards));
    out.push_back({step, types.size(), group_composition(types)});
  }
  return out;
}

}  // namespace tspo
