#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "tspo/reward.hpp"
#include "tspo/trajectory.hpp"
#include "tspo/trajectory_io.hpp"

namespace tspo {

// Rows index outcome (0 = O+, 1 = O-), columns evidence (0 = P+, 1 = P-).
struct ContingencyTable {
  std::array<std::array<std::uint64_t, 2>, 2> n{};

  static ContingencyTable from_cells(std::uint64_t opp, std::uint64_t omp, std::uint64_t opm,
                                     std::uint64_t omm);
  std::uint64_t cell(TrajectoryCategory c) const;
  std::uint64_t row_total(int i) const { return n[i][0] + n[i][1]; }
  std::uint64_t col_total(int j) const { return n[0][j] + n[1][j]; }
  std::uint64_t grand_total() const { return row_total(0) + row_total(1); }
  ContingencyTable transposed() const;

  bool operator==(const ContingencyTable&) const = default;
};

ContingencyTable build_contingency(std::span<const TrajectoryCategory> categories);

using ExpectedTable = std::array<std::array<double, 2>, 2>;
ExpectedTable expected_frequencies(const ContingencyTable& t);

// Pearson statistic without continuity correction. Throws UndefinedStatistic
// when any expected count is zero.
double chi_squared(const ContingencyTable& t);

// 1 degree of freedom critical value at p = 0.001.
inline constexpr double kChi2Critical001 = 10.828;
inline bool p_below_001(double chi2) { return chi2 > kChi2Critical001; }

struct GroupComposition {
  double all_correct = 0.0;
  double mixed = 0.0;
  double all_wrong = 0.0;
};

GroupComposition group_composition(std::span<const GroupType> groups);

// Full report over a JSONL log: {contingency, expected, chi2, p_lt_001,
// category_histogram, n_trajectories}. chi2 is null with an "error" entry
// when the statistic is undefined.
nlohmann::json analyze_records(const std::vector<TrajectoryRecord>& records);

struct CompositionRow {
  long long step = 0;
  std::size_t n_groups = 0;
  GroupComposition composition;
};

// Per-step group composition for records carrying step and group_id; records
// without them are ignored.
std::vector<CompositionRow> composition_by_step(const std::vector<TrajectoryRecord>& records);

}  // namespace tspo
