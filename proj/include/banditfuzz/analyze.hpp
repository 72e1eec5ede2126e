#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "banditfuzz/campaign.hpp"

namespace bfz {

// Selection-percentage tables for a finished campaign, in the row/column
// structure of the batch-size and operator-category reports: five seed-size
// group rows plus "Overall", columns for batch sizes 1..64, and a unit/chunk
// operator split. Percentages are integers, rounded half-up.
struct AnalyzeTables {
  std::array<std::array<std::uint64_t, kBatchArmCount>, kGroupCount> batch_counts{};
  std::array<std::array<int, kBatchArmCount>, kGroupCount> batch_pct{};
  std::array<int, kBatchArmCount> overall_pct{};
  std::array<std::uint64_t, kOperatorCount> operator_counts{};
  int unit_pct = 0;
  int chunk_pct = 0;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> coverage;  // (execs, edges)
};

extern const std::array<const char*, kGroupCount> kGroupLabels;

// Parses stats.jsonl text; malformed rows are rejected with their line number.
std::vector<StatsRecord> parse_stats_jsonl(const std::string& text);

AnalyzeTables analyze_series(const std::vector<StatsRecord>& series);
AnalyzeTables analyze_stats_file(const std::string& path);
AnalyzeTables analyze_snapshot_file(const std::string& path);

std::string render_batch_table(const AnalyzeTables& tables, bool csv);
std::string render_operator_table(const AnalyzeTables& tables, bool csv);
std::string render_coverage_csv(const AnalyzeTables& tables);

int percent_round_half_up(std::uint64_t part, std::uint64_t total);

}  // namespace bfz
