#include "banditfuzz/analyze.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "banditfuzz/errors.hpp"

namespace bfz {

namespace {

using nlohmann::json;

StatsRecord record_from_json(const json& j, int line_no) {
  const auto fail = [line_no](const std::string& what) -> StatsRecord {
    throw ConfigError("stats line " + std::to_string(line_no) + ": " + what);
  };
  StatsRecord row;
  if (!j.is_object()) return fail("expected a JSON object");
  for (const char* key : {"execs", "edges", "queue", "crashes", "op_sel", "batch_sel"}) {
    if (!j.contains(key)) return fail(std::string("missing field ") + key);
  }
  try {
    row.execs = j.at("execs").get<std::uint64_t>();
    row.edges = j.at("edges").get<std::uint64_t>();
    row.queue = j.at("queue").get<std::uint64_t>();
    row.crashes = j.at("crashes").get<std::uint64_t>();
    const auto& ops = j.at("op_sel");
    if (!ops.is_array() || ops.size() != kOperatorCount)
      return fail("op_sel must hold " + std::to_string(kOperatorCount) + " counts");
    for (int i = 0; i < kOperatorCount; ++i) row.op_selections[i] = ops[i].get<std::uint64_t>();
    const auto& grid = j.at("batch_sel");
    if (!grid.is_array() || grid.size() != kGroupCount)
      return fail("batch_sel must hold " + std::to_string(kGroupCount) + " rows");
    for (int g = 0; g < kGroupCount; ++g) {
      if (!grid[g].is_array() || grid[g].size() != kBatchArmCount)
        return fail("batch_sel rows must hold " + std::to_string(kBatchArmCount) + " counts");
      for (int t = 0; t < kBatchArmCount; ++t)
        row.batch_selections[g][t] = grid[g][t].get<std::uint64_t>();
    }
  } catch (const json::exception& e) {
    return fail(e.what());
  }
  return row;
}

}  // namespace

const std::array<const char*, kGroupCount> kGroupLabels = {
    "[0,10^2)", "[10^2,10^3)", "[10^3,10^4)", "[10^4,10^5)", "[10^5,inf)"};

int percent_round_half_up(std::uint64_t part, std::uint64_t total) {
  if (total == 0) return 0;
  return static_cast<int>(
      std::floor(100.0 * static_cast<double>(part) / static_cast<double>(total) + 0.5));
}

std::vector<StatsRecord> parse_stats_jsonl(const std::string& text) {
  std::vector<StatsRecord> series;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ConfigError("stats line " + std::to_string(line_no) + ": " + e.what());
    }
    series.push_back(record_from_json(j, line_no));
  }
  if (series.empty()) throw ConfigError("stats file holds no records");
  return series;
}

AnalyzeTables analyze_series(const std::vector<StatsRecord>& series) {
  if (series.empty()) throw ConfigError("cannot analyze an empty series");
  AnalyzeTables tables;
  const StatsRecord& last = series.back();  // counters are cumulative
  tables.batch_counts = last.batch_selections;
  tables.operator_counts = last.op_selections;

  std::array<std::uint64_t, kBatchArmCount> overall{};
  for (int g = 0; g < kGroupCount; ++g) {
    std::uint64_t row_total = 0;
    for (int t = 0; t < kBatchArmCount; ++t) row_total += tables.batch_counts[g][t];
    for (int t = 0; t < kBatchArmCount; ++t) {
      tables.batch_pct[g][t] = percent_round_half_up(tables.batch_counts[g][t], row_total);
      overall[t] += tables.batch_counts[g][t];
    }
  }
  std::uint64_t overall_total = 0;
  for (std::uint64_t v : overall) overall_total += v;
  for (int t = 0; t < kBatchArmCount; ++t)
    tables.overall_pct[t] = percent_round_half_up(overall[t], overall_total);

  std::uint64_t unit = 0;
  std::uint64_t chunk = 0;
  for (const MutationOperator& op : operator_catalog()) {
    if (op.category == OperatorCategory::kUnit)
      unit += tables.operator_counts[op.id];
    else
      chunk += tables.operator_counts[op.id];
  }
  tables.unit_pct = percent_round_half_up(unit, unit + chunk);
  tables.chunk_pct = percent_round_half_up(chunk, unit + chunk);

  tables.coverage.reserve(series.size());
  for (const StatsRecord& row : series) tables.coverage.emplace_back(row.execs, row.edges);
  return tables;
}

AnalyzeTables analyze_stats_file(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  return analyze_series(parse_stats_jsonl(std::string(bytes.begin(), bytes.end())));
}

AnalyzeTables analyze_snapshot_file(const std::string& path) {
  const Campaign campaign = Campaign::load_snapshot(path);
  return analyze_series(campaign.report().series);
}

std::string render_batch_table(const AnalyzeTables& tables, bool csv) {
  std::ostringstream os;
  const char* cols[kBatchArmCount] = {"1", "2", "2^2", "2^3", "2^4", "2^5", "2^6"};
  if (csv) {
    os << "group";
    for (const char* c : cols) os << "," << c;
    os << "\n";
    for (int g = 0; g < kGroupCount; ++g) {
      os << kGroupLabels[g];
      for (int t = 0; t < kBatchArmCount; ++t) os << "," << tables.batch_pct[g][t];
      os << "\n";
    }
    os << "Overall";
    for (int t = 0; t < kBatchArmCount; ++t) os << "," << tables.overall_pct[t];
    os << "\n";
    return os.str();
  }
  os << "group        ";
  for (const char* c : cols) {
    os.width(6);
    os << c;
  }
  os << "\n";
  const auto emit = [&os](const char* label, const std::array<int, kBatchArmCount>& row) {
    os << label;
    for (int v : row) {
      os.width(6);
      os << v;
    }
    os << "\n";
  };
  emit("[0,10^2)     ", tables.batch_pct[0]);
  emit("[10^2,10^3)  ", tables.batch_pct[1]);
  emit("[10^3,10^4)  ", tables.batch_pct[2]);
  emit("[10^4,10^5)  ", tables.batch_pct[3]);
  emit("[10^5,inf)   ", tables.batch_pct[4]);
  emit("Overall      ", tables.overall_pct);
  return os.str();
}

std::string render_operator_table(const AnalyzeTables& tables, bool csv) {
  std::ostringstream os;
  if (csv) {
    os << "unit,chunk\n" << tables.unit_pct << "," << tables.chunk_pct << "\n";
    os << "operator,selections\n";
    for (const MutationOperator& op : operator_catalog())
      os << op.name << "," << tables.operator_counts[op.id] << "\n";
    return os.str();
  }
  os << "category     unit  chunk\n";
  os << "selected %  ";
  os.width(5);
  os << tables.unit_pct;
  os.width(7);
  os << tables.chunk_pct;
  os << "\n\nper operator:\n";
  for (const MutationOperator& op : operator_catalog()) {
    os << "  ";
    os.width(26);
    os << std::left << op.name << std::right << tables.operator_counts[op.id] << "\n";
  }
  return os.str();
}

std::string render_coverage_csv(const AnalyzeTables& tables) {
  std::ostringstream os;
  os << "execs,edges\n";
  for (const auto& [execs, edges] : tables.coverage) os << execs << "," << edges << "\n";
  return os.str();
}

}  // namespace bfz
