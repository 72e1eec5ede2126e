#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "banditfuzz/bandit.hpp"
#include "banditfuzz/corpus.hpp"
#include "banditfuzz/errors.hpp"
#include "banditfuzz/mutation.hpp"
#include "banditfuzz/puts.hpp"
#include "banditfuzz/rng.hpp"

namespace bfz {

enum class FuzzMode { kSlopt, kConventional };

const char* mode_name(FuzzMode mode);
FuzzMode mode_from_name(const std::string& name);

struct CampaignConfig {
  FuzzMode mode = FuzzMode::kSlopt;
  BanditConfig bandit;
  std::uint64_t exec_budget = 0;        // generated-input executions
  double wall_clock_budget_s = 0.0;     // 0 disables the wall-clock cutoff
  std::uint64_t rng_seed = 0;
  std::size_t max_input_len = kDefaultMaxInputLen;
  std::uint32_t base_energy = 128;

  void validate() const;  // throws ConfigError
};

// One cumulative statistics row, emitted every 1000 executions.
struct StatsRecord {
  std::uint64_t execs = 0;
  std::uint64_t edges = 0;
  std::uint64_t queue = 0;
  std::uint64_t crashes = 0;
  std::array<std::uint64_t, kOperatorCount> op_selections{};
  std::array<std::array<std::uint64_t, kBatchArmCount>, kGroupCount> batch_selections{};

  bool operator==(const StatsRecord& other) const = default;
};

struct CampaignReport {
  std::string put_name;
  FuzzMode mode = FuzzMode::kSlopt;
  Algorithm algorithm = Algorithm::kThompson;
  std::uint64_t rng_seed = 0;
  std::uint64_t execs = 0;
  std::uint64_t final_edges = 0;
  std::uint64_t queue_size = 0;
  std::uint64_t crash_count = 0;
  std::vector<StatsRecord> series;  // boundary rows plus a final partial row

  std::string to_json() const;
};

// Number of inputs generated from `seed` before the queue moves on: the
// base energy, doubled for seeds whose discovery-time edge count beats the
// corpus median, clamped to [16, 1024].
std::uint32_t decide_energy(const Seed& seed, const Corpus& corpus, const CampaignConfig& config);

// The campaign loop: select seed, decide energy, then per generated input
// mutate / execute / evaluate / reward / save, until the budget is spent.
class Campaign {
 public:
  Campaign(const PutHarness& put, const std::vector<std::vector<std::uint8_t>>& initial_seeds,
           const CampaignConfig& config, Dictionary dictionary = {});

  void run();
  void extend_budget(std::uint64_t extra_execs);

  CampaignReport report() const;
  const Corpus& corpus() const { return corpus_; }
  const std::optional<SloptState>& slopt_state() const { return slopt_; }
  const RngStream& rng() const { return rng_; }
  const CampaignConfig& config() const { return config_; }
  const std::string& put_name() const { return put_->name; }
  std::uint64_t execs() const { return execs_; }

  std::vector<std::uint8_t> snapshot_bytes() const;
  void save_snapshot(const std::string& path) const;
  static Campaign load_snapshot_bytes(const std::vector<std::uint8_t>& bytes);
  static Campaign load_snapshot(const std::string& path);

  // Writes queue/, crashes/, stats.jsonl, report.json and snapshot.bin.
  void write_output_dir(const std::string& dir) const;

  bool state_equals(const Campaign& other) const;

 private:
  Campaign() = default;
  void step();
  void push_stats_row();
  StatsRecord current_stats() const;

  const PutHarness* put_ = nullptr;
  CampaignConfig config_;
  Dictionary dictionary_;
  RngStream rng_;
  Corpus corpus_{0};
  std::optional<SloptState> slopt_;
  std::uint64_t execs_ = 0;
  std::uint32_t initial_seed_count_ = 0;

  // Loop position, carried across snapshots so a resumed campaign continues
  // mid-energy exactly where it stopped.
  std::uint32_t current_seed_id_ = 0;
  std::uint32_t energy_remaining_ = 0;

  std::array<std::uint64_t, kOperatorCount> op_selections_{};
  std::array<std::array<std::uint64_t, kBatchArmCount>, kGroupCount> batch_selections_{};
  std::vector<StatsRecord> series_;
};

CampaignReport run_campaign(const PutHarness& put,
                            const std::vector<std::vector<std::uint8_t>>& initial_seeds,
                            const CampaignConfig& config, Dictionary dictionary = {});

// Spec-level snapshot surface: persist / recover corpus and bandit wiring
// (together with the full campaign position owned by Campaign).
void save_snapshot(const Campaign& campaign, const std::string& path);
Campaign load_snapshot(const std::string& path);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace bfz
