#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "banditfuzz/bandit.hpp"
#include "banditfuzz/rng.hpp"

namespace bfz {

enum class EnvKind { kStationary, kDecaying, kAbruptChange, kDepletingPool };

const char* env_kind_name(EnvKind kind);

struct EnvironmentSpec {
  std::string name;
  EnvKind kind = EnvKind::kStationary;
  std::vector<double> means;             // per-arm success probabilities
  double decay_rate = 1.0;               // decaying: mean_k(t) = mean_k * rate^(t-1)
  std::uint64_t change_at = 0;           // abrupt: 0 means T/2
  std::vector<double> post_means;        // abrupt: means from change_at on
  std::vector<std::uint64_t> pools;      // depleting: empty means ceil(mean_k*T/10)

  void validate() const;
};

// A realized environment: one Bernoulli draw per (round, arm), fixed at
// construction from env_seed, so every algorithm faces the same realization.
// Depleting pools are consumed as rewards are actually collected.
class RewardEnvironment {
 public:
  RewardEnvironment(const EnvironmentSpec& spec, std::uint64_t rounds, std::uint64_t env_seed);

  int k() const { return static_cast<int>(spec_.means.size()); }
  std::uint64_t rounds() const { return rounds_; }
  const EnvironmentSpec& spec() const { return spec_; }

  double expected_reward(std::uint64_t t, int arm) const;  // t in [1, rounds]
  double best_expected(std::uint64_t t) const;
  double realize(std::uint64_t t, int arm);  // consumes pool on depleting envs
  std::uint64_t pool_remaining(int arm) const;

 private:
  double mean_at(std::uint64_t t, int arm) const;

  EnvironmentSpec spec_;
  std::uint64_t rounds_;
  std::vector<std::uint8_t> draws_;  // rounds x k pre-drawn rewards
  std::vector<std::uint64_t> pools_;
};

struct SimulationTrace {
  std::vector<int> arms;
  std::vector<std::uint8_t> rewards;
  std::vector<double> chosen_expected;  // at decision time
  std::vector<double> best_expected;

  std::uint64_t length() const { return arms.size(); }
  double terminal_reward() const;
};

SimulationTrace run_simulation(RewardEnvironment& env, const BanditConfig& config,
                               std::uint64_t rounds, RngStream& rng);

// Running sum of (best expected - chosen expected); non-decreasing.
std::vector<double> cumulative_regret(const SimulationTrace& trace);

struct ScoreBoard {
  std::vector<std::string> algorithms;              // columns
  std::vector<std::string> environments;            // rows
  std::vector<std::vector<double>> medians;         // [env][alg]
  std::vector<std::vector<double>> scores;          // 100 * median / best median
  std::vector<std::vector<double>> ranks;           // 1 = best, ties averaged
  std::vector<double> score_avg;                    // per algorithm
  std::vector<double> rank_avg;

  double score_avg_of(const std::string& algorithm) const;
  double rank_avg_of(const std::string& algorithm) const;
  std::string render_table() const;  // algorithms as columns, Rank/Score Avg rows
  std::string to_csv() const;
};

ScoreBoard score_and_rank(const std::vector<std::string>& algorithms,
                          const std::vector<std::string>& environments,
                          const std::vector<std::vector<double>>& medians);

struct ComparisonRow {
  std::string environment;
  std::string algorithm;
  int run = 0;
  double terminal_reward = 0.0;
  double terminal_regret = 0.0;
};

struct ComparisonResult {
  ScoreBoard board;
  std::vector<ComparisonRow> rows;

  std::string rows_csv() const;
};

// Full factorial sweep. Environment realizations depend only on
// (environment, run), so algorithm comparisons are counterfactually paired.
ComparisonResult run_comparison(const std::vector<EnvironmentSpec>& environments,
                                const std::vector<BanditConfig>& algorithms, int runs_per_cell,
                                std::uint64_t rounds, std::uint64_t seed_base);

// Built-in suites: "stationary", "decaying", "abrupt", "depleting", "all".
std::vector<EnvironmentSpec> builtin_environment_suite(const std::string& name);

}  // namespace bfz
