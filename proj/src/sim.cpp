#include "banditfuzz/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "banditfuzz/errors.hpp"

namespace bfz {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return splitmix64(splitmix64(splitmix64(base ^ a) + b) + c);
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

const char* env_kind_name(EnvKind kind) {
  switch (kind) {
    case EnvKind::kStationary: return "stationary";
    case EnvKind::kDecaying: return "decaying";
    case EnvKind::kAbruptChange: return "abrupt_change";
    case EnvKind::kDepletingPool: return "depleting_pool";
  }
  throw std::invalid_argument("unknown environment kind");
}

void EnvironmentSpec::validate() const {
  if (means.empty()) throw ConfigError("environment " + name + ": needs at least one arm");
  for (double m : means) {
    if (!(m >= 0.0 && m <= 1.0))
      throw ConfigError("environment " + name + ": means must lie in [0,1]");
  }
  if (kind == EnvKind::kDecaying && !(decay_rate > 0.0 && decay_rate <= 1.0))
    throw ConfigError("environment " + name + ": decay_rate must be in (0,1]");
  if (kind == EnvKind::kAbruptChange) {
    if (post_means.size() != means.size())
      throw ConfigError("environment " + name + ": post_means must match arm count");
    for (double m : post_means) {
      if (!(m >= 0.0 && m <= 1.0))
        throw ConfigError("environment " + name + ": post_means must lie in [0,1]");
    }
  }
  if (kind == EnvKind::kDepletingPool && !pools.empty() && pools.size() != means.size())
    throw ConfigError("environment " + name + ": pools must match arm count");
}

RewardEnvironment::RewardEnvironment(const EnvironmentSpec& spec, std::uint64_t rounds,
                                     std::uint64_t env_seed)
    : spec_(spec), rounds_(rounds) {
  spec_.validate();
  if (rounds_ == 0) throw ConfigError("environment rounds must be >= 1");
  if (spec_.kind == EnvKind::kAbruptChange && spec_.change_at == 0)
    spec_.change_at = rounds_ / 2;
  const int arms = k();
  if (spec_.kind == EnvKind::kDepletingPool) {
    if (spec_.pools.empty()) {
      pools_.reserve(arms);
      for (double m : spec_.means)
        pools_.push_back(static_cast<std::uint64_t>(
            std::ceil(m * static_cast<double>(rounds_) / 10.0)));
    } else {
      pools_ = spec_.pools;
    }
  }
  RngStream rng(env_seed);
  draws_.resize(rounds_ * static_cast<std::uint64_t>(arms));
  for (std::uint64_t t = 1; t <= rounds_; ++t) {
    for (int a = 0; a < arms; ++a) {
      // Depleting pools draw at the base mean; the pool gates consumption.
      const double m = spec_.kind == EnvKind::kDepletingPool ? spec_.means[a] : mean_at(t, a);
      draws_[(t - 1) * arms + a] = rng.uniform01() < m ? 1 : 0;
    }
  }
}

double RewardEnvironment::mean_at(std::uint64_t t, int arm) const {
  switch (spec_.kind) {
    case EnvKind::kStationary:
    case EnvKind::kDepletingPool:
      return spec_.means[arm];
    case EnvKind::kDecaying:
      return spec_.means[arm] * std::pow(spec_.decay_rate, static_cast<double>(t - 1));
    case EnvKind::kAbruptChange:
      return t >= spec_.change_at ? spec_.post_means[arm] : spec_.means[arm];
  }
  return 0.0;
}

double RewardEnvironment::expected_reward(std::uint64_t t, int arm) const {
  if (t < 1 || t > rounds_) throw std::out_of_range("RewardEnvironment: round out of range");
  if (arm < 0 || arm >= k()) throw std::out_of_range("RewardEnvironment: arm out of range");
  if (spec_.kind == EnvKind::kDepletingPool)
    return pools_[arm] > 0 ? spec_.means[arm] : 0.0;
  return mean_at(t, arm);
}

double RewardEnvironment::best_expected(std::uint64_t t) const {
  double best = 0.0;
  for (int a = 0; a < k(); ++a) best = std::max(best, expected_reward(t, a));
  return best;
}

double RewardEnvironment::realize(std::uint64_t t, int arm) {
  if (t < 1 || t > rounds_) throw std::out_of_range("RewardEnvironment: round out of range");
  if (arm < 0 || arm >= k()) throw std::out_of_range("RewardEnvironment: arm out of range");
  double r = draws_[(t - 1) * static_cast<std::uint64_t>(k()) + arm];
  if (spec_.kind == EnvKind::kDepletingPool) {
    if (pools_[arm] == 0) {
      r = 0.0;
    } else if (r > 0.0) {
      pools_[arm] -= 1;
    }
  }
  return r;
}

std::uint64_t RewardEnvironment::pool_remaining(int arm) const {
  if (spec_.kind != EnvKind::kDepletingPool) return 0;
  return pools_.at(arm);
}

double SimulationTrace::terminal_reward() const {
  return std::accumulate(rewards.begin(), rewards.end(), 0.0);
}

SimulationTrace run_simulation(RewardEnvironment& env, const BanditConfig& config,
                               std::uint64_t rounds, RngStream& rng) {
  if (rounds < 1) throw ConfigError("run_simulation: rounds must be >= 1");
  if (rounds > env.rounds())
    throw ConfigError("run_simulation: rounds exceed the environment realization");
  BanditInstance instance = create_instance(config, env.k());
  SimulationTrace trace;
  trace.arms.reserve(rounds);
  trace.rewards.reserve(rounds);
  trace.chosen_expected.reserve(rounds);
  trace.best_expected.reserve(rounds);
  for (std::uint64_t t = 1; t <= rounds; ++t) {
    const int arm = instance.select_arm(rng);
    trace.best_expected.push_back(env.best_expected(t));
    trace.chosen_expected.push_back(env.expected_reward(t, arm));
    const double r = env.realize(t, arm);
    instance.reward(arm, r > 0.0);
    trace.arms.push_back(arm);
    trace.rewards.push_back(r > 0.0 ? 1 : 0);
  }
  return trace;
}

std::vector<double> cumulative_regret(const SimulationTrace& trace) {
  std::vector<double> series;
  series.reserve(trace.length());
  double acc = 0.0;
  for (std::size_t i = 0; i < trace.length(); ++i) {
    acc += trace.best_expected[i] - trace.chosen_expected[i];
    series.push_back(acc);
  }
  return series;
}

ScoreBoard score_and_rank(const std::vector<std::string>& algorithms,
                          const std::vector<std::string>& environments,
                          const std::vector<std::vector<double>>& medians) {
  if (environments.empty()) throw ConfigError("score_and_rank: need at least one environment");
  if (algorithms.size() < 2) throw ConfigError("score_and_rank: need at least two algorithms");
  if (medians.size() != environments.size())
    throw ConfigError("score_and_rank: median rows must match environments");
  ScoreBoard board;
  board.algorithms = algorithms;
  board.environments = environments;
  board.medians = medians;
  const std::size_t n_alg = algorithms.size();
  board.scores.assign(environments.size(), std::vector<double>(n_alg, 0.0));
  board.ranks.assign(environments.size(), std::vector<double>(n_alg, 0.0));
  board.score_avg.assign(n_alg, 0.0);
  board.rank_avg.assign(n_alg, 0.0);

  for (std::size_t e = 0; e < environments.size(); ++e) {
    const std::vector<double>& row = medians[e];
    if (row.size() != n_alg)
      throw ConfigError("score_and_rank: median row width must match algorithms");
    const double best = *std::max_element(row.begin(), row.end());
    if (!(best > 0.0))
      throw ConfigError("score_and_rank: best median must be positive in " + environments[e]);
    for (std::size_t a = 0; a < n_alg; ++a) board.scores[e][a] = 100.0 * row[a] / best;

    // Rank 1 is the highest median; tied values share the average position.
    std::vector<std::size_t> order(n_alg);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&row](std::size_t x, std::size_t y) { return row[x] > row[y]; });
    std::size_t i = 0;
    while (i < n_alg) {
      std::size_t j = i;
      while (j + 1 < n_alg && row[order[j + 1]] == row[order[i]]) ++j;
      const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
      for (std::size_t p = i; p <= j; ++p) board.ranks[e][order[p]] = shared;
      i = j + 1;
    }
  }
  for (std::size_t a = 0; a < n_alg; ++a) {
    double score_sum = 0.0;
    double rank_sum = 0.0;
    for (std::size_t e = 0; e < environments.size(); ++e) {
      score_sum += board.scores[e][a];
      rank_sum += board.ranks[e][a];
    }
    board.score_avg[a] = score_sum / static_cast<double>(environments.size());
    board.rank_avg[a] = rank_sum / static_cast<double>(environments.size());
  }
  return board;
}

double ScoreBoard::score_avg_of(const std::string& algorithm) const {
  for (std::size_t a = 0; a < algorithms.size(); ++a) {
    if (algorithms[a] == algorithm) return score_avg[a];
  }
  throw std::out_of_range("ScoreBoard: unknown algorithm " + algorithm);
}

double ScoreBoard::rank_avg_of(const std::string& algorithm) const {
  for (std::size_t a = 0; a < algorithms.size(); ++a) {
    if (algorithms[a] == algorithm) return rank_avg[a];
  }
  throw std::out_of_range("ScoreBoard: unknown algorithm " + algorithm);
}

std::string ScoreBoard::render_table() const {
  std::ostringstream os;
  os << "          ";
  for (const std::string& a : algorithms) {
    os << " ";
    os.width(9);
    os << a;
  }
  os << "\n";
  const auto emit_row = [&os, this](const char* label, const std::vector<double>& values,
                                    const char* format) {
    os << label;
    for (double v : values) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), format, v);
      os << " ";
      os.width(9);
      os << buf;
    }
    os << "\n";
  };
  emit_row("Rank Avg  ", rank_avg, "%.2f");
  emit_row("Score Avg ", score_avg, "%.2f");
  return os.str();
}

std::string ScoreBoard::to_csv() const {
  std::ostringstream os;
  os << "environment,algorithm,median,score,rank\n";
  for (std::size_t e = 0; e < environments.size(); ++e) {
    for (std::size_t a = 0; a < algorithms.size(); ++a) {
      os << environments[e] << "," << algorithms[a] << "," << fmt(medians[e][a]) << ","
         << fmt(scores[e][a]) << "," << fmt(ranks[e][a]) << "\n";
    }
  }
  for (std::size_t a = 0; a < algorithms.size(); ++a) {
    os << "(avg)," << algorithms[a] << ",," << fmt(score_avg[a]) << "," << fmt(rank_avg[a])
       << "\n";
  }
  return os.str();
}

std::string ComparisonResult::rows_csv() const {
  std::ostringstream os;
  os << "environment,algorithm,run,terminal_reward,terminal_regret\n";
  for (const ComparisonRow& row : rows) {
    os << row.environment << "," << row.algorithm << "," << row.run << ","
       << fmt(row.terminal_reward) << "," << fmt(row.terminal_regret) << "\n";
  }
  return os.str();
}

ComparisonResult run_comparison(const std::vector<EnvironmentSpec>& environments,
                                const std::vector<BanditConfig>& algorithms, int runs_per_cell,
                                std::uint64_t rounds, std::uint64_t seed_base) {
  if (environments.empty()) throw ConfigError("run_comparison: need at least one environment");
  if (algorithms.empty()) throw ConfigError("run_comparison: need at least one algorithm");
  if (runs_per_cell < 1) throw ConfigError("run_comparison: runs_per_cell must be >= 1");

  ComparisonResult result;
  std::vector<std::string> alg_names;
  alg_names.reserve(algorithms.size());
  for (const BanditConfig& cfg : algorithms) alg_names.emplace_back(algorithm_name(cfg.algorithm));
  std::vector<std::string> env_names;
  env_names.reserve(environments.size());
  for (const EnvironmentSpec& env : environments) env_names.push_back(env.name);

  std::vector<std::vector<double>> medians(environments.size(),
                                           std::vector<double>(algorithms.size(), 0.0));
  for (std::size_t e = 0; e < environments.size(); ++e) {
    for (std::size_t a = 0; a < algorithms.size(); ++a) {
      std::vector<double> terminals;
      terminals.reserve(runs_per_cell);
      for (int run = 0; run < runs_per_cell; ++run) {
        // Same (environment, run) seed for every algorithm: paired realizations.
        RewardEnvironment env(environments[e], rounds, mix_seed(seed_base, e, run, 0));
        RngStream rng(mix_seed(seed_base, e, run, a + 1));
        const SimulationTrace trace = run_simulation(env, algorithms[a], rounds, rng);
        const std::vector<double> regret = cumulative_regret(trace);
        ComparisonRow row;
        row.environment = environments[e].name;
        row.algorithm = alg_names[a];
        row.run = run;
        row.terminal_reward = trace.terminal_reward();
        row.terminal_regret = regret.empty() ? 0.0 : regret.back();
        terminals.push_back(row.terminal_reward);
        result.rows.push_back(std::move(row));
      }
      medians[e][a] = median_of(terminals);
    }
  }
  result.board = score_and_rank(alg_names, env_names, medians);
  return result;
}

std::vector<EnvironmentSpec> builtin_environment_suite(const std::string& name) {
  const auto env = [](std::string env_name, EnvKind kind, std::vector<double> means) {
    EnvironmentSpec spec;
    spec.name = std::move(env_name);
    spec.kind = kind;
    spec.means = std::move(means);
    return spec;
  };
  if (name == "stationary") {
    return {
        env("stat_onegood", EnvKind::kStationary, {0.7, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1}),
        env("stat_spread", EnvKind::kStationary, {0.8, 0.6, 0.5, 0.4, 0.3, 0.2, 0.15, 0.1}),
        env("stat_close", EnvKind::kStationary, {0.55, 0.5, 0.45, 0.5, 0.4, 0.35, 0.45, 0.3}),
        env("stat_sparse", EnvKind::kStationary, {0.15, 0.05, 0.02, 0.08, 0.01, 0.03, 0.1, 0.04}),
        env("stat_pair", EnvKind::kStationary, {0.9, 0.1}),
    };
  }
  if (name == "decaying") {
    auto fast = env("decay_fast", EnvKind::kDecaying, {0.8, 0.5, 0.3, 0.2, 0.15, 0.1, 0.05, 0.02});
    fast.decay_rate = 0.9995;
    auto slow = env("decay_slow", EnvKind::kDecaying, {0.6, 0.5, 0.4, 0.3, 0.25, 0.2, 0.1, 0.05});
    slow.decay_rate = 0.99995;
    auto steep = env("decay_steep", EnvKind::kDecaying, {0.9, 0.7, 0.5, 0.3});
    steep.decay_rate = 0.999;
    return {std::move(fast), std::move(slow), std::move(steep)};
  }
  if (name == "abrupt") {
    auto swap = env("abrupt_swap", EnvKind::kAbruptChange,
                    {0.8, 0.2, 0.15, 0.1, 0.1, 0.05, 0.05, 0.02});
    swap.post_means = {0.1, 0.8, 0.15, 0.1, 0.1, 0.05, 0.05, 0.02};
    auto crash = env("abrupt_crash", EnvKind::kAbruptChange,
                     {0.9, 0.5, 0.4, 0.3, 0.2, 0.15, 0.1, 0.05});
    crash.post_means = {0.05, 0.5, 0.4, 0.3, 0.2, 0.15, 0.1, 0.05};
    auto rise = env("abrupt_rise", EnvKind::kAbruptChange, {0.4, 0.3, 0.2, 0.1});
    rise.post_means = {0.4, 0.3, 0.2, 0.9};
    return {std::move(swap), std::move(crash), std::move(rise)};
  }
  if (name == "depleting") {
    return {
        env("dep_uniformish", EnvKind::kDepletingPool,
            {0.5, 0.45, 0.4, 0.35, 0.3, 0.25, 0.2, 0.15}),
        env("dep_onegood", EnvKind::kDepletingPool,
            {0.8, 0.15, 0.12, 0.1, 0.08, 0.06, 0.04, 0.02}),
        env("dep_pair", EnvKind::kDepletingPool, {0.7, 0.65, 0.2, 0.15, 0.1, 0.08, 0.05, 0.03}),
        env("dep_sparse", EnvKind::kDepletingPool, {0.3, 0.25, 0.2, 0.15, 0.1, 0.08, 0.05, 0.03}),
        env("dep_rich", EnvKind::kDepletingPool, {0.9, 0.7, 0.5, 0.4, 0.3, 0.25, 0.2, 0.1}),
        env("dep_flat", EnvKind::kDepletingPool,
            {0.4, 0.38, 0.36, 0.34, 0.32, 0.3, 0.28, 0.26}),
    };
  }
  if (name == "all") {
    std::vector<EnvironmentSpec> all;
    for (const char* suite : {"stationary", "decaying", "abrupt", "depleting"}) {
      auto part = builtin_environment_suite(suite);
      all.insert(all.end(), std::make_move_iterator(part.begin()),
                 std::make_move_iterator(part.end()));
    }
    return all;
  }
  throw ConfigError("unknown environment suite: " + name);
}

}  // namespace bfz
