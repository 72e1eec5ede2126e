#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "banditfuzz/analyze.hpp"
#include "banditfuzz/campaign.hpp"
#include "banditfuzz/errors.hpp"
#include "banditfuzz/puts.hpp"
#include "banditfuzz/sim.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitInitialSeedCrash = 3;

struct FuzzFlags {
  std::string put;
  std::string seeds_dir;
  std::uint64_t execs = 0;
  std::string mode = "slopt";
  std::string algo = "ts";
  std::uint64_t rng_seed = 0;
  std::string out;
  std::string dict;
  std::uint64_t max_input_len = bfz::kDefaultMaxInputLen;
  double max_seconds = 0.0;
};

struct SimulateFlags {
  std::string algos = "all";
  std::string env = "all";
  int runs = 10;
  std::uint64_t rounds = 10000;
  std::uint64_t rng_seed = 0;
  std::string out;
};

struct AnalyzeFlags {
  std::string stats;
  std::string snapshot;
  std::string format = "table";
  std::string out;
};

struct ReplayFlags {
  std::string snapshot;
  std::uint64_t execs = 0;
  std::string put;
  std::string out;
};

std::vector<std::vector<std::uint8_t>> read_seeds_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw bfz::ConfigError("seeds directory does not exist: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::vector<std::uint8_t>> seeds;
  for (const fs::path& p : files) {
    auto bytes = bfz::read_file_bytes(p.string());
    if (bytes.empty()) throw bfz::ConfigError("initial seed is empty: " + p.string());
    seeds.push_back(std::move(bytes));
  }
  if (seeds.empty()) throw bfz::ConfigError("seeds directory holds no files: " + dir);
  return seeds;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw bfz::ConfigError("cannot write file: " + path.string());
  f << text;
}

bfz::CampaignConfig campaign_config_from(const FuzzFlags& flags) {
  bfz::CampaignConfig config;
  config.mode = bfz::mode_from_name(flags.mode);
  config.bandit.algorithm = bfz::algorithm_from_name(flags.algo);
  config.exec_budget = flags.execs;
  config.wall_clock_budget_s = flags.max_seconds;
  config.rng_seed = flags.rng_seed;
  config.max_input_len = flags.max_input_len;
  return config;
}

int run_fuzz(const FuzzFlags& flags, const std::string& config_echo) {
  // Validate everything before touching the output directory.
  const bfz::PutHarness& put = bfz::find_put_or_throw(flags.put);
  const bfz::CampaignConfig config = campaign_config_from(flags);
  config.validate();
  const auto seeds = read_seeds_dir(flags.seeds_dir);
  bfz::Dictionary dict;
  if (!flags.dict.empty()) dict = bfz::Dictionary::load_file(flags.dict);

  bfz::Campaign campaign(put, seeds, config, std::move(dict));

  fs::create_directories(flags.out);
  write_text(fs::path(flags.out) / "config.toml", config_echo);
  campaign.run();
  campaign.write_output_dir(flags.out);
  std::cout << "done: " << campaign.execs() << " execs, "
            << campaign.corpus().covered_edge_count() << " edges, " << campaign.corpus().size()
            << " seeds, " << campaign.corpus().crashes().size() << " crashes -> " << flags.out
            << "\n";
  return kExitOk;
}

std::vector<bfz::BanditConfig> parse_algos(const std::string& list) {
  std::vector<bfz::BanditConfig> configs;
  if (list == "all") {
    for (bfz::Algorithm a : bfz::all_algorithms()) {
      bfz::BanditConfig cfg;
      cfg.algorithm = a;
      configs.push_back(cfg);
    }
    return configs;
  }
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    bfz::BanditConfig cfg;
    cfg.algorithm = bfz::algorithm_from_name(item);
    configs.push_back(cfg);
  }
  if (configs.empty()) throw bfz::ConfigError("no algorithms given");
  return configs;
}

int run_simulate(const SimulateFlags& flags, const std::string& config_echo) {
  const auto algos = parse_algos(flags.algos);
  const auto envs = bfz::builtin_environment_suite(flags.env);
  if (flags.runs < 1) throw bfz::ConfigError("--runs must be >= 1");
  if (flags.rounds < 1) throw bfz::ConfigError("--T must be >= 1");

  const bfz::ComparisonResult result =
      bfz::run_comparison(envs, algos, flags.runs, flags.rounds, flags.rng_seed);
  const std::string table = result.board.render_table();
  std::cout << table;
  if (!flags.out.empty()) {
    fs::create_directories(flags.out);
    write_text(fs::path(flags.out) / "config.toml", config_echo);
    write_text(fs::path(flags.out) / "raw.csv", result.rows_csv());
    write_text(fs::path(flags.out) / "board.csv", result.board.to_csv());
    write_text(fs::path(flags.out) / "table.txt", table);
  }
  return kExitOk;
}

int run_analyze(const AnalyzeFlags& flags) {
  if (flags.stats.empty() == flags.snapshot.empty())
    throw bfz::ConfigError("pass exactly one of --stats or --snapshot");
  const bfz::AnalyzeTables tables = flags.stats.empty()
                                        ? bfz::analyze_snapshot_file(flags.snapshot)
                                        : bfz::analyze_stats_file(flags.stats);
  if (flags.format != "csv" && flags.format != "table")
    throw bfz::ConfigError("--format must be csv or table");
  const bool csv = flags.format == "csv";
  const std::string batch = bfz::render_batch_table(tables, csv);
  const std::string ops = bfz::render_operator_table(tables, csv);
  const std::string coverage = bfz::render_coverage_csv(tables);
  if (flags.out.empty()) {
    std::cout << "batch size selection %\n"
              << batch << "\noperator selection %\n"
              << ops << "\ncoverage\n"
              << coverage;
  } else {
    fs::create_directories(flags.out);
    const char* ext = csv ? ".csv" : ".txt";
    write_text(fs::path(flags.out) / (std::string("batch_selection") + ext), batch);
    write_text(fs::path(flags.out) / (std::string("operator_selection") + ext), ops);
    write_text(fs::path(flags.out) / "coverage.csv", coverage);
    std::cout << "analysis written to " << flags.out << "\n";
  }
  return kExitOk;
}

int run_replay(const ReplayFlags& flags) {
  if (flags.execs == 0) throw bfz::ConfigError("--execs must be positive");
  bfz::Campaign campaign = bfz::Campaign::load_snapshot(flags.snapshot);
  if (!flags.put.empty() && flags.put != campaign.put_name())
    throw bfz::ConfigError("snapshot was taken on PUT '" + campaign.put_name() +
                           "', not '" + flags.put + "'");
  campaign.extend_budget(flags.execs);
  campaign.run();
  if (!flags.out.empty()) {
    fs::create_directories(flags.out);
    campaign.write_output_dir(flags.out);
  }
  std::cout << "resumed to " << campaign.execs() << " execs, "
            << campaign.corpus().covered_edge_count() << " edges, " << campaign.corpus().size()
            << " seeds, " << campaign.corpus().crashes().size() << " crashes\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coverage-guided fuzzer with bandit-optimized mutation, plus a bandit simulator"};
  app.require_subcommand(1);

  FuzzFlags fuzz_flags;
  CLI::App* fuzz = app.add_subcommand("fuzz", "run a fuzzing campaign on a built-in target");
  fuzz->set_config("--config", "", "read flags from a TOML file");
  fuzz->add_option("--put", fuzz_flags.put, "built-in target name")->required();
  fuzz->add_option("--seeds", fuzz_flags.seeds_dir, "directory of raw initial seed files")
      ->required();
  fuzz->add_option("--execs", fuzz_flags.execs, "execution budget")->required();
  fuzz->add_option("--mode", fuzz_flags.mode, "slopt or conventional")
      ->check(CLI::IsMember({"slopt", "conventional"}));
  fuzz->add_option("--algo", fuzz_flags.algo, "bandit algorithm");
  fuzz->add_option("--rng-seed", fuzz_flags.rng_seed, "random seed");
  fuzz->add_option("--out", fuzz_flags.out, "output directory");
  fuzz->add_option("--dict", fuzz_flags.dict, "dictionary token file");
  fuzz->add_option("--max-input-len", fuzz_flags.max_input_len, "input length cap");
  fuzz->add_option("--max-seconds", fuzz_flags.max_seconds, "optional wall-clock cutoff");

  SimulateFlags sim_flags;
  CLI::App* simulate =
      app.add_subcommand("simulate", "compare bandit algorithms on synthetic environments");
  simulate->set_config("--config", "", "read flags from a TOML file");
  simulate->add_option("--algos", sim_flags.algos, "comma-separated algorithms, or 'all'");
  simulate->add_option("--env", sim_flags.env,
                       "environment suite: stationary, decaying, abrupt, depleting, all");
  simulate->add_option("--runs", sim_flags.runs, "runs per (environment, algorithm) cell");
  simulate->add_option("--T", sim_flags.rounds, "rounds per run");
  simulate->add_option("--rng-seed", sim_flags.rng_seed, "random seed");
  simulate->add_option("--out", sim_flags.out, "output directory for CSVs");

  AnalyzeFlags an_flags;
  CLI::App* analyze = app.add_subcommand("analyze", "selection tables from a finished campaign");
  analyze->add_option("--stats", an_flags.stats, "stats.jsonl from a campaign");
  analyze->add_option("--snapshot", an_flags.snapshot, "snapshot.bin from a campaign");
  analyze->add_option("--format", an_flags.format, "csv or table");
  analyze->add_option("--out", an_flags.out, "directory for rendered files");

  ReplayFlags rp_flags;
  CLI::App* replay = app.add_subcommand("replay", "resume a campaign from a snapshot");
  replay->add_option("--snapshot", rp_flags.snapshot, "snapshot.bin to resume")->required();
  replay->add_option("--execs", rp_flags.execs, "additional execution budget")->required();
  replay->add_option("--put", rp_flags.put, "expected PUT name (cross-checked)");
  replay->add_option("--out", rp_flags.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (fuzz->parsed()) {
      if (fuzz_flags.out.empty()) {
        fuzz_flags.out = "out_" + fuzz_flags.put + "_" + fuzz_flags.mode + "_" + fuzz_flags.algo +
                         "_seed" + std::to_string(fuzz_flags.rng_seed);
      }
      return run_fuzz(fuzz_flags, fuzz->config_to_str(true, false));
    }
    if (simulate->parsed()) return run_simulate(sim_flags, simulate->config_to_str(true, false));
    if (analyze->parsed()) return run_analyze(an_flags);
    if (replay->parsed()) return run_replay(rp_flags);
  } catch (const bfz::InitialSeedCrash& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInitialSeedCrash;
  } catch (const bfz::SnapshotError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitConfigError;
}
