#include "banditfuzz/campaign.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace bfz {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::uint64_t kStatsInterval = 1000;
constexpr char kSnapshotMagic[8] = {'B', 'F', 'Z', 'S', 'N', 'A', 'P', '1'};

ordered_json stats_row_json(const StatsRecord& row) {
  ordered_json j;
  j["execs"] = row.execs;
  j["edges"] = row.edges;
  j["queue"] = row.queue;
  j["crashes"] = row.crashes;
  j["op_sel"] = row.op_selections;
  ordered_json grid = ordered_json::array();
  for (const auto& group_row : row.batch_selections) grid.push_back(group_row);
  j["batch_sel"] = std::move(grid);
  return j;
}

std::string padded_id(std::uint64_t id) {
  std::ostringstream os;
  os << std::setw(6) << std::setfill('0') << id;
  return os.str();
}

}  // namespace

const char* mode_name(FuzzMode mode) {
  return mode == FuzzMode::kSlopt ? "slopt" : "conventional";
}

FuzzMode mode_from_name(const std::string& name) {
  if (name == "slopt") return FuzzMode::kSlopt;
  if (name == "conventional") return FuzzMode::kConventional;
  throw ConfigError("unknown mode: " + name + " (expected slopt or conventional)");
}

void CampaignConfig::validate() const {
  if (exec_budget == 0) throw ConfigError("execution budget must be positive");
  if (max_input_len < 1) throw ConfigError("max_input_len must be >= 1");
  if (base_energy < 1) throw ConfigError("base_energy must be >= 1");
  bandit.validate();
}

std::uint32_t decide_energy(const Seed& seed, const Corpus& corpus, const CampaignConfig& config) {
  std::uint64_t energy = config.base_energy;
  if (seed.edge_count_at_discovery > corpus.median_discovery_edge_count()) energy *= 2;
  return static_cast<std::uint32_t>(std::clamp<std::uint64_t>(energy, 16, 1024));
}

Campaign::Campaign(const PutHarness& put,
                   const std::vector<std::vector<std::uint8_t>>& initial_seeds,
                   const CampaignConfig& config, Dictionary dictionary)
    : put_(&put),
      config_(config),
      dictionary_(std::move(dictionary)),
      rng_(config.rng_seed),
      corpus_(put.edge_bound) {
  config_.validate();
  if (initial_seeds.empty()) throw ConfigError("at least one initial seed is required");
  for (std::size_t i = 0; i < initial_seeds.size(); ++i) {
    const auto& bytes = initial_seeds[i];
    if (bytes.empty()) throw ConfigError("initial seed " + std::to_string(i) + " is empty");
    if (bytes.size() > config_.max_input_len)
      throw ConfigError("initial seed " + std::to_string(i) + " exceeds max_input_len");
    const ExecutionResult result = put_->execute(bytes);
    if (result.crashed)
      throw InitialSeedCrash("initial seed " + std::to_string(i) + " crashes " + put_->name +
                             ": " + result.abort_reason.value_or("unknown reason"));
    corpus_.add_seed(bytes, std::nullopt, std::nullopt, 0, result);
  }
  initial_seed_count_ = static_cast<std::uint32_t>(initial_seeds.size());
  if (config_.mode == FuzzMode::kSlopt) slopt_.emplace(config_.bandit, kOperatorCount);
}

StatsRecord Campaign::current_stats() const {
  StatsRecord row;
  row.execs = execs_;
  row.edges = corpus_.covered_edge_count();
  row.queue = corpus_.size();
  row.crashes = corpus_.crashes().size();
  row.op_selections = op_selections_;
  row.batch_selections = batch_selections_;
  return row;
}

void Campaign::push_stats_row() { series_.push_back(current_stats()); }

void Campaign::step() {
  if (energy_remaining_ == 0) {
    const Seed& selected = corpus_.select_seed();
    current_seed_id_ = selected.id;
    energy_remaining_ = decide_energy(selected, corpus_, config_);
  }
  const Seed& seed = corpus_.seed_by_id(current_seed_id_);
  const std::vector<std::uint8_t>& donor =
      corpus_.seeds()[rng_.below(corpus_.size())].bytes;
  MutationAux aux;
  aux.dictionary = &dictionary_;
  aux.donor = &donor;

  std::vector<std::uint8_t> input;
  std::optional<MutationRecord> record;
  ConventionalRecord conv;
  if (config_.mode == FuzzMode::kSlopt) {
    auto [bytes, rec] = random_mutation_slopt(seed.bytes, seed.id, *slopt_, rng_, aux,
                                              config_.max_input_len);
    input = std::move(bytes);
    record = rec;
  } else {
    input = random_mutation_conventional(seed.bytes, rng_, aux, config_.max_input_len, &conv);
  }

  const ExecutionResult result = put_->execute(input);
  execs_ += 1;
  energy_remaining_ -= 1;

  const bool valuable = corpus_.is_input_valuable(result);
  if (record) {
    reward_choices(*slopt_, *record, valuable);
    op_selections_[record->operator_id] += 1;
    batch_selections_[record->group][record->exponent] += 1;
  } else {
    batch_selections_[conv.group][conv.exponent] += 1;
    for (int op = 0; op < kOperatorCount; ++op)
      op_selections_[op] += conv.operator_applications[op];
  }

  if (valuable) corpus_.add_seed(std::move(input), seed.id, record, execs_, result);
  if (result.crashed) {
    // `input` may have been moved into the queue; re-read it from there.
    const auto& bytes = valuable ? corpus_.seeds().back().bytes : input;
    corpus_.add_crash(bytes, result, execs_);
  }

  if (execs_ % kStatsInterval == 0) push_stats_row();
}

void Campaign::run() {
  const auto started = std::chrono::steady_clock::now();
  while (execs_ < config_.exec_budget) {
    step();
    if (config_.wall_clock_budget_s > 0.0 && (execs_ & 1023) == 0) {
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
      if (elapsed.count() >= config_.wall_clock_budget_s) break;
    }
  }
}

void Campaign::extend_budget(std::uint64_t extra_execs) { config_.exec_budget += extra_execs; }

CampaignReport Campaign::report() const {
  CampaignReport rep;
  rep.put_name = put_->name;
  rep.mode = config_.mode;
  rep.algorithm = config_.bandit.algorithm;
  rep.rng_seed = config_.rng_seed;
  rep.execs = execs_;
  rep.final_edges = corpus_.covered_edge_count();
  rep.queue_size = corpus_.size();
  rep.crash_count = corpus_.crashes().size();
  rep.series = series_;
  if (execs_ % kStatsInterval != 0 || series_.empty()) rep.series.push_back(current_stats());
  return rep;
}

std::string CampaignReport::to_json() const {
  ordered_json j;
  j["put"] = put_name;
  j["mode"] = mode_name(mode);
  j["algo"] = algorithm_name(algorithm);
  j["rng_seed"] = rng_seed;
  j["execs"] = execs;
  j["final_edges"] = final_edges;
  j["queue"] = queue_size;
  j["crashes"] = crash_count;
  ordered_json rows = ordered_json::array();
  for (const StatsRecord& row : series) rows.push_back(stats_row_json(row));
  j["series"] = std::move(rows);
  return j.dump(2) + "\n";
}

CampaignReport run_campaign(const PutHarness& put,
                            const std::vector<std::vector<std::uint8_t>>& initial_seeds,
                            const CampaignConfig& config, Dictionary dictionary) {
  Campaign campaign(put, initial_seeds, config, std::move(dictionary));
  campaign.run();
  return campaign.report();
}

std::vector<std::uint8_t> Campaign::snapshot_bytes() const {
  BinWriter meta;
  meta.str(put_->name);
  meta.u8(config_.mode == FuzzMode::kSlopt ? 1 : 0);
  meta.u64(config_.exec_budget);
  meta.f64(config_.wall_clock_budget_s);
  meta.u64(config_.rng_seed);
  meta.u64(config_.max_input_len);
  meta.u32(config_.base_energy);
  meta.u32(static_cast<std::uint32_t>(config_.bandit.algorithm));
  meta.f64(config_.bandit.c);
  meta.f64(config_.bandit.prior_alpha);
  meta.f64(config_.bandit.prior_beta);
  meta.f64(config_.bandit.gamma);
  meta.u32(static_cast<std::uint32_t>(config_.bandit.adwin_m));
  meta.f64(config_.bandit.adwin_delta);
  meta.f64(config_.bandit.exp3pp_alpha);
  meta.f64(config_.bandit.exp3pp_beta);
  meta.f64(config_.bandit.dbe_temperature);
  meta.f64(config_.bandit.dbe_gamma);
  meta.u64(dictionary_.tokens.size());
  for (const auto& tok : dictionary_.tokens) meta.blob(tok);

  BinWriter loop;
  loop.u64(execs_);
  loop.u32(initial_seed_count_);
  loop.u32(current_seed_id_);
  loop.u32(energy_remaining_);

  BinWriter rng;
  rng.str(rng_.serialize());

  BinWriter corpus;
  corpus_.save(corpus);

  BinWriter slopt;
  slopt.u8(slopt_.has_value() ? 1 : 0);
  if (slopt_) slopt_->save(slopt);

  BinWriter stats;
  for (std::uint64_t v : op_selections_) stats.u64(v);
  for (const auto& row : batch_selections_)
    for (std::uint64_t v : row) stats.u64(v);
  stats.u64(series_.size());
  for (const StatsRecord& row : series_) {
    stats.u64(row.execs);
    stats.u64(row.edges);
    stats.u64(row.queue);
    stats.u64(row.crashes);
    for (std::uint64_t v : row.op_selections) stats.u64(v);
    for (const auto& group_row : row.batch_selections)
      for (std::uint64_t v : group_row) stats.u64(v);
  }

  BinWriter out;
  out.bytes(reinterpret_cast<const std::uint8_t*>(kSnapshotMagic), sizeof(kSnapshotMagic));
  out.u32(1);  // format version
  const auto section = [&out](std::uint32_t tag, const BinWriter& w) {
    out.u32(tag);
    out.u64(w.size());
    out.bytes(w.data().data(), w.size());
  };
  section(1, meta);
  section(2, loop);
  section(3, rng);
  section(4, corpus);
  section(5, slopt);
  section(6, stats);
  return out.data();
}

Campaign Campaign::load_snapshot_bytes(const std::vector<std::uint8_t>& bytes) {
  BinReader r(bytes);
  char magic[8];
  for (char& ch : magic) ch = static_cast<char>(r.u8());
  if (!std::equal(std::begin(magic), std::end(magic), std::begin(kSnapshotMagic)))
    throw SnapshotError("bad snapshot magic", 0);
  const std::uint32_t version = r.u32();
  if (version != 1) throw SnapshotError("unsupported snapshot version", r.pos());

  Campaign c;
  const auto open_section = [&r](std::uint32_t expected_tag) {
    const std::uint32_t tag = r.u32();
    if (tag != expected_tag)
      throw SnapshotError("unexpected section tag " + std::to_string(tag), r.pos());
    const std::uint64_t len = r.u64();
    if (len > r.remaining())
      throw SnapshotError("section length exceeds available bytes", r.pos());
    return len;
  };

  open_section(1);
  const std::string put_name = r.str();
  c.put_ = &find_put_or_throw(put_name);
  c.config_.mode = r.u8() != 0 ? FuzzMode::kSlopt : FuzzMode::kConventional;
  c.config_.exec_budget = r.u64();
  c.config_.wall_clock_budget_s = r.f64();
  c.config_.rng_seed = r.u64();
  c.config_.max_input_len = r.u64();
  c.config_.base_energy = r.u32();
  c.config_.bandit.algorithm = static_cast<Algorithm>(r.u32());
  c.config_.bandit.c = r.f64();
  c.config_.bandit.prior_alpha = r.f64();
  c.config_.bandit.prior_beta = r.f64();
  c.config_.bandit.gamma = r.f64();
  c.config_.bandit.adwin_m = static_cast<int>(r.u32());
  c.config_.bandit.adwin_delta = r.f64();
  c.config_.bandit.exp3pp_alpha = r.f64();
  c.config_.bandit.exp3pp_beta = r.f64();
  c.config_.bandit.dbe_temperature = r.f64();
  c.config_.bandit.dbe_gamma = r.f64();
  const std::uint64_t ntokens = r.u64();
  for (std::uint64_t i = 0; i < ntokens; ++i) c.dictionary_.tokens.push_back(r.blob());

  open_section(2);
  c.execs_ = r.u64();
  c.initial_seed_count_ = r.u32();
  c.current_seed_id_ = r.u32();
  c.energy_remaining_ = r.u32();

  open_section(3);
  c.rng_.deserialize(r.str());

  open_section(4);
  c.corpus_ = Corpus::load(r);

  open_section(5);
  if (r.u8() != 0) c.slopt_ = SloptState::load(r);
  if (c.slopt_.has_value() != (c.config_.mode == FuzzMode::kSlopt))
    throw SnapshotError("bandit state does not match campaign mode", r.pos());

  open_section(6);
  for (std::uint64_t& v : c.op_selections_) v = r.u64();
  for (auto& row : c.batch_selections_)
    for (std::uint64_t& v : row) v = r.u64();
  const std::uint64_t nrows = r.u64();
  for (std::uint64_t i = 0; i < nrows; ++i) {
    StatsRecord row;
    row.execs = r.u64();
    row.edges = r.u64();
    row.queue = r.u64();
    row.crashes = r.u64();
    for (std::uint64_t& v : row.op_selections) v = r.u64();
    for (auto& group_row : row.batch_selections)
      for (std::uint64_t& v : group_row) v = r.u64();
    c.series_.push_back(row);
  }
  r.expect_end();
  c.config_.validate();
  if (c.corpus_.empty()) throw SnapshotError("snapshot contains an empty corpus", r.pos());
  return c;
}

void Campaign::save_snapshot(const std::string& path) const {
  write_file_bytes(path, snapshot_bytes());
}

Campaign Campaign::load_snapshot(const std::string& path) {
  return load_snapshot_bytes(read_file_bytes(path));
}

bool Campaign::state_equals(const Campaign& other) const {
  return put_->name == other.put_->name && execs_ == other.execs_ &&
         current_seed_id_ == other.current_seed_id_ &&
         energy_remaining_ == other.energy_remaining_ && rng_ == other.rng_ &&
         corpus_ == other.corpus_ && slopt_ == other.slopt_ &&
         op_selections_ == other.op_selections_ &&
         batch_selections_ == other.batch_selections_ && series_ == other.series_;
}

void save_snapshot(const Campaign& campaign, const std::string& path) {
  campaign.save_snapshot(path);
}

Campaign load_snapshot(const std::string& path) { return Campaign::load_snapshot(path); }

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write file: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw ConfigError("short write: " + path);
}

void Campaign::write_output_dir(const std::string& dir) const {
  fs::create_directories(fs::path(dir) / "queue");
  fs::create_directories(fs::path(dir) / "crashes");
  for (const Seed& s : corpus_.seeds()) {
    write_file_bytes((fs::path(dir) / "queue" / padded_id(s.id)).string(), s.bytes);
  }
  for (std::size_t i = 0; i < corpus_.crashes().size(); ++i) {
    const CrashRecord& crash = corpus_.crashes()[i];
    write_file_bytes((fs::path(dir) / "crashes" / padded_id(i)).string(), crash.bytes);
    ordered_json meta;
    meta["edges"] = crash.edges;
    std::ostringstream key;
    key << std::hex << std::setw(16) << std::setfill('0') << crash.dedup_key;
    meta["dedup_key"] = key.str();
    meta["found_at_exec"] = crash.found_at_exec;
    meta["reason"] = crash.reason;
    std::ofstream sidecar(fs::path(dir) / "crashes" / (padded_id(i) + ".json"));
    sidecar << meta.dump(2) << "\n";
  }
  const CampaignReport rep = report();
  std::ofstream stats(fs::path(dir) / "stats.jsonl");
  for (const StatsRecord& row : rep.series) stats << stats_row_json(row).dump() << "\n";
  std::ofstream repf(fs::path(dir) / "report.json");
  repf << rep.to_json();
  save_snapshot((fs::path(dir) / "snapshot.bin").string());
}

}  // namespace bfz
