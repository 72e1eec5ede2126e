#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "banditfuzz/binio.hpp"
#include "banditfuzz/mutation.hpp"

namespace bfz {

// Outcome of one target execution: the set of covered edge ids plus crash
// information. Edge ids are unique and sorted.
struct ExecutionResult {
  std::vector<std::uint32_t> edges;
  bool crashed = false;
  std::optional<std::string> abort_reason;
};

struct Seed {
  std::uint32_t id = 0;
  std::vector<std::uint8_t> bytes;
  std::optional<std::uint32_t> parent_id;
  std::optional<MutationRecord> origin;
  std::uint64_t discovered_at_exec = 0;  // logical time: executions completed
  std::uint32_t edge_count_at_discovery = 0;

  bool operator==(const Seed& other) const;
};

struct CrashRecord {
  std::vector<std::uint8_t> bytes;
  std::vector<std::uint32_t> edges;
  std::uint64_t dedup_key = 0;
  std::uint64_t found_at_exec = 0;
  std::string reason;

  bool operator==(const CrashRecord& other) const = default;
};

std::uint64_t edge_set_hash(const std::vector<std::uint32_t>& sorted_edges);

// Seed queue, global covered-edge set and crash archive for one campaign.
class Corpus {
 public:
  explicit Corpus(std::uint32_t edge_bound = 0) { covered_.assign(edge_bound, 0); }

  bool is_input_valuable(const ExecutionResult& result) const;

  // Appends a seed to the queue tail and merges its edges.
  const Seed& add_seed(std::vector<std::uint8_t> bytes, std::optional<std::uint32_t> parent,
                       std::optional<MutationRecord> origin, std::uint64_t at_exec,
                       const ExecutionResult& result);

  // Round-robin selection; newly saved seeds are reached before the wrap.
  const Seed& select_seed();

  // Stores the crash unless an identical sorted-edge-set hash is archived.
  bool add_crash(const std::vector<std::uint8_t>& bytes, const ExecutionResult& result,
                 std::uint64_t at_exec);

  std::size_t size() const { return queue_.size(); }
  bool empty() const { return queue_.empty(); }
  const std::vector<Seed>& seeds() const { return queue_; }
  const Seed& seed_by_id(std::uint32_t id) const;
  const std::vector<CrashRecord>& crashes() const { return crashes_; }
  std::size_t covered_edge_count() const { return covered_count_; }
  bool edge_covered(std::uint32_t edge) const;
  std::size_t cursor() const { return cursor_; }

  // Lower median of the seeds' discovery-time edge counts.
  std::uint32_t median_discovery_edge_count() const;

  void save(BinWriter& w) const;
  static Corpus load(BinReader& r);
  bool operator==(const Corpus& other) const;

 private:
  void merge_edges(const std::vector<std::uint32_t>& edges);

  std::vector<Seed> queue_;
  std::vector<std::uint8_t> covered_;  // bitmap-style byte per edge id
  std::size_t covered_count_ = 0;
  std::size_t cursor_ = 0;
  std::vector<CrashRecord> crashes_;
};

// Free-function spellings used throughout the engine.
inline bool is_input_valuable(const ExecutionResult& result, const Corpus& corpus) {
  return corpus.is_input_valuable(result);
}
inline const Seed& select_seed(Corpus& corpus) { return corpus.select_seed(); }

}  // namespace bfz
