#include "banditfuzz/corpus.hpp"

#include <algorithm>
#include <stdexcept>

namespace bfz {

bool Seed::operator==(const Seed& other) const {
  const auto rec_eq = [](const std::optional<MutationRecord>& a,
                         const std::optional<MutationRecord>& b) {
    if (a.has_value() != b.has_value()) return false;
    if (!a.has_value()) return true;
    return a->operator_id == b->operator_id && a->exponent == b->exponent &&
           a->group == b->group && a->seed_id == b->seed_id;
  };
  return id == other.id && bytes == other.bytes && parent_id == other.parent_id &&
         rec_eq(origin, other.origin) && discovered_at_exec == other.discovered_at_exec &&
         edge_count_at_discovery == other.edge_count_at_discovery;
}

std::uint64_t edge_set_hash(const std::vector<std::uint32_t>& sorted_edges) {
  // FNV-1a over the little-endian bytes of the sorted edge ids.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint32_t e : sorted_edges) {
    for (int i = 0; i < 4; ++i) {
      h ^= static_cast<std::uint8_t>(e >> (8 * i));
      h *= 0x00000100000001b3ull;
    }
  }
  return h;
}

bool Corpus::is_input_valuable(const ExecutionResult& result) const {
  for (std::uint32_t e : result.edges) {
    if (e >= covered_.size() || covered_[e] == 0) return true;
  }
  return false;
}

void Corpus::merge_edges(const std::vector<std::uint32_t>& edges) {
  for (std::uint32_t e : edges) {
    if (e >= covered_.size()) covered_.resize(e + 1, 0);
    if (covered_[e] == 0) {
      covered_[e] = 1;
      ++covered_count_;
    }
  }
}

const Seed& Corpus::add_seed(std::vector<std::uint8_t> bytes, std::optional<std::uint32_t> parent,
                             std::optional<MutationRecord> origin, std::uint64_t at_exec,
                             const ExecutionResult& result) {
  if (bytes.empty()) throw std::invalid_argument("Corpus::add_seed: seeds must be non-empty");
  Seed s;
  s.id = static_cast<std::uint32_t>(queue_.size());
  s.bytes = std::move(bytes);
  s.parent_id = parent;
  s.origin = origin;
  s.discovered_at_exec = at_exec;
  s.edge_count_at_discovery = static_cast<std::uint32_t>(result.edges.size());
  merge_edges(result.edges);
  queue_.push_back(std::move(s));
  return queue_.back();
}

const Seed& Corpus::select_seed() {
  if (queue_.empty()) throw std::logic_error("Corpus::select_seed: empty queue");
  if (cursor_ >= queue_.size()) cursor_ = 0;
  return queue_[cursor_++];
}

bool Corpus::add_crash(const std::vector<std::uint8_t>& bytes, const ExecutionResult& result,
                       std::uint64_t at_exec) {
  std::vector<std::uint32_t> sorted = result.edges;
  std::sort(sorted.begin(), sorted.end());
  const std::uint64_t key = edge_set_hash(sorted);
  for (const CrashRecord& c : crashes_) {
    if (c.dedup_key == key) return false;
  }
  CrashRecord rec;
  rec.bytes = bytes;
  rec.edges = std::move(sorted);
  rec.dedup_key = key;
  rec.found_at_exec = at_exec;
  rec.reason = result.abort_reason.value_or("");
  crashes_.push_back(std::move(rec));
  return true;
}

const Seed& Corpus::seed_by_id(std::uint32_t id) const {
  if (id >= queue_.size()) throw std::out_of_range("Corpus::seed_by_id: unknown id");
  return queue_[id];  // ids are dense in discovery order
}

bool Corpus::edge_covered(std::uint32_t edge) const {
  return edge < covered_.size() && covered_[edge] != 0;
}

std::uint32_t Corpus::median_discovery_edge_count() const {
  if (queue_.empty()) return 0;
  std::vector<std::uint32_t> counts;
  counts.reserve(queue_.size());
  for (const Seed& s : queue_) counts.push_back(s.edge_count_at_discovery);
  std::sort(counts.begin(), counts.end());
  return counts[(counts.size() - 1) / 2];
}

void Corpus::save(BinWriter& w) const {
  w.u64(queue_.size());
  for (const Seed& s : queue_) {
    w.u32(s.id);
    w.blob(s.bytes);
    w.u32(s.parent_id ? *s.parent_id + 1 : 0);
    w.u8(s.origin ? 1 : 0);
    if (s.origin) {
      w.u32(static_cast<std::uint32_t>(s.origin->operator_id));
      w.u32(static_cast<std::uint32_t>(s.origin->exponent));
      w.u32(static_cast<std::uint32_t>(s.origin->group));
      w.u32(s.origin->seed_id);
    }
    w.u64(s.discovered_at_exec);
    w.u32(s.edge_count_at_discovery);
  }
  w.u64(covered_.size());
  w.bytes(covered_.data(), covered_.size());
  w.u64(covered_count_);
  w.u64(cursor_);
  w.u64(crashes_.size());
  for (const CrashRecord& c : crashes_) {
    w.blob(c.bytes);
    w.u64(c.edges.size());
    for (std::uint32_t e : c.edges) w.u32(e);
    w.u64(c.dedup_key);
    w.u64(c.found_at_exec);
    w.str(c.reason);
  }
}

Corpus Corpus::load(BinReader& r) {
  Corpus corpus(0);
  const std::uint64_t nseeds = r.u64();
  corpus.queue_.reserve(nseeds);
  for (std::uint64_t i = 0; i < nseeds; ++i) {
    Seed s;
    s.id = r.u32();
    s.bytes = r.blob();
    const std::uint32_t parent = r.u32();
    if (parent != 0) s.parent_id = parent - 1;
    if (r.u8() != 0) {
      MutationRecord rec;
      rec.operator_id = static_cast<int>(r.u32());
      rec.exponent = static_cast<int>(r.u32());
      rec.group = static_cast<int>(r.u32());
      rec.seed_id = r.u32();
      s.origin = rec;
    }
    s.discovered_at_exec = r.u64();
    s.edge_count_at_discovery = r.u32();
    if (s.id != i) throw SnapshotError("seed ids are not dense", r.pos());
    corpus.queue_.push_back(std::move(s));
  }
  corpus.covered_ = r.blob();
  corpus.covered_count_ = r.u64();
  corpus.cursor_ = r.u64();
  const std::uint64_t ncrashes = r.u64();
  corpus.crashes_.reserve(ncrashes);
  for (std::uint64_t i = 0; i < ncrashes; ++i) {
    CrashRecord c;
    c.bytes = r.blob();
    const std::uint64_t nedges = r.u64();
    c.edges.reserve(nedges);
    for (std::uint64_t j = 0; j < nedges; ++j) c.edges.push_back(r.u32());
    c.dedup_key = r.u64();
    c.found_at_exec = r.u64();
    c.reason = r.str();
    corpus.crashes_.push_back(std::move(c));
  }
  return corpus;
}

bool Corpus::operator==(const Corpus& other) const {
  return queue_ == other.queue_ && covered_ == other.covered_ &&
         covered_count_ == other.covered_count_ && cursor_ == other.cursor_ &&
         crashes_ == other.crashes_;
}

}  // namespace bfz
