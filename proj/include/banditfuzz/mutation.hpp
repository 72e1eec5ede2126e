#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "banditfuzz/bandit.hpp"
#include "banditfuzz/binio.hpp"
#include "banditfuzz/rng.hpp"

namespace bfz {

enum class OperatorCategory { kUnit, kChunk };

// Dense operator ids; the catalog order is fixed at engine start.
enum OperatorId : int {
  kFlipBit = 0,
  kSetRandomByte,
  kAddSubByte,
  kAddSubWord,
  kAddSubDword,
  kSetInterestingByte,
  kSetInterestingWord,
  kOverwriteDictToken,
  kCloneBytes,
  kOverwriteChunkFromSelf,
  kDeleteBytes,
  kInsertRandomChunk,
  kOverwriteFromDonorSeed,
};

constexpr int kOperatorCount = 13;
constexpr int kGroupCount = 5;       // seed-size buckets
constexpr int kBatchArmCount = 7;    // batch exponents 0..6, sizes 1..64
constexpr std::size_t kDefaultMaxInputLen = 1u << 20;

struct MutationOperator {
  int id;
  const char* name;
  OperatorCategory category;
};

const std::array<MutationOperator, kOperatorCount>& operator_catalog();

inline constexpr std::array<std::int8_t, 9> kInteresting8 = {-128, -1, 0,  1,  16,
                                                             32,   64, 100, 127};
inline constexpr std::array<std::int16_t, 19> kInteresting16 = {
    -128, -1,  0,   1,   16,  32,   64,   100,  127, -32768,
    -129, 128, 255, 256, 512, 1000, 1024, 4096, 32767};

// Seed-size bucket: [0,1e2), [1e2,1e3), [1e3,1e4), [1e4,1e5), [1e5,inf).
int get_group_index(std::size_t len);

// Newline-delimited token file; non-printable bytes written as \xNN.
struct Dictionary {
  std::vector<std::vector<std::uint8_t>> tokens;

  static Dictionary parse(const std::string& text);
  static Dictionary load_file(const std::string& path);
  bool empty() const { return tokens.empty(); }
};

struct MutationAux {
  const Dictionary* dictionary = nullptr;
  const std::vector<std::uint8_t>* donor = nullptr;
  // When set, every operator application appends its operator id here.
  std::vector<int>* apply_log = nullptr;
};

// Provenance of one generated input, for reward routing and reports.
struct MutationRecord {
  int operator_id = 0;
  int exponent = 0;
  int group = 0;
  std::uint32_t seed_id = 0;
};

// Bandit wiring for single-operator batched mutation: one operator-selection
// instance plus a group x operator grid of 7-arm batch-exponent instances.
struct SloptState {
  BanditInstance operator_instance;
  std::vector<std::vector<BanditInstance>> batch_instances;  // [group][operator]

  SloptState() = default;
  SloptState(const BanditConfig& config, int operator_count = kOperatorCount);

  int operator_count() const { return operator_instance.k(); }

  void save(BinWriter& w) const;
  static SloptState load(BinReader& r);
  bool operator==(const SloptState& other) const;
};

// Applies `op` once at `pos`. Unit operators preserve buffer length; chunk
// operators keep it in [1, max_len]. Degenerate cases are no-ops.
void apply_operator(const MutationOperator& op, std::vector<std::uint8_t>& buf, std::size_t pos,
                    RngStream& rng, const MutationAux& aux,
                    std::size_t max_len = kDefaultMaxInputLen);

const MutationOperator& select_operator(SloptState& state, RngStream& rng);
int decide_batch_exponent(SloptState& state, int group, int operator_id, RngStream& rng);

// Single-operator batched mutation: one operator choice per call, applied
// 2^exponent times at independently drawn positions.
std::pair<std::vector<std::uint8_t>, MutationRecord> random_mutation_slopt(
    const std::vector<std::uint8_t>& seed_bytes, std::uint32_t seed_id, SloptState& state,
    RngStream& rng, const MutationAux& aux, std::size_t max_len = kDefaultMaxInputLen);

// Routes one 0/1 reward to both layers chosen for `record`.
void reward_choices(SloptState& state, const MutationRecord& record, bool valuable);

struct ConventionalRecord {
  int exponent = 0;
  int group = 0;
  std::array<std::uint32_t, kOperatorCount> operator_applications{};
};

// Baseline havoc-style scheme: a fresh operator drawn inside every batch
// iteration, batch size 2^u with u uniform over 0..6.
std::vector<std::uint8_t> random_mutation_conventional(
    const std::vector<std::uint8_t>& seed_bytes, RngStream& rng, const MutationAux& aux,
    std::size_t max_len = kDefaultMaxInputLen, ConventionalRecord* record = nullptr);

}  // namespace bfz
