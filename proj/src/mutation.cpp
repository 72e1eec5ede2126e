#include "banditfuzz/mutation.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "banditfuzz/errors.hpp"

namespace bfz {

namespace {

constexpr std::size_t kMaxBlock = 1024;  // upper bound on one chunk edit
constexpr int kArithMax = 35;

std::uint64_t arith_delta(RngStream& rng) { return 1 + rng.below(kArithMax); }

// Block length for chunk edits, biased toward small blocks the way havoc
// mutators traditionally are: 75% up to 32 bytes, 24% up to 128, 1% large.
std::size_t chunk_block_len(RngStream& rng, std::size_t cap) {
  const std::uint64_t d = rng.below(100);
  std::size_t limit = d < 75 ? 32 : d < 99 ? 128 : kMaxBlock;
  limit = std::min(limit, cap);
  if (limit == 0) return 0;
  return 1 + rng.below(limit);
}

std::uint16_t read_u16(const std::uint8_t* p, bool big_endian) {
  return big_endian ? static_cast<std::uint16_t>((p[0] << 8) | p[1])
                    : static_cast<std::uint16_t>((p[1] << 8) | p[0]);
}

void write_u16(std::uint8_t* p, std::uint16_t v, bool big_endian) {
  if (big_endian) {
    p[0] = static_cast<std::uint8_t>(v >> 8);
    p[1] = static_cast<std::uint8_t>(v);
  } else {
    p[1] = static_cast<std::uint8_t>(v >> 8);
    p[0] = static_cast<std::uint8_t>(v);
  }
}

std::uint32_t read_u32(const std::uint8_t* p, bool big_endian) {
  if (big_endian)
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | p[3];
  return (static_cast<std::uint32_t>(p[3]) << 24) | (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[1]) << 8) | p[0];
}

void write_u32(std::uint8_t* p, std::uint32_t v, bool big_endian) {
  if (big_endian) {
    p[0] = static_cast<std::uint8_t>(v >> 24);
    p[1] = static_cast<std::uint8_t>(v >> 16);
    p[2] = static_cast<std::uint8_t>(v >> 8);
    p[3] = static_cast<std::uint8_t>(v);
  } else {
    p[3] = static_cast<std::uint8_t>(v >> 24);
    p[2] = static_cast<std::uint8_t>(v >> 16);
    p[1] = static_cast<std::uint8_t>(v >> 8);
    p[0] = static_cast<std::uint8_t>(v);
  }
}

void op_set_random_byte(std::vector<std::uint8_t>& buf, std::size_t pos, RngStream& rng) {
  buf[pos] = rng.byte();
}

void op_add_sub_byte(std::vector<std::uint8_t>& buf, std::size_t pos, RngStream& rng) {
  const std::uint8_t d = static_cast<std::uint8_t>(arith_delta(rng));
  buf[pos] = rng.coin() ? static_cast<std::uint8_t>(buf[pos] + d)
                        : static_cast<std::uint8_t>(buf[pos] - d);
}

void op_add_sub_word(std::vector<std::uint8_t>& buf, std::size_t pos, RngStream& rng) {
  if (buf.size() < 2) {
    op_add_sub_byte(buf, pos, rng);
    return;
  }
  const std::size_t p = std::min(pos, buf.size() - 2);
  const bool big = rng.coin();
  const std::uint16_t d = static_cast<std::uint16_t>(arith_delta(rng));
  std::uint16_t v = read_u16(&buf[p], big);
  v = rng.coin() ? static_cast<std::uint16_t>(v + d) : static_cast<std::uint16_t>(v - d);
  write_u16(&buf[p], v, big);
}

void op_add_sub_dword(std::vector<std::uint8_t>& buf, std::size_t pos, RngStream& rng) {
  if (buf.size() < 4) {
    op_add_sub_word(buf, pos, rng);
    return;
  }
  const std::size_t p = std::min(pos, buf.size() - 4);
  const bool big = rng.coin();
  const std::uint32_t d = static_cast<std::uint32_t>(arith_delta(rng));
  std::uint32_t v = read_u32(&buf[p], big);
  v = rng.coin() ? v + d : v - d;
  write_u32(&buf[p], v, big);
}

void op_set_interesting_byte(std::vector<std::uint8_t>& buf, std::size_t pos, RngStream& rng) {
  buf[pos] = static_cast<std::uint8_t>(kInteresting8[rng.below(kInteresting8.size())]);
}

void op_set_interesting_word(std::vector<std::uint8_t>& buf, std::size_t pos, RngStream& rng) {
  if (buf.size() < 2) {
    op_set_interesting_byte(buf, pos, rng);
    return;
  }
  const std::size_t p = std::min(pos, buf.size() - 2);
  const bool big = rng.coin();
  const std::uint16_t v =
      static_cast<std::uint16_t>(kInteresting16[rng.below(kInteresting16.size())]);
  write_u16(&buf[p], v, big);
}

void op_overwrite_dict_token(std::vector<std::uint8_t>& buf, std::size_t pos, RngStream& rng,
                             const MutationAux& aux) {
  if (aux.dictionary == nullptr || aux.dictionary->empty()) {
    op_set_random_byte(buf, pos, rng);
    return;
  }
  const auto& tok = aux.dictionary->tokens[rng.below(aux.dictionary->tokens.size())];
  const std::size_t n = std::min(tok.size(), buf.size() - pos);
  std::copy_n(tok.begin(), n, buf.begin() + pos);
}

void op_clone_bytes(std::vector<std::uint8_t>& buf, std::size_t pos, RngStream& rng,
                    std::size_t max_len) {
  const std::size_t avail = max_len - buf.size();
  const std::size_t k = chunk_block_len(rng, std::min(buf.size(), avail));
  if (k == 0) return;
  const std::size_t src = rng.below(buf.size() - k + 1);
  const std::vector<std::uint8_t> block(buf.begin() + src, buf.begin() + src + k);
  buf.insert(buf.begin() + pos, block.begin(), block.end());
}

void op_overwrite_chunk_from_self(std::vector<std::uint8_t>& buf, std::size_t pos,
                                  RngStream& rng) {
  if (buf.size() < 2) return;
  const std::size_t k = chunk_block_len(rng, buf.size() - 1);
  const std::size_t src = rng.below(buf.size() - k + 1);
  const std::size_t dst = std::min(pos, buf.size() - k);
  std::memmove(&buf[dst], &buf[src], k);
}

void op_delete_bytes(std::vector<std::uint8_t>& buf, std::size_t pos, RngStream& rng) {
  if (buf.size() <= 1) return;  // minimum length 1 enforced
  const std::size_t k = chunk_block_len(rng, buf.size() - 1);
  const std::size_t start = std::min(pos, buf.size() - k);
  buf.erase(buf.begin() + start, buf.begin() + start + k);
}

void op_insert_random_chunk(std::vector<std::uint8_t>& buf, std::size_t pos, RngStream& rng,
                            std::size_t max_len) {
  const std::size_t k = chunk_block_len(rng, max_len - buf.size());
  if (k == 0) return;
  std::vector<std::uint8_t> block(k);
  for (auto& b : block) b = rng.byte();
  buf.insert(buf.begin() + pos, block.begin(), block.end());
}

void op_overwrite_from_donor(std::vector<std::uint8_t>& buf, std::size_t pos, RngStream& rng,
                             const MutationAux& aux) {
  if (aux.donor == nullptr || aux.donor->empty()) {
    op_overwrite_chunk_from_self(buf, pos, rng);
    return;
  }
  const auto& donor = *aux.donor;
  const std::size_t k = chunk_block_len(rng, std::min(donor.size(), buf.size()));
  const std::size_t src = rng.below(donor.size() - k + 1);
  const std::size_t dst = std::min(pos, buf.size() - k);
  std::copy_n(donor.begin() + src, k, buf.begin() + dst);
}

}  // namespace

const std::array<MutationOperator, kOperatorCount>& operator_catalog() {
  static const std::array<MutationOperator, kOperatorCount> catalog = {{
      {kFlipBit, "flip_bit", OperatorCategory::kUnit},
      {kSetRandomByte, "set_random_byte", OperatorCategory::kUnit},
      {kAddSubByte, "add_sub_byte", OperatorCategory::kUnit},
      {kAddSubWord, "add_sub_word", OperatorCategory::kUnit},
      {kAddSubDword, "add_sub_dword", OperatorCategory::kUnit},
      {kSetInterestingByte, "set_interesting_byte", OperatorCategory::kUnit},
      {kSetInterestingWord, "set_interesting_word", OperatorCategory::kUnit},
      {kOverwriteDictToken, "overwrite_dict_token", OperatorCategory::kUnit},
      {kCloneBytes, "clone_bytes", OperatorCategory::kChunk},
      {kOverwriteChunkFromSelf, "overwrite_chunk_from_self", OperatorCategory::kChunk},
      {kDeleteBytes, "delete_bytes", OperatorCategory::kChunk},
      {kInsertRandomChunk, "insert_random_chunk", OperatorCategory::kChunk},
      {kOverwriteFromDonorSeed, "overwrite_from_donor_seed", OperatorCategory::kChunk},
  }};
  return catalog;
}

int get_group_index(std::size_t len) {
  if (len < 100) return 0;
  if (len < 1000) return 1;
  if (len < 10000) return 2;
  if (len < 100000) return 3;
  return 4;
}

Dictionary Dictionary::parse(const std::string& text) {
  Dictionary dict;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::uint8_t> tok;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] != '\\') {
        tok.push_back(static_cast<std::uint8_t>(line[i]));
        continue;
      }
      if (i + 1 < line.size() && line[i + 1] == '\\') {
        tok.push_back('\\');
        ++i;
        continue;
      }
      if (i + 3 < line.size() && line[i + 1] == 'x') {
        const auto hex = [&](char ch) -> int {
          if (ch >= '0' && ch <= '9') return ch - '0';
          if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
          if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
          return -1;
        };
        const int hi = hex(line[i + 2]);
        const int lo = hex(line[i + 3]);
        if (hi < 0 || lo < 0)
          throw ConfigError("dictionary line " + std::to_string(line_no) + ": bad \\x escape");
        tok.push_back(static_cast<std::uint8_t>(hi * 16 + lo));
        i += 3;
        continue;
      }
      throw ConfigError("dictionary line " + std::to_string(line_no) + ": bad escape");
    }
    if (!tok.empty()) dict.tokens.push_back(std::move(tok));
  }
  return dict;
}

Dictionary Dictionary::load_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open dictionary file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

SloptState::SloptState(const BanditConfig& config, int operator_count)
    : operator_instance(config, operator_count) {
  batch_instances.resize(kGroupCount);
  for (auto& row : batch_instances) {
    row.reserve(operator_count);
    for (int i = 0; i < operator_count; ++i) row.emplace_back(config, kBatchArmCount);
  }
}

void SloptState::save(BinWriter& w) const {
  operator_instance.save(w);
  w.u32(static_cast<std::uint32_t>(batch_instances.size()));
  for (const auto& row : batch_instances) {
    w.u32(static_cast<std::uint32_t>(row.size()));
    for (const auto& cell : row) cell.save(w);
  }
}

SloptState SloptState::load(BinReader& r) {
  SloptState state;
  state.operator_instance = BanditInstance::load(r);
  const std::uint32_t rows = r.u32();
  state.batch_instances.resize(rows);
  for (auto& row : state.batch_instances) {
    const std::uint32_t cols = r.u32();
    row.reserve(cols);
    for (std::uint32_t i = 0; i < cols; ++i) row.push_back(BanditInstance::load(r));
  }
  return state;
}

bool SloptState::operator==(const SloptState& other) const {
  return operator_instance == other.operator_instance && batch_instances == other.batch_instances;
}

void apply_operator(const MutationOperator& op, std::vector<std::uint8_t>& buf, std::size_t pos,
                    RngStream& rng, const MutationAux& aux, std::size_t max_len) {
  if (buf.empty()) {
    if (op.id != kInsertRandomChunk)
      throw std::invalid_argument("apply_operator: empty buffers only accept insertion");
    if (pos != 0) throw std::out_of_range("apply_operator: pos out of range");
  } else if (pos >= buf.size()) {
    throw std::out_of_range("apply_operator: pos out of range");
  }
  if (aux.apply_log != nullptr) aux.apply_log->push_back(op.id);

  switch (op.id) {
    case kFlipBit:
      buf[pos] ^= static_cast<std::uint8_t>(1u << rng.below(8));
      break;
    case kSetRandomByte:
      op_set_random_byte(buf, pos, rng);
      break;
    case kAddSubByte:
      op_add_sub_byte(buf, pos, rng);
      break;
    case kAddSubWord:
      op_add_sub_word(buf, pos, rng);
      break;
    case kAddSubDword:
      op_add_sub_dword(buf, pos, rng);
      break;
    case kSetInterestingByte:
      op_set_interesting_byte(buf, pos, rng);
      break;
    case kSetInterestingWord:
      op_set_interesting_word(buf, pos, rng);
      break;
    case kOverwriteDictToken:
      op_overwrite_dict_token(buf, pos, rng, aux);
      break;
    case kCloneBytes:
      op_clone_bytes(buf, pos, rng, max_len);
      break;
    case kOverwriteChunkFromSelf:
      op_overwrite_chunk_from_self(buf, pos, rng);
      break;
    case kDeleteBytes:
      op_delete_bytes(buf, pos, rng);
      break;
    case kInsertRandomChunk:
      op_insert_random_chunk(buf, pos, rng, max_len);
      break;
    case kOverwriteFromDonorSeed:
      op_overwrite_from_donor(buf, pos, rng, aux);
      break;
    default:
      throw std::invalid_argument("apply_operator: unknown operator id");
  }
}

const MutationOperator& select_operator(SloptState& state, RngStream& rng) {
  const int arm = state.operator_instance.select_arm(rng);
  return operator_catalog()[static_cast<std::size_t>(arm)];
}

int decide_batch_exponent(SloptState& state, int group, int operator_id, RngStream& rng) {
  if (group < 0 || group >= static_cast<int>(state.batch_instances.size()))
    throw std::out_of_range("decide_batch_exponent: group out of range");
  if (operator_id < 0 || operator_id >= state.operator_count())
    throw std::out_of_range("decide_batch_exponent: operator id out of range");
  return state.batch_instances[group][operator_id].select_arm(rng);
}

std::pair<std::vector<std::uint8_t>, MutationRecord> random_mutation_slopt(
    const std::vector<std::uint8_t>& seed_bytes, std::uint32_t seed_id, SloptState& state,
    RngStream& rng, const MutationAux& aux, std::size_t max_len) {
  if (seed_bytes.empty()) throw std::invalid_argument("random_mutation_slopt: empty seed");
  std::vector<std::uint8_t> input = seed_bytes;
  const MutationOperator& op = select_operator(state, rng);
  const int group = get_group_index(input.size());
  const int exponent = decide_batch_exponent(state, group, op.id, rng);
  const std::size_t batch = static_cast<std::size_t>(1) << exponent;
  for (std::size_t i = 0; i < batch; ++i) {
    const std::size_t pos = rng.below(input.size());
    apply_operator(op, input, pos, rng, aux, max_len);
  }
  return {std::move(input), MutationRecord{op.id, exponent, group, seed_id}};
}

void reward_choices(SloptState& state, const MutationRecord& record, bool valuable) {
  if (record.group < 0 || record.group >= static_cast<int>(state.batch_instances.size()))
    throw std::out_of_range("reward_choices: group out of range");
  if (record.operator_id < 0 || record.operator_id >= state.operator_count())
    throw std::out_of_range("reward_choices: operator id out of range");
  if (record.exponent < 0 || record.exponent >= kBatchArmCount)
    throw std::out_of_range("reward_choices: exponent out of range");
  BanditInstance& cell = state.batch_instances[record.group][record.operator_id];
  if (state.operator_instance.pending_arm() != record.operator_id ||
      cell.pending_arm() != record.exponent)
    throw std::logic_error("reward_choices: record does not match the pending selections");
  state.operator_instance.reward(record.operator_id, valuable);
  cell.reward(record.exponent, valuable);
}

std::vector<std::uint8_t> random_mutation_conventional(
    const std::vector<std::uint8_t>& seed_bytes, RngStream& rng, const MutationAux& aux,
    std::size_t max_len, ConventionalRecord* record) {
  if (seed_bytes.empty()) throw std::invalid_argument("random_mutation_conventional: empty seed");
  std::vector<std::uint8_t> input = seed_bytes;
  const int exponent = static_cast<int>(rng.below(kBatchArmCount));
  if (record != nullptr) {
    record->exponent = exponent;
    record->group = get_group_index(input.size());
    record->operator_applications.fill(0);
  }
  const std::size_t batch = static_cast<std::size_t>(1) << exponent;
  for (std::size_t i = 0; i < batch; ++i) {
    const MutationOperator& op = operator_catalog()[rng.below(kOperatorCount)];
    if (record != nullptr) record->operator_applications[op.id] += 1;
    const std::size_t pos = rng.below(input.size());
    apply_operator(op, input, pos, rng, aux, max_len);
  }
  return input;
}

}  // namespace bfz
