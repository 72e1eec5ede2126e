#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "banditfuzz/corpus.hpp"

namespace bfz {

// An in-process program under test. `execute` is pure and total; every edge
// id it reports lies below `edge_bound`.
struct PutHarness {
  std::string name;
  std::uint32_t edge_bound = 0;
  std::function<ExecutionResult(const std::vector<std::uint8_t>&)> execute;
};

// The built-in deterministic targets:
//   magic_gate    - four sequential 4-byte magic comparisons, crash at the end
//   chunk_parser  - TLV record walker with per-type checksum branches
//   arith_checker - chained byte-wise arithmetic relations
//   length_field  - header length field validated against the body
const std::vector<PutHarness>& builtin_puts();

const PutHarness* find_put(const std::string& name);
const PutHarness& find_put_or_throw(const std::string& name);

// Non-crashing starter inputs for each built-in target.
std::vector<std::vector<std::uint8_t>> default_seeds(const std::string& put_name);

}  // namespace bfz
