#include "banditfuzz/puts.hpp"

#include <algorithm>
#include <array>

#include "banditfuzz/errors.hpp"
#include "banditfuzz/mutation.hpp"

namespace bfz {

namespace {

ExecutionResult finish(std::vector<std::uint32_t> edges, bool crashed, const char* reason) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  ExecutionResult result;
  result.edges = std::move(edges);
  result.crashed = crashed;
  if (crashed) result.abort_reason = reason;
  return result;
}

// Sixteen magic bytes compared in order; every matched byte is an edge, every
// completed 4-byte gate another, and a full match crashes. All magic values
// sit in the interesting-byte table so the chain is climbable.
constexpr std::array<std::uint8_t, 16> kMagic = {0x80, 0x10, 0x40, 0x01, 0x20, 0x80, 0x10, 0x40,
                                                 0x01, 0x20, 0x80, 0x10, 0x64, 0xFF, 0x7F, 0x64};

ExecutionResult run_magic_gate(const std::vector<std::uint8_t>& in) {
  std::vector<std::uint32_t> edges = {0};
  std::size_t matched = 0;
  while (matched < kMagic.size() && matched < in.size() && in[matched] == kMagic[matched]) {
    edges.push_back(static_cast<std::uint32_t>(1 + matched));
    ++matched;
  }
  for (std::size_t gate = 0; gate < 4; ++gate) {
    if (matched >= (gate + 1) * 4) edges.push_back(static_cast<std::uint32_t>(17 + gate));
  }
  const bool crashed = matched == kMagic.size();
  return finish(std::move(edges), crashed, "magic chain complete");
}

// Records are [type:1][len:1][payload:len] with type in 1..4, len >= 1 and
// payload[0] == 0xA0|type (a tag echo). Structural progress maps to edges:
// records parsed (up to 64), types seen, per-type checksum branches, a
// running good-checksum count, and a (record index, type) matrix over the
// first 32 records. A truncated type-4 record deep in the stream crashes.
ExecutionResult run_chunk_parser(const std::vector<std::uint8_t>& in) {
  std::vector<std::uint32_t> edges = {0};
  std::size_t cursor = 0;
  int records = 0;
  int good_checksums = 0;
  bool type_seen[5] = {};
  bool crashed = false;
  while (cursor + 2 <= in.size() && records < 64) {
    const std::uint8_t type = in[cursor];
    const std::size_t rlen = in[cursor + 1];
    if (type < 1 || type > 4 || rlen < 1) {
      edges.push_back(248);
      break;
    }
    if (cursor + 2 + rlen > in.size()) {
      edges.push_back(249);
      crashed = records >= 6 && type == 4;
      break;
    }
    if (in[cursor + 2] != (0xA0u | type)) {
      edges.push_back(250);
      break;
    }
    edges.push_back(static_cast<std::uint32_t>(1 + records));
    if (!type_seen[type]) {
      type_seen[type] = true;
      edges.push_back(static_cast<std::uint32_t>(70 + type));
    }
    std::uint32_t sum = 0;
    for (std::size_t i = 0; i < rlen; ++i) sum += in[cursor + 2 + i];
    if ((sum & 7u) == ((3u * type) & 7u)) {
      edges.push_back(static_cast<std::uint32_t>(75 + (type - 1)));
      ++good_checksums;
      edges.push_back(static_cast<std::uint32_t>(80 + std::min(good_checksums, 32)));
    }
    if (records < 32) edges.push_back(static_cast<std::uint32_t>(120 + 4 * records + (type - 1)));
    ++records;
    cursor += 2 + rlen;
  }
  return finish(std::move(edges), crashed, "overread past record end");
}

// A chain of exact byte relations; each is tested only when all previous
// ones hold. A near miss (within 8 of the expected value, mod 256) earns its
// own edge, so arithmetic nudging has a gradient to climb.
ExecutionResult run_arith_checker(const std::vector<std::uint8_t>& in) {
  std::vector<std::uint32_t> edges = {0};
  if (in.size() >= 8) edges.push_back(1);
  if (in.size() >= 16) edges.push_back(2);
  const auto b = [&](std::size_t i) -> std::uint8_t { return i < in.size() ? in[i] : 0; };
  const std::uint8_t expected[16] = {
      0x25,
      static_cast<std::uint8_t>(b(0) + 17),
      static_cast<std::uint8_t>(b(1) ^ 0x5A),
      static_cast<std::uint8_t>(b(2) - 33),
      static_cast<std::uint8_t>(b(3) << 1),
      static_cast<std::uint8_t>(b(4) + b(0)),
      static_cast<std::uint8_t>(b(5) ^ b(1)),
      static_cast<std::uint8_t>(b(6) + 77),
      static_cast<std::uint8_t>(b(7) - b(2)),
      static_cast<std::uint8_t>(b(8) ^ 0x33),
      static_cast<std::uint8_t>(b(9) + 5),
      static_cast<std::uint8_t>(b(10) + b(3)),
      static_cast<std::uint8_t>(b(11) ^ b(4)),
      static_cast<std::uint8_t>(b(12) - 100),
      static_cast<std::uint8_t>(b(13) + b(5)),
      static_cast<std::uint8_t>(b(14) ^ 0x77),
  };
  int satisfied = 0;
  for (std::size_t i = 0; i < 16 && i < in.size(); ++i) {
    const int diff = std::abs(static_cast<int>(in[i]) - static_cast<int>(expected[i]));
    const int wrapped = std::min(diff, 256 - diff);
    if (wrapped <= 8) edges.push_back(static_cast<std::uint32_t>(4 + 2 * i));
    if (in[i] != expected[i]) break;
    edges.push_back(static_cast<std::uint32_t>(3 + 2 * i));
    ++satisfied;
  }
  return finish(std::move(edges), satisfied == 16, "relation chain complete");
}

// Header is 'L' 'F' followed by a big-endian u16 length field. The parser
// consumes min(field, body) bytes; coverage tracks parsed-length buckets,
// body-size buckets, and two content features over the parsed region that
// only count while the length field matches the body: small inputs (<100
// bytes) are scored by how many parsed bytes sit in the alphabet
// [0x50,0x60) once at least 46 do, larger inputs by their 0x55 marker count.
ExecutionResult run_length_field(const std::vector<std::uint8_t>& in) {
  std::vector<std::uint32_t> edges = {0};
  bool crashed = false;
  if (in.size() >= 4) {
    edges.push_back(1);
    if (in[0] == 'L' && in[1] == 'F') {
      edges.push_back(2);
      const std::size_t field = (static_cast<std::size_t>(in[2]) << 8) | in[3];
      const std::size_t body_len = in.size() - 4;
      const std::size_t parsed = std::min(field, body_len);
      const int size_class = get_group_index(in.size());
      edges.push_back(static_cast<std::uint32_t>(150 + std::min<std::size_t>(body_len / 1024, 15)));
      edges.push_back(static_cast<std::uint32_t>(16 + std::min<std::size_t>(parsed / 256, 15)));
      const bool strict = field == body_len;
      if (strict) {
        edges.push_back(3);
        edges.push_back(static_cast<std::uint32_t>(4 + size_class));
      }
      std::size_t markers = 0;
      std::size_t alpha = 0;
      for (std::size_t i = 0; i < parsed; ++i) {
        const std::uint8_t v = in[4 + i];
        if (v == 0x55) ++markers;
        if (v >= 0x50 && v < 0x60) ++alpha;
      }
      if (strict && in.size() < 100) {
        if (alpha == parsed)
          edges.push_back(static_cast<std::uint32_t>(256 + std::min<std::size_t>(markers, 255)));
      } else if (strict) {
        edges.push_back(static_cast<std::uint32_t>(768 + 512 * (size_class - 1) +
                                                   std::min<std::size_t>(markers, 447)));
      }
      crashed = strict && size_class >= 3 && markers >= 400;
    }
  }
  return finish(std::move(edges), crashed, "marker flood");
}

std::vector<std::uint8_t> bytes_of(std::initializer_list<int> values) {
  std::vector<std::uint8_t> out;
  out.reserve(values.size());
  for (int v : values) out.push_back(static_cast<std::uint8_t>(v));
  return out;
}

}  // namespace

const std::vector<PutHarness>& builtin_puts() {
  static const std::vector<PutHarness> puts = {
      {"magic_gate", 24, run_magic_gate},
      {"chunk_parser", 256, run_chunk_parser},
      {"arith_checker", 40, run_arith_checker},
      {"length_field", 4096, run_length_field},
  };
  return puts;
}

const PutHarness* find_put(const std::string& name) {
  for (const PutHarness& p : builtin_puts()) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

const PutHarness& find_put_or_throw(const std::string& name) {
  const PutHarness* p = find_put(name);
  if (p == nullptr) throw ConfigError("unknown PUT: " + name);
  return *p;
}

std::vector<std::vector<std::uint8_t>> default_seeds(const std::string& put_name) {
  if (put_name == "magic_gate") {
    return {std::vector<std::uint8_t>(16, 0x00), std::vector<std::uint8_t>(16, 0x41)};
  }
  if (put_name == "chunk_parser") {
    return {bytes_of({0x01, 0x02, 0xA1, 0x00, 0x02, 0x02, 0xA2, 0x00, 0x03, 0x02, 0xA3, 0x00,
                      0x04, 0x02, 0xA4, 0x00}),
            std::vector<std::uint8_t>(8, 0x00)};
  }
  if (put_name == "arith_checker") {
    return {std::vector<std::uint8_t>(12, 0x00), std::vector<std::uint8_t>(16, 0x41)};
  }
  if (put_name == "length_field") {
    std::vector<std::uint8_t> small = {'L', 'F', 0x00, 90};
    for (int i = 0; i < 90; ++i) small.push_back(i % 2 == 0 ? 0x55 : 0x50);
    std::vector<std::uint8_t> large = {'L', 'F', 0x0F, 0xFC};
    for (std::size_t i = 0; i < 4092; ++i) {
      std::uint8_t v = static_cast<std::uint8_t>(i * 7 + 13);
      if (v == 0x55) v = 0x56;
      large.push_back(v);
    }
    return {std::move(small), std::move(large)};
  }
  throw ConfigError("unknown PUT: " + put_name);
}

}  // namespace bfz
