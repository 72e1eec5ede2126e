#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace bfz {

// Error carrying the byte offset at which decoding failed.
class SnapshotError : public std::runtime_error {
 public:
  SnapshotError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Little-endian binary writer. Doubles are stored as their IEEE-754 bit
// pattern so round-trips are exact.
class BinWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  void bytes(const std::uint8_t* data, std::size_t n) { buf_.insert(buf_.end(), data, data + n); }

  void blob(const std::vector<std::uint8_t>& b) {
    u64(b.size());
    bytes(b.data(), b.size());
  }

  void str(const std::string& s) {
    u64(s.size());
    bytes(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
  }

  const std::vector<std::uint8_t>& data() const { return buf_; }
  std::size_t size() const { return buf_.size(); }

 private:
  std::vector<std::uint8_t> buf_;
};

class BinReader {
 public:
  BinReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}
  explicit BinReader(const std::vector<std::uint8_t>& v) : BinReader(v.data(), v.size()) {}

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  std::vector<std::uint8_t> blob() {
    const std::uint64_t n = u64();
    need_count(n);
    std::vector<std::uint8_t> out(data_ + pos_, data_ + pos_ + n);
    pos_ += n;
    return out;
  }

  std::string str() {
    const std::uint64_t n = u64();
    need_count(n);
    std::string out(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return out;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return size_ - pos_; }
  bool at_end() const { return pos_ == size_; }

  void expect_end() const {
    if (!at_end()) throw SnapshotError("trailing bytes after decoded payload", pos_);
  }

 private:
  void need(std::size_t n) const {
    if (size_ - pos_ < n) throw SnapshotError("truncated input", pos_);
  }
  void need_count(std::uint64_t n) const {
    if (n > size_ - pos_) throw SnapshotError("declared length exceeds available bytes", pos_);
  }

  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

}  // namespace bfz
