#pragma once

#include <cstdint>
#include <vector>

#include "banditfuzz/binio.hpp"

namespace bfz {

// ADWIN2 adaptive window over a 0/1 reward stream.
//
// Buckets are kept in exponentially sized rows: row i holds buckets that
// summarize 2^i elements each, at most max_buckets_per_row per row after an
// insertion completes. Oldest data sits in the highest row, and within a row
// the front bucket is the oldest. A cut drops the oldest bucket whenever two
// adjacent sub-windows have means that differ by more than the Hoeffding-style
// threshold at confidence delta_cut.
class AdwinWindow {
 public:
  AdwinWindow() : AdwinWindow(10, 1e-7) {}
  AdwinWindow(int max_buckets_per_row, double delta_cut);

  // Appends one 0/1 observation. Returns true if a cut dropped old data.
  bool insert(double r);

  std::uint64_t count() const { return count_; }
  double sum() const { return sum_; }
  double mean() const { return count_ > 0 ? sum_ / static_cast<double>(count_) : 0.0; }

  int max_buckets_per_row() const { return max_per_row_; }
  double delta_cut() const { return delta_; }
  std::size_t bucket_count() const;
  std::size_t row_count() const { return rows_.size(); }
  std::size_t row_width(std::size_t row) const { return rows_[row].size(); }

  void save(BinWriter& w) const;
  static AdwinWindow load(BinReader& r);

  bool operator==(const AdwinWindow& other) const;

 private:
  struct Bucket {
    double sum = 0.0;
    std::uint64_t count = 0;
  };

  void append_new_bucket(double r);
  void compress();
  bool detect_and_cut();
  void drop_oldest_bucket();
  double cut_threshold(double n0, double n1) const;

  int max_per_row_;
  double delta_;
  // rows_[i]: buckets of 2^i elements, front = oldest within the row.
  std::vector<std::vector<Bucket>> rows_;
  std::uint64_t count_ = 0;
  double sum_ = 0.0;
};

}  // namespace bfz
