#include "banditfuzz/adwin.hpp"

#include <cmath>
#include <stdexcept>

namespace bfz {

AdwinWindow::AdwinWindow(int max_buckets_per_row, double delta_cut)
    : max_per_row_(max_buckets_per_row), delta_(delta_cut) {
  if (max_per_row_ < 1) throw std::invalid_argument("AdwinWindow: M must be >= 1");
  if (!(delta_ > 0.0 && delta_ < 1.0))
    throw std::invalid_argument("AdwinWindow: delta_cut must be in (0,1)");
}

bool AdwinWindow::insert(double r) {
  if (r != 0.0 && r != 1.0) throw std::invalid_argument("AdwinWindow: rewards must be 0 or 1");
  append_new_bucket(r);
  compress();
  return detect_and_cut();
}

void AdwinWindow::append_new_bucket(double r) {
  if (rows_.empty()) rows_.emplace_back();
  rows_[0].push_back(Bucket{r, 1});
  count_ += 1;
  sum_ += r;
}

void AdwinWindow::compress() {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    while (rows_[i].size() > static_cast<std::size_t>(max_per_row_)) {
      // Merge the two oldest buckets of this row into one of the next.
      Bucket merged{rows_[i][0].sum + rows_[i][1].sum, rows_[i][0].count + rows_[i][1].count};
      rows_[i].erase(rows_[i].begin(), rows_[i].begin() + 2);
      if (i + 1 == rows_.size()) rows_.emplace_back();
      rows_[i + 1].push_back(merged);
    }
  }
}

double AdwinWindow::cut_threshold(double n0, double n1) const {
  // Harmonic-mean form of the ADWIN2 bound with delta' = delta / n.
  const double m = 1.0 / (1.0 / n0 + 1.0 / n1);
  const double dp = delta_ / static_cast<double>(count_);
  return std::sqrt(1.0 / (2.0 * m) * std::log(4.0 / dp));
}

bool AdwinWindow::detect_and_cut() {
  bool any_cut = false;
  bool cut_found = true;
  while (cut_found && count_ > 1) {
    cut_found = false;
    // Walk buckets oldest to newest, testing every adjacent split.
    double n0 = 0.0;
    double s0 = 0.0;
    for (std::size_t ri = rows_.size(); ri-- > 0 && !cut_found;) {
      for (const Bucket& b : rows_[ri]) {
        n0 += static_cast<double>(b.count);
        s0 += b.sum;
        const double n1 = static_cast<double>(count_) - n0;
        if (n1 <= 0.0) break;
        const double mean0 = s0 / n0;
        const double mean1 = (sum_ - s0) / n1;
        if (std::fabs(mean0 - mean1) >= cut_threshold(n0, n1)) {
          drop_oldest_bucket();
          any_cut = true;
          cut_found = true;
          break;
        }
      }
    }
  }
  return any_cut;
}

void AdwinWindow::drop_oldest_bucket() {
  for (std::size_t ri = rows_.size(); ri-- > 0;) {
    if (!rows_[ri].empty()) {
      count_ -= rows_[ri].front().count;
      sum_ -= rows_[ri].front().sum;
      rows_[ri].erase(rows_[ri].begin());
      while (!rows_.empty() && rows_.back().empty()) rows_.pop_back();
      return;
    }
  }
}

std::size_t AdwinWindow::bucket_count() const {
  std::size_t n = 0;
  for (const auto& row : rows_) n += row.size();
  return n;
}

void AdwinWindow::save(BinWriter& w) const {
  w.u32(static_cast<std::uint32_t>(max_per_row_));
  w.f64(delta_);
  w.u64(count_);
  w.f64(sum_);
  w.u64(rows_.size());
  for (const auto& row : rows_) {
    w.u64(row.size());
    for (const Bucket& b : row) {
      w.f64(b.sum);
      w.u64(b.count);
    }
  }
}

AdwinWindow AdwinWindow::load(BinReader& r) {
  const int m = static_cast<int>(r.u32());
  const double delta = r.f64();
  AdwinWindow w(m, delta);
  w.count_ = r.u64();
  w.sum_ = r.f64();
  const std::uint64_t nrows = r.u64();
  w.rows_.resize(nrows);
  for (auto& row : w.rows_) {
    const std::uint64_t nb = r.u64();
    row.resize(nb);
    for (Bucket& b : row) {
      b.sum = r.f64();
      b.count = r.u64();
    }
  }
  return w;
}

bool AdwinWindow::operator==(const AdwinWindow& other) const {
  if (max_per_row_ != other.max_per_row_ || delta_ != other.delta_ || count_ != other.count_ ||
      sum_ != other.sum_ || rows_.size() != other.rows_.size())
    return false;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].size() != other.rows_[i].size()) return false;
    for (std::size_t j = 0; j < rows_[i].size(); ++j) {
      if (rows_[i][j].sum != other.rows_[i][j].sum || rows_[i][j].count != other.rows_[i][j].count)
        return false;
    }
  }
  return true;
}

}  // namespace bfz
