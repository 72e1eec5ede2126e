#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "banditfuzz/adwin.hpp"
#include "banditfuzz/rng.hpp"

using namespace bfz;

TEST_CASE("constant stream: no cut, exact mean and count") {
  AdwinWindow w(10, 1e-7);
  for (int i = 0; i < 1000; ++i) CHECK_FALSE(w.insert(0.0));
  CHECK(w.count() == 1000);
  CHECK(w.mean() == 0.0);

  AdwinWindow ones(10, 1e-7);
  for (int i = 0; i < 1000; ++i) CHECK_FALSE(ones.insert(1.0));
  CHECK(ones.mean() == 1.0);
}

TEST_CASE("mean switch from 0.9 to 0.1 is cut and the window forgets") {
  RngStream rng(424242);
  AdwinWindow w(10, 1e-7);
  for (int i = 0; i < 500; ++i) w.insert(rng.uniform01() < 0.9 ? 1.0 : 0.0);
  bool cut = false;
  for (int i = 0; i < 500; ++i) {
    const std::uint64_t before = w.count();
    if (w.insert(rng.uniform01() < 0.1 ? 1.0 : 0.0)) {
      cut = true;
      CHECK(w.count() < before + 1);  // strictly below the no-cut count
    }
  }
  CHECK(cut);
  CHECK(w.mean() < 0.3);
}

TEST_CASE("bucket rows stay within M and total buckets stay logarithmic") {
  RngStream rng(7);
  AdwinWindow w(10, 1e-3);
  for (int i = 0; i < 20000; ++i) {
    w.insert(rng.uniform01() < 0.5 ? 1.0 : 0.0);
    for (std::size_t row = 0; row < w.row_count(); ++row) REQUIRE(w.row_width(row) <= 10);
    const double cnt = static_cast<double>(w.count());
    const std::size_t limit =
        static_cast<std::size_t>(10 * (std::floor(std::log2(cnt)) + 2.0));
    REQUIRE(w.bucket_count() <= limit);
    REQUIRE(w.mean() == doctest::Approx(w.sum() / cnt).epsilon(1e-12));
  }
}

TEST_CASE("stored mean equals sum over count after cuts") {
  RngStream rng(99);
  AdwinWindow w(10, 1e-4);
  for (int i = 0; i < 3000; ++i) {
    const double p = i < 1500 ? 0.95 : 0.05;
    w.insert(rng.uniform01() < p ? 1.0 : 0.0);
  }
  CHECK(w.count() > 0);
  CHECK(w.mean() == doctest::Approx(w.sum() / static_cast<double>(w.count())).epsilon(1e-12));
}

TEST_CASE("window state round-trips through the binary codec") {
  RngStream rng(31);
  AdwinWindow w(10, 1e-7);
  for (int i = 0; i < 777; ++i) w.insert(rng.uniform01() < 0.6 ? 1.0 : 0.0);
  BinWriter writer;
  w.save(writer);
  BinReader reader(writer.data());
  const AdwinWindow copy = AdwinWindow::load(reader);
  CHECK(copy == w);
  CHECK(reader.at_end());
}

TEST_CASE("rejects invalid parameters and non-binary rewards") {
  CHECK_THROWS_AS(AdwinWindow(0, 1e-7), std::invalid_argument);
  CHECK_THROWS_AS(AdwinWindow(10, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(AdwinWindow(10, 1.0), std::invalid_argument);
  AdwinWindow w(10, 1e-7);
  CHECK_THROWS_AS(w.insert(0.5), std::invalid_argument);
}
