#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace bfz {

// Deterministic random stream: a seeded mt19937_64 plus explicit
// distribution transforms, so every draw is pinned by this file rather
// than by implementation-defined <random> distributions. Same seed,
// same sequence; state round-trips through serialize()/deserialize().
class RngStream {
 public:
  RngStream() : RngStream(0) {}
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe under log().
  double uniform01_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("RngStream::below: n must be positive");
    const std::uint64_t threshold = (0 - n) % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x < threshold);
    return x % n;
  }

  std::uint8_t byte() { return static_cast<std::uint8_t>(below(256)); }

  bool coin() { return below(2) != 0; }

  // Standard normal via Box-Muller. Computes a fresh pair each call and
  // discards the second value, so no hidden cache state exists.
  double normal() {
    const double u1 = uniform01_pos();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // Gamma(shape, 1) via Marsaglia-Tsang, with the boost trick for shape < 1.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("RngStream::gamma: shape must be positive");
    if (shape < 1.0) {
      const double u = uniform01_pos();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x;
      double v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    const double s = x + y;
    if (s <= 0.0) return 0.5;
    return x / s;
  }

  std::string serialize() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  void deserialize(const std::string& text) {
    std::istringstream is(text);
    is >> engine_;
    if (is.fail()) throw std::invalid_argument("RngStream::deserialize: malformed state");
  }

  bool operator==(const RngStream& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace bfz
