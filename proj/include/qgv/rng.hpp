#pragma once

// Deterministic random streams.
//
// mt19937_64 is bit-stable by the standard, but the std distributions are
// not, so the uniform/normal transforms are spelled out here. A stream is
// identified by (master seed, path of substream ids); deriving the same path
// twice gives the same stream, which is what makes checkerboard sweeps
// reproducible independent of thread count.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace qgv {

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}

  // Deterministic substream: hash-mixes the path into a seed_seq.
  static RngStream derive(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::vector<std::uint32_t> words;
    words.push_back(static_cast<std::uint32_t>(master));
    words.push_back(static_cast<std::uint32_t>(master >> 32));
    for (std::uint64_t p : path) {
      words.push_back(static_cast<std::uint32_t>(p));
      words.push_back(static_cast<std::uint32_t>(p >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    RngStream s(0);
    s.eng_.seed(seq);
    return s;
  }

  std::uint64_t bits() { return eng_(); }

  // Uniform on [0,1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform on [a,b).
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Unbiased integer in [0,n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do { x = eng_(); } while (x >= limit);
    return x % n;
  }

  // Standard normal via polar Box-Muller (rejection is fine: stream is owned).
  double normal() {
    if (have_spare_) { have_spare_ = false; return spare_; }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double k = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * k;
    have_spare_ = true;
    return u * k;
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qgv
