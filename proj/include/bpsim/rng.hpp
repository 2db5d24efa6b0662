#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

namespace bpsim {

namespace detail {

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_key(std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(a) ^ (b + 0x9E3779B97F4A7C15ull));
}

}  // namespace detail

/// Counter-based deterministic generator: the output at counter i is a pure
/// function of (seed, stream, i), so independent streams can be drawn in any
/// order (or in parallel) and still reproduce bit-identically.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(detail::mix_key(seed, stream)), counter_(0) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<std::uint64_t>::max(); }

  result_type operator()() { return detail::splitmix64(key_ + 0x632BE59BD9B4E019ull * ++counter_); }

  /// Derive a child stream; children are independent of the parent's counter.
  CounterRng substream(std::uint64_t stream) const { return CounterRng(key_, stream); }

  /// Uniform double in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // Bounded rejection keeps the draw unbiased.
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t v = (*this)();
    while (v >= limit) v = (*this)();
    return v % n;
  }

  /// Standard normal via Box-Muller; avoids log(0) by offsetting u1.
  double gaussian() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Exponential with the given rate (mean 1/rate).
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  /// Poisson count. Knuth multiplication for small means, normal
  /// approximation above 256 where the relative error is negligible.
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean > 256.0) {
      const double v = mean + std::sqrt(mean) * gaussian();
      return v <= 0.0 ? 0 : static_cast<std::uint64_t>(std::llround(v));
    }
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

/// Cumulative table for drawing indices from a discrete distribution.
class CategoricalSampler {
 public:
  explicit CategoricalSampler(const std::vector<double>& weights) : cumulative_(weights.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i] > 0.0 ? weights[i] : 0.0;
      cumulative_[i] = acc;
    }
    total_ = acc;
  }

  double total() const { return total_; }

  std::size_t draw(CounterRng& rng) const {
    const double u = rng.uniform() * total_;
    // Binary search for the first cumulative value > u.
    std::size_t lo = 0, hi = cumulative_.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (cumulative_[mid] > u)
        hi = mid;
      else
        lo = mid + 1;
    }
    return lo;
  }

 private:
  std::vector<double> cumulative_;
  double total_ = 0.0;
};

}  // namespace bpsim
