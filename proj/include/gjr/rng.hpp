#pragma once

#include <cstdint>
#include <limits>

namespace gjr {

// Counter-based generator: output i of stream (seed, stream) is a fixed
// mix of (key, i), so any path of an ensemble can be regenerated on its own.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next_u64(); }
  result_type next_u64();

  // Uniform on [0,1) with 53 random bits.
  double uniform();
  // Standard normal, Box-Muller with the second variate cached.
  double normal();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace gjr
