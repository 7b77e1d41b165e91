#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace linkpmf {

/// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives a sub-stream key from the run seed and a label, e.g.
/// `stream_key(seed, "cavi.init")`. Every random consumer in the library uses
/// its own label so adding a consumer never shifts another one's draws.
std::uint64_t stream_key(std::uint64_t seed, std::string_view label) noexcept;

/// Counter-based generator: the n-th output of stream (key, id) is a pure
/// function of (key, id, n). Satisfies UniformRandomBitGenerator so it plugs
/// into the <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key, std::uint64_t stream = 0) noexcept
      : base_(mix64(key ^ mix64(stream ^ 0xD1B54A32D192ED03ULL))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return mix64(base_ + 0x9E3779B97F4A7C15ULL * ++counter_); }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t draws() const noexcept { return counter_; }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

}  // namespace linkpmf
