#include "linkpmf/random.hpp"

#include "linkpmf/common.hpp"

namespace linkpmf {

std::uint64_t stream_key(std::uint64_t seed, std::string_view label) noexcept {
  // FNV-1a over the label, then mixed with the seed.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return mix64(seed ^ mix64(h));
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 64;
  if (values.size() <= kBlock) {
    double s = 0.0;
    for (const double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace linkpmf
