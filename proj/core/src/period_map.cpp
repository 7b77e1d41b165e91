#include "linkpmf/period_map.hpp"

#include <charconv>
#include <cstdlib>
#include <string_view>
#include <vector>

#include "linkpmf/common.hpp"

namespace linkpmf {

namespace {

constexpr int kFriday = 4;

long floor_mod(long a, long m) {
  const long r = a % m;
  return r < 0 ? r + m : r;
}

long parse_long(std::string_view text, const std::string& spec) {
  long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error("invalid period map '" + spec + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

int default_period_map(long t, int period) {
  if (period < 1) throw Error("period must be >= 1");
  if (t < 1) throw Error("day index must be >= 1");
  return 1 + static_cast<int>(t % period);
}

PeriodMap PeriodMap::modular(int period) {
  if (period < 1) throw Error("period must be >= 1");
  return PeriodMap(Kind::kModular, period);
}

PeriodMap PeriodMap::lanl4(int anchor_weekday, long friday_origin) {
  if (anchor_weekday < 0 || anchor_weekday > 6) {
    throw Error("anchor weekday must be in 0..6 (0 = Monday)");
  }
  PeriodMap map(Kind::kLanl4, 4);
  map.anchor_weekday_ = anchor_weekday;
  map.friday_origin_ = friday_origin;
  if (map.weekday(friday_origin) != kFriday) {
    throw Error("friday origin " + std::to_string(friday_origin) + " is not a Friday");
  }
  return map;
}

PeriodMap PeriodMap::parse(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts[0] == "modular" && parts.size() == 2) {
    return modular(static_cast<int>(parse_long(parts[1], spec)));
  }
  if (parts[0] == "lanl4" && parts.size() == 3) {
    return lanl4(static_cast<int>(parse_long(parts[1], spec)), parse_long(parts[2], spec));
  }
  throw Error("unknown period map '" + spec + "'; expected modular:P or lanl4:<weekday>:<origin>");
}

int PeriodMap::weekday(long t) const {
  return static_cast<int>(floor_mod(anchor_weekday_ + t - 1, 7));
}

int PeriodMap::segment(long t) const {
  if (t < 1) throw Error("day index must be >= 1");
  if (horizon_ > 0 && t > horizon_) {
    throw Error("day " + std::to_string(t) + " is beyond the period map horizon " +
                std::to_string(horizon_));
  }
  if (kind_ == Kind::kModular) return default_period_map(t, period_);
  const int wd = weekday(t);
  if (wd < kFriday) return 1;
  if (wd > kFriday) return 2;
  const long weeks = (t - friday_origin_) / 7;  // exact, both are Fridays
  return floor_mod(weeks, 2) == 0 ? 3 : 4;
}

std::string PeriodMap::spec() const {
  if (kind_ == Kind::kModular) return "modular:" + std::to_string(period_);
  return "lanl4:" + std::to_string(anchor_weekday_) + ":" + std::to_string(friday_origin_);
}

PeriodMap PeriodMap::with_horizon(long horizon) const {
  if (horizon < 0) throw Error("horizon must be >= 0");
  PeriodMap copy = *this;
  copy.horizon_ = horizon;
  return copy;
}

}  // namespace linkpmf
