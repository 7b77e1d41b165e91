#pragma once

#include <cstddef>
#include <string>

namespace linkpmf {

/// t' = 1 + (t mod P), for t >= 1.
int default_period_map(long t, int period);

/// Maps a 1-based day index to a seasonal segment in 1..period().
///
/// Two schedules are supported:
///  - modular:P   segment = 1 + (t mod P)
///  - lanl4       1 = Mon-Thu, 2 = Sat/Sun, 3 = "on" Friday, 4 = "off" Friday.
///                `anchor_weekday` is the weekday of day 1 (0 = Monday) and
///                `friday_origin` is the day index of an "on" Friday; Fridays
///                alternate from there.
/// Segment 1 is the reference segment whose seasonal adjustments are fixed.
class PeriodMap {
 public:
  static PeriodMap modular(int period);
  static PeriodMap lanl4(int anchor_weekday, long friday_origin);
  /// Parses "modular:P" or "lanl4:<anchor_weekday>:<friday_origin>".
  static PeriodMap parse(const std::string& spec);

  int segment(long t) const;
  int period() const noexcept { return period_; }
  std::string spec() const;

  /// Last day index the map is valid for; 0 means unbounded.
  long horizon() const noexcept { return horizon_; }
  PeriodMap with_horizon(long horizon) const;

  /// Weekday of day t (0 = Monday). Only meaningful for lanl4.
  int weekday(long t) const;

 private:
  enum class Kind { kModular, kLanl4 };
  PeriodMap(Kind kind, int period) : kind_(kind), period_(period) {}

  Kind kind_;
  int period_;
  int anchor_weekday_ = 0;
  long friday_origin_ = 0;
  long horizon_ = 0;
};

}  // namespace linkpmf
