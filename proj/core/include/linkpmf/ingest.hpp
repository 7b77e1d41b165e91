#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "linkpmf/graph.hpp"

namespace linkpmf {

/// One authentication event reduced to (time, user, host).
struct AuthRecord {
  std::int64_t time = 0;  // integer seconds
  std::string user;
  std::string host;
};

enum class LogFormat { kCsv, kJsonLines };

/// Which field of a JSON-lines record names the host. `kAuto` takes `host`,
/// then `LogHost`, then `Source`.
enum class HostField { kAuto, kSource, kLogHost };

/// Parses a whole log. CSV rows are `time,user,host` with an optional header
/// line; JSON-lines records may use `time`/`Time`, `user`/`UserName`.
/// Throws ParseError carrying the 1-based line number.
std::vector<AuthRecord> read_event_log(std::istream& in, LogFormat format,
                                       HostField host_field = HostField::kAuto);
std::vector<AuthRecord> load_event_log(const std::string& path, HostField host_field = HostField::kAuto);

/// Half-open time interval [begin, end).
struct TimeWindow {
  std::int64_t begin = 0;
  std::int64_t end = 0;
  bool contains(std::int64_t t) const noexcept { return t >= begin && t < end; }
  bool empty() const noexcept { return end <= begin; }
};

constexpr std::int64_t kSecondsPerDay = 86400;

/// One edge per distinct in-window (user, host) pair. Labels get indices in
/// first-seen order among in-window records. An empty window yields an empty graph.
SparseBipartiteGraph ingest_event_log(const std::vector<AuthRecord>& records, TimeWindow window);

struct NewNodes {
  std::set<std::string> users;
  std::set<std::string> hosts;
};

struct TemporalSplit {
  SparseBipartiteGraph train;
  SparseBipartiteGraph test;
  NewNodes new_nodes;
};

/// Train = records with time < train_end, test = train_end <= time < test_end.
/// Both graphs share the node universe of all records before test_end
/// (first-seen order); new_nodes holds labels that appear only in the test window.
TemporalSplit temporal_split(const std::vector<AuthRecord>& records, std::int64_t train_end,
                             std::int64_t test_end);

/// Day t (1-based) covers [origin + (t-1)*86400, origin + t*86400).
TemporalGraphSequence daily_snapshots(const std::vector<AuthRecord>& records, std::int64_t origin,
                                      std::size_t n_days, PeriodMap period_map);

}  // namespace linkpmf
