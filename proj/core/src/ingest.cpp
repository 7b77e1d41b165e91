#include "linkpmf/ingest.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace linkpmf {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_seconds(std::string_view text, std::int64_t& out) {
  text = trim(text);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

AuthRecord parse_csv_record(std::string_view line, std::size_t line_no) {
  std::string_view fields[3];
  for (int f = 0; f < 3; ++f) {
    const auto comma = line.find(',');
    if (f < 2 && comma == std::string_view::npos) {
      throw ParseError("expected time,user,host", line_no);
    }
    if (f == 2 && comma != std::string_view::npos) {
      throw ParseError("expected exactly three fields", line_no);
    }
    fields[f] = trim(line.substr(0, comma));
    line.remove_prefix(comma == std::string_view::npos ? line.size() : comma + 1);
  }
  AuthRecord rec;
  if (!parse_seconds(fields[0], rec.time)) {
    throw ParseError("time '" + std::string(fields[0]) + "' is not an integer", line_no);
  }
  if (fields[1].empty() || fields[2].empty()) throw ParseError("empty user or host", line_no);
  rec.user = fields[1];
  rec.host = fields[2];
  return rec;
}

const nlohmann::json* first_field(const nlohmann::json& obj, std::initializer_list<const char*> keys) {
  for (const char* key : keys) {
    const auto it = obj.find(key);
    if (it != obj.end() && !it->is_null()) return &*it;
  }
  return nullptr;
}

AuthRecord parse_json_record(std::string_view line, std::size_t line_no, HostField host_field) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
  }
  if (!obj.is_object()) throw ParseError("record is not a JSON object", line_no);

  AuthRecord rec;
  const auto* time = first_field(obj, {"time", "Time"});
  if (!time) throw ParseError("missing time field", line_no);
  if (time->is_number_integer()) {
    rec.time = time->get<std::int64_t>();
  } else if (!(time->is_string() && parse_seconds(time->get_ref<const std::string&>(), rec.time))) {
    throw ParseError("time is not an integer", line_no);
  }

  const auto* user = first_field(obj, {"user", "UserName"});
  const nlohmann::json* host = nullptr;
  switch (host_field) {
    case HostField::kAuto: host = first_field(obj, {"host", "LogHost", "Source"}); break;
    case HostField::kSource: host = first_field(obj, {"Source"}); break;
    case HostField::kLogHost: host = first_field(obj, {"LogHost"}); break;
  }
  if (!user || !user->is_string()) throw ParseError("missing user field", line_no);
  if (!host || !host->is_string()) throw ParseError("missing host field", line_no);
  rec.user = user->get<std::string>();
  rec.host = host->get<std::string>();
  if (rec.user.empty() || rec.host.empty()) throw ParseError("empty user or host", line_no);
  return rec;
}

}  // namespace

std::vector<AuthRecord> read_event_log(std::istream& in, LogFormat format, HostField host_field) {
  std::vector<AuthRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    if (format == LogFormat::kJsonLines) {
      records.push_back(parse_json_record(body, line_no, host_field));
      continue;
    }
    // A first line whose time field is not numeric is a header.
    if (records.empty() && line_no == 1) {
      std::int64_t ignored = 0;
      if (!parse_seconds(body.substr(0, body.find(',')), ignored)) continue;
    }
    records.push_back(parse_csv_record(body, line_no));
  }
  return records;
}

std::vector<AuthRecord> load_event_log(const std::string& path, HostField host_field) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  const bool json = path.ends_with(".jsonl") || path.ends_with(".json") || path.ends_with(".ndjson");
  return read_event_log(in, json ? LogFormat::kJsonLines : LogFormat::kCsv, host_field);
}

SparseBipartiteGraph ingest_event_log(const std::vector<AuthRecord>& records, TimeWindow window) {
  LabelMap users;
  LabelMap hosts;
  std::vector<Edge> edges;
  for (const auto& rec : records) {
    if (!window.contains(rec.time)) continue;
    edges.push_back({users.intern(rec.user), hosts.intern(rec.host)});
  }
  return SparseBipartiteGraph(std::move(users), std::move(hosts), std::move(edges));
}

TemporalSplit temporal_split(const std::vector<AuthRecord>& records, std::int64_t train_end,
                             std::int64_t test_end) {
  if (!(train_end < test_end)) throw Error("temporal_split requires train_end < test_end");
  LabelMap users;
  LabelMap hosts;
  std::vector<Edge> train_edges;
  std::vector<Edge> test_edges;
  std::unordered_set<std::string> train_users;
  std::unordered_set<std::string> train_hosts;
  for (const auto& rec : records) {
    if (rec.time >= test_end) continue;
    const Edge e{users.intern(rec.user), hosts.intern(rec.host)};
    if (rec.time < train_end) {
      train_edges.push_back(e);
      train_users.insert(rec.user);
      train_hosts.insert(rec.host);
    } else {
      test_edges.push_back(e);
    }
  }
  NewNodes new_nodes;
  for (const auto& label : users.labels()) {
    if (!train_users.contains(label)) new_nodes.users.insert(label);
  }
  for (const auto& label : hosts.labels()) {
    if (!train_hosts.contains(label)) new_nodes.hosts.insert(label);
  }
  return {SparseBipartiteGraph(users, hosts, std::move(train_edges)),
          SparseBipartiteGraph(users, hosts, std::move(test_edges)), std::move(new_nodes)};
}

TemporalGraphSequence daily_snapshots(const std::vector<AuthRecord>& records, std::int64_t origin,
                                      std::size_t n_days, PeriodMap period_map) {
  const std::int64_t end = origin + static_cast<std::int64_t>(n_days) * kSecondsPerDay;
  LabelMap users;
  LabelMap hosts;
  std::vector<std::vector<Edge>> per_day(n_days);
  for (const auto& rec : records) {
    if (rec.time < origin || rec.time >= end) continue;
    const auto day = static_cast<std::size_t>((rec.time - origin) / kSecondsPerDay);
    per_day[day].push_back({users.intern(rec.user), hosts.intern(rec.host)});
  }
  TemporalGraphSequence seq;
  seq.period_map = std::move(period_map);
  seq.snapshots.reserve(n_days);
  for (auto& edges : per_day) seq.snapshots.emplace_back(users, hosts, std::move(edges));
  return seq;
}

}  // namespace linkpmf
