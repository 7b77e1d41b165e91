#include "linkpmf/graph.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace linkpmf {

LabelMap::LabelMap(std::vector<std::string> labels) {
  for (auto& label : labels) {
    if (find(label)) {
      throw Error("duplicate node label '" + label + "'");
    }
    intern(label);
  }
}

NodeId LabelMap::intern(std::string_view label) {
  auto [it, inserted] = index_.try_emplace(std::string(label), static_cast<NodeId>(labels_.size()));
  if (inserted) {
    labels_.emplace_back(label);
  }
  return it->second;
}

std::optional<NodeId> LabelMap::find(std::string_view label) const {
  const auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SparseBipartiteGraph::SparseBipartiteGraph(std::size_t n_users, std::size_t n_hosts,
                                           std::vector<Edge> edges)
    : n_users_(n_users), n_hosts_(n_hosts), edges_(std::move(edges)) {
  for (const Edge& e : edges_) {
    if (e.user >= n_users_ || e.host >= n_hosts_) {
      throw DimensionError("edge (" + std::to_string(e.user) + ", " + std::to_string(e.host) +
                           ") outside a " + std::to_string(n_users_) + " x " +
                           std::to_string(n_hosts_) + " graph");
    }
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  build_indexes();
}

SparseBipartiteGraph::SparseBipartiteGraph(LabelMap users, LabelMap hosts, std::vector<Edge> edges)
    : SparseBipartiteGraph(users.size(), hosts.size(), std::move(edges)) {
  user_labels_ = std::move(users);
  host_labels_ = std::move(hosts);
}

void SparseBipartiteGraph::build_indexes() {
  row_ptr_.assign(n_users_ + 1, 0);
  col_ptr_.assign(n_hosts_ + 1, 0);
  for (const Edge& e : edges_) {
    ++row_ptr_[e.user + 1];
    ++col_ptr_[e.host + 1];
  }
  for (std::size_t i = 0; i < n_users_; ++i) row_ptr_[i + 1] += row_ptr_[i];
  for (std::size_t j = 0; j < n_hosts_; ++j) col_ptr_[j + 1] += col_ptr_[j];

  // Edge ids are visited in (user, host) order, so each column list comes out
  // sorted by user.
  col_edges_.resize(edges_.size());
  std::vector<std::size_t> cursor(col_ptr_.begin(), col_ptr_.end() - 1);
  for (std::size_t id = 0; id < edges_.size(); ++id) {
    col_edges_[cursor[edges_[id].host]++] = id;
  }
}

std::optional<std::size_t> SparseBipartiteGraph::find(NodeId user, NodeId host) const {
  if (user >= n_users_ || host >= n_hosts_) return std::nullopt;
  const auto first = edges_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[user]);
  const auto last = edges_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[user + 1]);
  const auto it = std::lower_bound(first, last, Edge{user, host});
  if (it == last || it->host != host) return std::nullopt;
  return static_cast<std::size_t>(it - edges_.begin());
}

bool SparseBipartiteGraph::contains(NodeId user, NodeId host) const {
  return find(user, host).has_value();
}

std::vector<Edge> new_link_mask(const SparseBipartiteGraph& train, const SparseBipartiteGraph& test) {
  if (!train.same_shape(test)) {
    throw DimensionError("new_link_mask: train and test graphs have different shapes");
  }
  std::vector<Edge> out;
  const auto a = train.edges();
  const auto b = test.edges();
  std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(out));
  return out;
}

// ---------------------------------------------------------------------------
// Text checkpoint

void write_graph(std::ostream& out, const SparseBipartiteGraph& graph) {
  const bool labels = graph.labelled();
  out << "linkpmf-graph 1\n";
  out << "n_users " << graph.n_users() << " n_hosts " << graph.n_hosts() << " nnz " << graph.nnz()
      << " labels " << (labels ? 1 : 0) << '\n';
  if (labels) {
    for (std::size_t i = 0; i < graph.n_users(); ++i) {
      out << "u " << graph.user_labels().label(static_cast<NodeId>(i)) << '\n';
    }
    for (std::size_t j = 0; j < graph.n_hosts(); ++j) {
      out << "h " << graph.host_labels().label(static_cast<NodeId>(j)) << '\n';
    }
  }
  for (const Edge& e : graph.edges()) {
    out << e.user << ' ' << e.host << '\n';
  }
}

SparseBipartiteGraph read_graph(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&](const char* what) {
    if (!std::getline(in, line)) {
      throw ParseError(std::string("graph file truncated: expected ") + what, line_no + 1);
    }
    ++line_no;
  };

  next("header");
  if (line != "linkpmf-graph 1") {
    throw ParseError("not a linkpmf-graph v1 file", line_no);
  }
  next("dimensions");
  std::istringstream dims(line);
  std::string k1, k2, k3, k4;
  std::size_t n_users = 0, n_hosts = 0, nnz = 0;
  int labelled = 0;
  if (!(dims >> k1 >> n_users >> k2 >> n_hosts >> k3 >> nnz >> k4 >> labelled) ||
      k1 != "n_users" || k2 != "n_hosts" || k3 != "nnz" || k4 != "labels") {
    throw ParseError("bad dimension line", line_no);
  }

  LabelMap users, hosts;
  if (labelled) {
    for (std::size_t i = 0; i < n_users + n_hosts; ++i) {
      next("label");
      const bool user_line = i < n_users;
      if (line.size() < 2 || line[0] != (user_line ? 'u' : 'h') || line[1] != ' ') {
        throw ParseError(user_line ? "expected 'u <label>'" : "expected 'h <label>'", line_no);
      }
      auto& map = user_line ? users : hosts;
      const std::string label = line.substr(2);
      if (map.find(label)) throw ParseError("duplicate label '" + label + "'", line_no);
      map.intern(label);
    }
  }

  std::vector<Edge> edges;
  edges.reserve(nnz);
  for (std::size_t e = 0; e < nnz; ++e) {
    next("edge");
    std::istringstream pair(line);
    long long i = -1, j = -1;
    if (!(pair >> i >> j) || i < 0 || j < 0 || static_cast<std::size_t>(i) >= n_users ||
        static_cast<std::size_t>(j) >= n_hosts) {
      throw ParseError("bad edge line '" + line + "'", line_no);
    }
    edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j)});
  }
  if (labelled) {
    return SparseBipartiteGraph(std::move(users), std::move(hosts), std::move(edges));
  }
  return SparseBipartiteGraph(n_users, n_hosts, std::move(edges));
}

void save_graph(const std::string& path, const SparseBipartiteGraph& graph) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_graph(out, graph);
}

SparseBipartiteGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_graph(in);
}

// ---------------------------------------------------------------------------
// Sequences

void TemporalGraphSequence::validate() const {
  for (const auto& g : snapshots) {
    if (!g.same_shape(snapshots.front())) {
      throw DimensionError("snapshots in a sequence must share one node universe");
    }
  }
}

void save_sequence(const std::string& directory, const TemporalGraphSequence& sequence) {
  namespace fs = std::filesystem;
  sequence.validate();
  fs::create_directories(directory);
  nlohmann::json manifest;
  manifest["format"] = "linkpmf-sequence";
  manifest["version"] = 1;
  manifest["period_map"] = sequence.period_map.spec();
  manifest["snapshots"] = nlohmann::json::array();
  for (std::size_t t = 0; t < sequence.length(); ++t) {
    std::ostringstream name;
    name << "day" << std::setw(4) << std::setfill('0') << (t + 1) << ".graph";
    save_graph((fs::path(directory) / name.str()).string(), sequence.snapshots[t]);
    manifest["snapshots"].push_back(name.str());
  }
  std::ofstream out(fs::path(directory) / "manifest.json");
  out << manifest.dump(2) << '\n';
}

TemporalGraphSequence load_sequence(const std::string& directory) {
  namespace fs = std::filesystem;
  const fs::path manifest_path = fs::path(directory) / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw Error("cannot open " + manifest_path.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what(), 0);
  }
  if (manifest.value("format", "") != "linkpmf-sequence" || manifest.value("version", 0) != 1) {
    throw ParseError("manifest is not a linkpmf-sequence v1 document", 0);
  }
  TemporalGraphSequence seq;
  seq.period_map = PeriodMap::parse(manifest.at("period_map").get<std::string>());
  for (const auto& name : manifest.at("snapshots")) {
    seq.snapshots.push_back(load_graph((fs::path(directory) / name.get<std::string>()).string()));
  }
  seq.validate();
  return seq;
}

std::vector<DailyNewLinks> daily_new_link_series(const TemporalGraphSequence& sequence,
                                                 std::size_t burn_in) {
  if (burn_in >= sequence.length()) {
    throw Error("daily_new_link_series: burn_in must be smaller than the number of days");
  }
  sequence.validate();
  std::vector<Edge> seen;  // sorted union of days < t
  std::vector<DailyNewLinks> out;
  for (std::size_t t = 0; t < sequence.length(); ++t) {
    const auto day = sequence.snapshots[t].edges();
    if (t >= burn_in) {
      std::vector<Edge> fresh;
      std::set_difference(day.begin(), day.end(), seen.begin(), seen.end(), std::back_inserter(fresh));
      DailyNewLinks row;
      row.day = t + 1;
      row.links = day.size();
      row.empty_day = day.empty();
      row.new_fraction = day.empty() ? 0.0 : static_cast<double>(fresh.size()) / day.size();
      out.push_back(row);
    }
    std::vector<Edge> merged;
    std::set_union(seen.begin(), seen.end(), day.begin(), day.end(), std::back_inserter(merged));
    seen.swap(merged);
  }
  return out;
}

}  // namespace linkpmf
