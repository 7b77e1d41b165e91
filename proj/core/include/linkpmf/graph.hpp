#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "linkpmf/common.hpp"
#include "linkpmf/period_map.hpp"

namespace linkpmf {

enum class Side { kUser, kHost };

struct Edge {
  NodeId user = 0;
  NodeId host = 0;
  auto operator<=>(const Edge&) const = default;
};

/// Bijection between external node labels and dense indices 0..size()-1.
/// Indices are handed out in first-seen order.
class LabelMap {
 public:
  LabelMap() = default;
  explicit LabelMap(std::vector<std::string> labels);

  /// Index of `label`, inserting it if unseen.
  NodeId intern(std::string_view label);
  std::optional<NodeId> find(std::string_view label) const;
  const std::string& label(NodeId id) const { return labels_.at(id); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }

  friend bool operator==(const LabelMap& a, const LabelMap& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> index_;
};

/// Binary bipartite adjacency stored as a sorted coordinate list with a
/// row (user) index and a column (host) index over the same edge ids.
///
/// Edge ids follow (user, host) lexicographic order, so the edges of user i
/// are the contiguous id range row_begin(i)..row_end(i). The column index
/// lists, for each host, the ids of its edges in increasing user order.
/// Immutable after construction.
class SparseBipartiteGraph {
 public:
  SparseBipartiteGraph() = default;

  /// Duplicate edges are merged. Throws DimensionError for out-of-range ids.
  SparseBipartiteGraph(std::size_t n_users, std::size_t n_hosts, std::vector<Edge> edges);

  /// Same, with node labels; each map must be empty or match its side's size.
  SparseBipartiteGraph(LabelMap users, LabelMap hosts, std::vector<Edge> edges);

  std::size_t n_users() const noexcept { return n_users_; }
  std::size_t n_hosts() const noexcept { return n_hosts_; }
  std::size_t nnz() const noexcept { return edges_.size(); }

  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(std::size_t id) const { return edges_[id]; }

  std::size_t row_begin(NodeId user) const { return row_ptr_[user]; }
  std::size_t row_end(NodeId user) const { return row_ptr_[user + 1]; }
  std::size_t user_degree(NodeId user) const { return row_end(user) - row_begin(user); }

  /// Edge ids incident to `host`, ordered by user.
  std::span<const std::size_t> column(NodeId host) const {
    return {col_edges_.data() + col_ptr_[host], col_edges_.data() + col_ptr_[host + 1]};
  }
  std::size_t host_degree(NodeId host) const { return col_ptr_[host + 1] - col_ptr_[host]; }

  bool contains(NodeId user, NodeId host) const;
  std::optional<std::size_t> find(NodeId user, NodeId host) const;

  const LabelMap& user_labels() const noexcept { return user_labels_; }
  const LabelMap& host_labels() const noexcept { return host_labels_; }
  bool labelled() const noexcept { return !user_labels_.empty() || !host_labels_.empty(); }

  bool same_shape(const SparseBipartiteGraph& other) const noexcept {
    return n_users_ == other.n_users_ && n_hosts_ == other.n_hosts_;
  }

 private:
  void build_indexes();

  std::size_t n_users_ = 0;
  std::size_t n_hosts_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_ptr_{0};
  std::vector<std::size_t> col_edges_;
  LabelMap user_labels_;
  LabelMap host_labels_;
};

/// Edges of `test` absent from `train`. Throws DimensionError on shape mismatch.
std::vector<Edge> new_link_mask(const SparseBipartiteGraph& train, const SparseBipartiteGraph& test);

/// Text checkpoint: a header line `linkpmf-graph 1`, a dimension line
/// `n_users N n_hosts M nnz E labels 0|1`, optional `u <label>` / `h <label>`
/// lines, then one `i j` pair per edge.
void write_graph(std::ostream& out, const SparseBipartiteGraph& graph);
SparseBipartiteGraph read_graph(std::istream& in);
void save_graph(const std::string& path, const SparseBipartiteGraph& graph);
SparseBipartiteGraph load_graph(const std::string& path);

/// Daily snapshots over one node universe, with the map from day index t
/// (1-based) to seasonal segment.
struct TemporalGraphSequence {
  std::vector<SparseBipartiteGraph> snapshots;
  PeriodMap period_map = PeriodMap::modular(1);

  std::size_t length() const noexcept { return snapshots.size(); }
  std::size_t n_users() const { return snapshots.empty() ? 0 : snapshots.front().n_users(); }
  std::size_t n_hosts() const { return snapshots.empty() ? 0 : snapshots.front().n_hosts(); }
  /// Throws DimensionError if snapshot shapes differ.
  void validate() const;
};

/// Directory layout: `manifest.json` plus one graph file per day.
void save_sequence(const std::string& directory, const TemporalGraphSequence& sequence);
TemporalGraphSequence load_sequence(const std::string& directory);

struct DailyNewLinks {
  std::size_t day = 0;  // 1-based
  std::size_t links = 0;
  double new_fraction = 0.0;
  bool empty_day = false;  // no links; new_fraction reported as 0
};

/// For each day t > burn_in: |E_t| and the share of E_t never seen on days < t.
std::vector<DailyNewLinks> daily_new_link_series(const TemporalGraphSequence& sequence,
                                                 std::size_t burn_in);

}  // namespace linkpmf
