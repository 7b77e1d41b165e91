#include "linkpmf/sampling.hpp"

#include <random>
#include <unordered_set>

#include "linkpmf/random.hpp"

namespace linkpmf {

namespace {

std::uint64_t cell_id(NodeId i, NodeId j) { return (static_cast<std::uint64_t>(i) << 32) | j; }

bool eligible(const EvalSplit& split, const NegativeSampling& sampling, NodeId i, NodeId j) {
  if (split.test->contains(i, j)) return false;
  switch (sampling.category) {
    case PairCategory::kAll:
      return !(sampling.exclude_train_edges && split.train->contains(i, j));
    case PairCategory::kNew: return !split.train->contains(i, j);
    case PairCategory::kColdStartUser: return split.new_users[i];
    case PairCategory::kColdStartHost: return split.new_hosts[j];
  }
  return false;
}

std::vector<NodeId> flagged(const std::vector<bool>& flags) {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i]) out.push_back(static_cast<NodeId>(i));
  }
  return out;
}

}  // namespace

EvalSplit::EvalSplit(const SparseBipartiteGraph& train_graph, const SparseBipartiteGraph& test_graph,
                     std::vector<bool> new_user_flags, std::vector<bool> new_host_flags)
    : train(&train_graph),
      test(&test_graph),
      new_users(std::move(new_user_flags)),
      new_hosts(std::move(new_host_flags)) {
  if (!train_graph.same_shape(test_graph)) {
    throw DimensionError("train and test graphs have different shapes");
  }
  if (new_users.empty()) new_users.assign(train_graph.n_users(), false);
  if (new_hosts.empty()) new_hosts.assign(train_graph.n_hosts(), false);
  if (new_users.size() != train_graph.n_users() || new_hosts.size() != train_graph.n_hosts()) {
    throw DimensionError("new-node flags do not match the graph shape");
  }
}

EvalSplit split_with_inferred_new_nodes(const SparseBipartiteGraph& train,
                                        const SparseBipartiteGraph& test) {
  if (!train.same_shape(test)) throw DimensionError("train and test graphs have different shapes");
  std::vector<bool> users(train.n_users());
  std::vector<bool> hosts(train.n_hosts());
  for (std::size_t i = 0; i < users.size(); ++i) {
    const auto id = static_cast<NodeId>(i);
    users[i] = train.user_degree(id) == 0 && test.user_degree(id) > 0;
  }
  for (std::size_t j = 0; j < hosts.size(); ++j) {
    const auto id = static_cast<NodeId>(j);
    hosts[j] = train.host_degree(id) == 0 && test.host_degree(id) > 0;
  }
  return EvalSplit(train, test, std::move(users), std::move(hosts));
}

std::vector<Edge> positive_pairs(const EvalSplit& split, PairCategory category) {
  std::vector<Edge> out;
  for (const Edge& e : split.test->edges()) {
    bool keep = true;
    switch (category) {
      case PairCategory::kAll: break;
      case PairCategory::kNew: keep = !split.train->contains(e.user, e.host); break;
      case PairCategory::kColdStartUser: keep = split.new_users[e.user]; break;
      case PairCategory::kColdStartHost: keep = split.new_hosts[e.host]; break;
    }
    if (keep) out.push_back(e);
  }
  return out;
}

std::uint64_t eligible_negatives(const EvalSplit& split, const NegativeSampling& sampling) {
  const auto& train = *split.train;
  const auto& test = *split.test;
  const std::uint64_t cells = static_cast<std::uint64_t>(test.n_users()) * test.n_hosts();
  switch (sampling.category) {
    case PairCategory::kAll:
    case PairCategory::kNew: {
      std::uint64_t blocked = test.nnz();
      if (sampling.category == PairCategory::kNew || sampling.exclude_train_edges) {
        for (const Edge& e : train.edges()) blocked += !test.contains(e.user, e.host);
      }
      return cells - blocked;
    }
    case PairCategory::kColdStartUser: {
      std::uint64_t n = 0;
      for (const NodeId i : flagged(split.new_users)) n += test.n_hosts() - test.user_degree(i);
      return n;
    }
    case PairCategory::kColdStartHost: {
      std::uint64_t n = 0;
      for (const NodeId j : flagged(split.new_hosts)) n += test.n_users() - test.host_degree(j);
      return n;
    }
  }
  return 0;
}

std::vector<Edge> all_negatives(const EvalSplit& split, const NegativeSampling& sampling) {
  std::vector<Edge> out;
  const auto& test = *split.test;
  for (std::size_t i = 0; i < test.n_users(); ++i) {
    const auto ui = static_cast<NodeId>(i);
    if (sampling.category == PairCategory::kColdStartUser && !split.new_users[i]) continue;
    for (std::size_t j = 0; j < test.n_hosts(); ++j) {
      const auto uj = static_cast<NodeId>(j);
      if (eligible(split, sampling, ui, uj)) out.push_back({ui, uj});
    }
  }
  return out;
}

std::vector<Edge> subsample_negatives(const EvalSplit& split, const NegativeSampling& sampling,
                                      std::size_t count, std::uint64_t seed) {
  const std::uint64_t supply = eligible_negatives(split, sampling);
  if (count > supply) {
    throw Error("requested " + std::to_string(count) + " negatives but only " +
                std::to_string(supply) + " eligible zero cells exist");
  }
  CounterRng rng(stream_key(seed, "eval.negatives"));
  if (count == 0) return {};

  // Proposal space: whole matrix, or the rows/columns of new nodes.
  std::vector<NodeId> rows;
  std::vector<NodeId> cols;
  const auto& test = *split.test;
  if (sampling.category == PairCategory::kColdStartUser) {
    rows = flagged(split.new_users);
  } else {
    rows.resize(test.n_users());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<NodeId>(i);
  }
  if (sampling.category == PairCategory::kColdStartHost) {
    cols = flagged(split.new_hosts);
  } else {
    cols.resize(test.n_hosts());
    for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = static_cast<NodeId>(j);
  }
  const double space = static_cast<double>(rows.size()) * static_cast<double>(cols.size());

  std::vector<Edge> out;
  out.reserve(count);
  if (2 * count > supply || 10.0 * static_cast<double>(supply) < space) {
    // Dense request: enumerate and take a uniform subset (partial shuffle).
    std::vector<Edge> pool = all_negatives(split, sampling);
    for (std::size_t k = 0; k < count; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
      std::swap(pool[k], pool[pick(rng)]);
    }
    pool.resize(count);
    return pool;
  }
  std::uniform_int_distribution<std::size_t> row_pick(0, rows.size() - 1);
  std::uniform_int_distribution<std::size_t> col_pick(0, cols.size() - 1);
  std::unordered_set<std::uint64_t> taken;
  taken.reserve(count * 2);
  while (out.size() < count) {
    const NodeId i = rows[row_pick(rng)];
    const NodeId j = cols[col_pick(rng)];
    if (!eligible(split, sampling, i, j)) continue;
    if (!taken.insert(cell_id(i, j)).second) continue;
    out.push_back({i, j});
  }
  return out;
}

}  // namespace linkpmf
