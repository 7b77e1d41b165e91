#pragma once

#include <cstdint>
#include <vector>

#include "linkpmf/auc.hpp"
#include "linkpmf/graph.hpp"

namespace linkpmf {

/// Training and test adjacency over one node universe, with the nodes that
/// first appear in the test period flagged.
struct EvalSplit {
  const SparseBipartiteGraph* train = nullptr;
  const SparseBipartiteGraph* test = nullptr;
  std::vector<bool> new_users;
  std::vector<bool> new_hosts;

  /// Throws DimensionError on mismatched shapes or flag vectors.
  EvalSplit(const SparseBipartiteGraph& train, const SparseBipartiteGraph& test,
            std::vector<bool> new_users = {}, std::vector<bool> new_hosts = {});
};

/// Flags users/hosts with no training edge but at least one test edge.
EvalSplit split_with_inferred_new_nodes(const SparseBipartiteGraph& train,
                                        const SparseBipartiteGraph& test);

/// Test edges in `category`: all, new (absent from train), or incident to a
/// new user / new host.
std::vector<Edge> positive_pairs(const EvalSplit& split, PairCategory category);

struct NegativeSampling {
  PairCategory category = PairCategory::kAll;
  /// For kAll also skip cells that are training edges.
  bool exclude_train_edges = false;
};

/// Number of zero cells eligible as negatives.
std::uint64_t eligible_negatives(const EvalSplit& split, const NegativeSampling& sampling);

/// `count` distinct eligible zero cells drawn uniformly without replacement.
/// Eligible cells: zeros of the test matrix; for kNew additionally zeros of
/// the training matrix; for cold-start categories restricted to the rows
/// (columns) of new users (hosts). Throws Error if count exceeds the supply.
std::vector<Edge> subsample_negatives(const EvalSplit& split, const NegativeSampling& sampling,
                                      std::size_t count, std::uint64_t seed);

/// Every eligible negative cell.
std::vector<Edge> all_negatives(const EvalSplit& split, const NegativeSampling& sampling);

}  // namespace linkpmf
