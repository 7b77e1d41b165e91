#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "linkpmf/covariates.hpp"
#include "linkpmf/graph.hpp"
#include "linkpmf/model.hpp"

namespace linkpmf::fixtures {

inline SparseBipartiteGraph random_graph(std::size_t n_users, std::size_t n_hosts, double density,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(density);
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n_users; ++i)
    for (NodeId j = 0; j < n_hosts; ++j)
      if (coin(rng)) edges.push_back({i, j});
  return SparseBipartiteGraph(n_users, n_hosts, std::move(edges));
}

inline CovariateMatrix random_covariates(std::size_t n_nodes, std::vector<int> levels,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CovariateGroup> groups;
  std::size_t column = 0;
  for (std::size_t g = 0; g < levels.size(); ++g) {
    CovariateGroup group{"g" + std::to_string(g), {}, column};
    for (int l = 0; l < levels[g]; ++l) group.levels.push_back("l" + std::to_string(l));
    column += static_cast<std::size_t>(levels[g]);
    groups.push_back(group);
  }
  std::vector<std::vector<int>> assigned(n_nodes, std::vector<int>(levels.size()));
  for (auto& row : assigned)
    for (std::size_t g = 0; g < levels.size(); ++g)
      row[g] = std::uniform_int_distribution<int>(-1, levels[g] - 1)(rng);
  return CovariateMatrix::from_levels(groups, assigned);
}

inline PointParams random_params(std::size_t n_users, std::size_t n_hosts, std::size_t k,
                                 std::size_t h, int r, std::uint64_t seed, double scale = 0.5) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> g(1.0, scale);
  PointParams p;
  p.alpha.resize(static_cast<Eigen::Index>(n_users), r);
  p.beta.resize(static_cast<Eigen::Index>(n_hosts), r);
  p.phi.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(h));
  for (Eigen::Index i = 0; i < p.alpha.size(); ++i) p.alpha.data()[i] = g(rng);
  for (Eigen::Index i = 0; i < p.beta.size(); ++i) p.beta.data()[i] = g(rng);
  for (Eigen::Index i = 0; i < p.phi.size(); ++i) p.phi.data()[i] = g(rng);
  return p;
}

}  // namespace linkpmf::fixtures
