#include <numeric>
#include <random>

#include <Eigen/SVD>
#include <gtest/gtest.h>

#include "linkpmf/scorers.hpp"
#include "linkpmf/svd.hpp"
#include "support/fixtures.hpp"

namespace {

using namespace linkpmf;

Eigen::MatrixXd dense(const SparseBipartiteGraph& g) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.n_users()),
                                            static_cast<Eigen::Index>(g.n_hosts()));
  for (const auto& e : g.edges()) a(e.user, e.host) = 1;
  return a;
}

SvdOptions method(SvdMethod m, std::uint64_t seed = 0) {
  SvdOptions o;
  o.method = m;
  o.seed = seed;
  return o;
}

TEST(Svd, MatchesDenseOracle) {
  for (auto m : {SvdMethod::kRandomized, SvdMethod::kLanczos}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto g = fixtures::random_graph(10, 8, 0.4, seed);
      const Eigen::JacobiSVD<Eigen::MatrixXd> oracle(dense(g));
      const auto svd = truncated_svd(g, 5, method(m, seed));
      for (int r = 0; r < 5; ++r) EXPECT_NEAR(svd.values(r), oracle.singularValues()(r), 1e-8);
      EXPECT_LT(svd.residual, 1e-8);
      EXPECT_TRUE((svd.left.transpose() * svd.left).isApprox(Eigen::MatrixXd::Identity(5, 5), 1e-8));
    }
  }
}

TEST(Svd, RankOneReconstruction) {
  std::vector<Edge> edges;
  for (NodeId i : {1u, 4u, 5u, 8u})
    for (NodeId j : {0u, 2u, 3u}) edges.push_back({i, j});
  const SparseBipartiteGraph g(10, 6, edges);
  for (auto m : {SvdMethod::kRandomized, SvdMethod::kLanczos}) {
    const auto svd = truncated_svd(g, 1, method(m));
    const Eigen::MatrixXd approx = svd.left * svd.values.asDiagonal() * svd.right.transpose();
    EXPECT_LT((approx - dense(g)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_NEAR(svd.values(0), std::sqrt(12.0), 1e-10);
  }
}

TEST(Svd, ScoresPermutationEquivariant) {
  const auto g = fixtures::random_graph(25, 18, 0.2, 4);
  std::vector<NodeId> pu(25), ph(18);
  std::iota(pu.begin(), pu.end(), 0);
  std::iota(ph.begin(), ph.end(), 0);
  std::mt19937_64 rng(2);
  std::shuffle(pu.begin(), pu.end(), rng);
  std::shuffle(ph.begin(), ph.end(), rng);
  std::vector<Edge> moved;
  for (const auto& e : g.edges()) moved.push_back(Edge{pu[e.user], ph[e.host]});
  const SparseBipartiteGraph h(25, 18, moved);
  for (auto m : {SvdMethod::kRandomized, SvdMethod::kLanczos}) {
    // The randomized sketch is only exact once it spans the whole row space.
    auto options = method(m);
    options.oversampling = 14;
    const auto a = SpectralScorer::tsvd(g, 4, options);
    const auto b = SpectralScorer::tsvd(h, 4, options);
    for (NodeId i = 0; i < 25; ++i)
      for (NodeId j = 0; j < 18; ++j) EXPECT_NEAR(a.score(i, j), b.score(pu[i], ph[j]), 1e-8);
  }
}

TEST(Svd, TsvdScoreFormula) {
  const auto g = fixtures::random_graph(12, 9, 0.3, 6);
  const auto scorer = SpectralScorer::tsvd(g, 3);
  const auto& s = scorer.svd();
  EXPECT_EQ(scorer.weights(), s.values);
  double expected = 0;
  for (int r = 0; r < 3; ++r) expected += s.values(r) * s.left(2, r) * s.right(5, r);
  EXPECT_NEAR(scorer.score(2, 5), expected, 1e-14);
}

TEST(Scree, DecreasingWithPlantedRank) {
  std::vector<Edge> edges;
  // Three disjoint all-ones blocks of different sizes.
  const int bounds[4] = {0, 8, 13, 16};
  for (int b = 0; b < 3; ++b)
    for (int i = bounds[b]; i < bounds[b + 1]; ++i)
      for (int j = bounds[b]; j < bounds[b + 1]; ++j)
        edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j)});
  const SparseBipartiteGraph g(20, 16, edges);
  const auto values = scree(g, 6);
  for (int k = 1; k < 6; ++k) EXPECT_LE(values(k), values(k - 1));
  EXPECT_GT(values(2), 1.0);
  EXPECT_LT(values(3), 1e-8);
  const Eigen::JacobiSVD<Eigen::MatrixXd> oracle(dense(g));
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(values(k), oracle.singularValues()(k), 1e-8);
}

TEST(Svd, Errors) {
  const auto g = fixtures::random_graph(6, 4, 0.5, 1);
  EXPECT_THROW(truncated_svd(g, 5), Error);
  EXPECT_THROW(truncated_svd(g, 0), Error);
  auto o = method(SvdMethod::kLanczos);
  o.max_steps = 1;
  const auto big = fixtures::random_graph(30, 30, 0.3, 2);
  try {
    truncated_svd(big, 1, o);
    FAIL() << "expected SvdNotConverged";
  } catch (const SvdNotConverged& e) {
    EXPECT_GT(e.residual(), o.tolerance);
  }
}

TEST(Svd, EmptyGraphHasZeroSpectrum) {
  const SparseBipartiteGraph g(7, 5, {});
  for (auto m : {SvdMethod::kRandomized, SvdMethod::kLanczos}) {
    const auto svd = truncated_svd(g, 3, method(m));
    EXPECT_EQ(svd.values.size(), 3);
    EXPECT_LT(svd.values.maxCoeff(), 1e-12);
  }
}

}  // namespace
