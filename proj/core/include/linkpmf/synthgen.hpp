#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "linkpmf/covariates.hpp"
#include "linkpmf/graph.hpp"
#include "linkpmf/model.hpp"
#include "linkpmf/seasonal.hpp"

namespace linkpmf {

/// Number of levels of every categorical group on each side.
struct CovariateDesign {
  std::vector<int> user_levels;
  std::vector<int> host_levels;
};

struct GroundTruth {
  PointParams params;
  Eigen::VectorXd zeta_alpha;
  Eigen::VectorXd zeta_beta;
  double zeta_phi = 0.0;
  CovariateMatrix users;
  CovariateMatrix hosts;
  Hyperparameters hyper;
  std::uint64_t seed = 0;
};

/// Uniform level assignment per group ("g<k>=l<level>" column names).
CovariateMatrix sample_covariates(std::size_t n_nodes, const std::vector<int>& levels,
                                  std::uint64_t seed, std::string_view label);

/// zeta from Gamma(b, c), then alpha, beta, phi from their conditional gammas;
/// covariates assigned uniformly within each group.
GroundTruth sample_params(std::size_t n_users, std::size_t n_hosts, const CovariateDesign& design,
                          int latent_dim, const Hyperparameters& hyper, std::uint64_t seed);

/// Each A_ij ~ Bernoulli(1 - exp(-psi_ij)), independently. Cell (i, j) reads
/// its own counter stream keyed on (i, j), so graphs of different sizes from
/// one seed agree on their common cells. Nodes are labelled "U<i>" / "H<j>".
SparseBipartiteGraph sample_graph(const PointParams& params, const CovariateMatrix& users,
                                  const CovariateMatrix& hosts, std::uint64_t seed);

/// Snapshots t = 1..T with rates modulated by the adjustments of segment
/// period_map(t). `seasonal.base` is ignored in favour of `params`.
TemporalGraphSequence sample_seasonal_sequence(const PointParams& params,
                                               const SeasonalParams& seasonal,
                                               const CovariateMatrix& users,
                                               const CovariateMatrix& hosts,
                                               const PeriodMap& period_map, std::size_t n_snapshots,
                                               std::uint64_t seed);

/// Writes graph.txt (plus test.txt when `test` is given), users.csv,
/// hosts.csv and truth.json into `directory`.
void write_bundle(const std::string& directory, const GroundTruth& truth,
                  const SparseBipartiteGraph& graph, const SparseBipartiteGraph* test = nullptr);

}  // namespace linkpmf
