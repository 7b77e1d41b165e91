#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "linkpmf/cavi.hpp"
#include "linkpmf/covariates.hpp"
#include "linkpmf/gibbs.hpp"
#include "linkpmf/graph.hpp"
#include "linkpmf/joint.hpp"
#include "linkpmf/model.hpp"
#include "linkpmf/seasonal.hpp"
#include "linkpmf/svd.hpp"

namespace linkpmf {

/// Anything that ranks (user, host) cells; higher means a link is more likely.
class LinkScorer {
 public:
  virtual ~LinkScorer() = default;
  virtual double score(NodeId user, NodeId host) const = 0;
  virtual std::string name() const = 0;
};

/// 1 - exp(-psi_hat) with proxy means plugged in.
double score_plugin(const PointParams& params, NodeId user, NodeId host,
                    const CovariateMatrix& user_covariates, const CovariateMatrix& host_covariates);

/// Averages 1 - exp(-psi) over M draws from the gamma proxies of alpha_i,
/// beta_j and the active phi_kh. Draws for cell (i, j) use their own stream.
double score_montecarlo(const VariationalState& state, NodeId user, NodeId host,
                        const CovariateMatrix& user_covariates,
                        const CovariateMatrix& host_covariates, int draws, std::uint64_t seed);

class PlugInScorer final : public LinkScorer {
 public:
  PlugInScorer(PointParams params, const CovariateMatrix& users, const CovariateMatrix& hosts,
               std::string name = "epmf");
  double score(NodeId user, NodeId host) const override;
  std::string name() const override { return name_; }
  const PointParams& params() const noexcept { return params_; }

 private:
  PointParams params_;
  const CovariateMatrix* users_;
  const CovariateMatrix* hosts_;
  std::string name_;
};

class MonteCarloScorer final : public LinkScorer {
 public:
  MonteCarloScorer(VariationalState state, const CovariateMatrix& users,
                   const CovariateMatrix& hosts, int draws, std::uint64_t seed);
  double score(NodeId user, NodeId host) const override;
  std::string name() const override { return "epmf-mc"; }

 private:
  VariationalState state_;
  const CovariateMatrix* users_;
  const CovariateMatrix* hosts_;
  int draws_;
  std::uint64_t seed_;
};

/// Plug-in scorer in which nodes flagged as new take the mean latent feature
/// of the non-new nodes on their side; covariates still act through phi.
class ColdStartScorer final : public LinkScorer {
 public:
  ColdStartScorer(const PointParams& params, const CovariateMatrix& users,
                  const CovariateMatrix& hosts, std::vector<bool> new_users,
                  std::vector<bool> new_hosts, std::string name = "epmf");
  double score(NodeId user, NodeId host) const override;
  std::string name() const override { return name_; }
  const Eigen::VectorXd& mean_user() const noexcept { return mean_user_; }
  const Eigen::VectorXd& mean_host() const noexcept { return mean_host_; }

 private:
  PointParams params_;
  const CovariateMatrix* users_;
  const CovariateMatrix* hosts_;
  std::vector<bool> new_users_;
  std::vector<bool> new_hosts_;
  Eigen::VectorXd mean_user_;
  Eigen::VectorXd mean_host_;
  std::string name_;
};

/// Score of a node unseen in training against an existing counterpart: the
/// new node takes `mean_feature` and activates `new_node_covariates`.
double cold_start_score(const PointParams& params, Side new_node_side,
                        std::span<const NodeId> new_node_covariates, NodeId counterpart,
                        const CovariateMatrix& counterpart_covariates,
                        const Eigen::VectorXd& mean_feature);

/// Mean latent feature over the nodes of `side` not flagged in `exclude`.
Eigen::VectorXd mean_latent_feature(const PointParams& params, Side side,
                                    const std::vector<bool>& exclude);

/// Monte Carlo posterior estimate from Gibbs draws.
class GibbsScorer final : public LinkScorer {
 public:
  GibbsScorer(PosteriorSamples samples, const CovariateMatrix& users, const CovariateMatrix& hosts);
  double score(NodeId user, NodeId host) const override;
  std::string name() const override { return "gibbs"; }

 private:
  PosteriorSamples samples_;
  const CovariateMatrix* users_;
  const CovariateMatrix* hosts_;
};

/// Probability of at least one link over days [first_day, last_day]:
/// 1 - exp(-sum_t psi_ijt).
class SeasonalWindowScorer final : public LinkScorer {
 public:
  SeasonalWindowScorer(SeasonalParams params, const CovariateMatrix& users,
                       const CovariateMatrix& hosts, long first_day, long last_day);
  double score(NodeId user, NodeId host) const override;
  std::string name() const override { return "sepmf"; }

 private:
  SeasonalParams params_;
  const CovariateMatrix* users_;
  const CovariateMatrix* hosts_;
  std::vector<double> segment_days_;  // days per segment in the window
};

/// 1 - exp(-d_out(i) d_in(j)) with training degrees.
class DegreeScorer final : public LinkScorer {
 public:
  explicit DegreeScorer(const SparseBipartiteGraph& train);
  double score(NodeId user, NodeId host) const override;
  std::string name() const override { return "degree"; }

 private:
  std::vector<double> out_degree_;
  std::vector<double> in_degree_;
};

/// sum_r w(d_r) u_ir v_jr over a rank-R truncated SVD; w(d) = d for tSVD and
/// w(d) = 1/(1 - eta d) - 1 for tKatz.
class SpectralScorer final : public LinkScorer {
 public:
  double score(NodeId user, NodeId host) const override;
  std::string name() const override { return name_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  const TruncatedSvd& svd() const noexcept { return svd_; }

  static SpectralScorer tsvd(const SparseBipartiteGraph& train, int rank, const SvdOptions& options = {});
  /// Throws Error when eta * d_1 >= 1.
  static SpectralScorer tkatz(const SparseBipartiteGraph& train, int rank, double eta = 1e-4,
                              const SvdOptions& options = {});

 private:
  SpectralScorer(TruncatedSvd svd, Eigen::VectorXd weights, std::string name);
  TruncatedSvd svd_;
  Eigen::VectorXd weights_;
  std::string name_;
};

/// f(d) = 1/(1 - eta d) - 1. Throws Error when eta * d >= 1.
double katz_transform(double singular_value, double eta);

}  // namespace linkpmf
