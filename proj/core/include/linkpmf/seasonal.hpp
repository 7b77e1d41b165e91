#pragma once

#include <cstdint>
#include <vector>

#include "linkpmf/cavi.hpp"
#include "linkpmf/graph.hpp"
#include "linkpmf/model.hpp"
#include "linkpmf/variational.hpp"

namespace linkpmf {

/// Multiplicative seasonal adjustments for one side: one gamma block per
/// segment (n_nodes x R) and one hyper-factor zeta_p per segment. Segment 1
/// (index 0) is the reference: its proxy is a point mass at 1 and it is never
/// updated.
struct SeasonalBlock {
  std::vector<GammaBlock> segments;
  std::vector<double> nu;
  std::vector<double> xi;

  int period() const noexcept { return static_cast<int>(segments.size()); }
  /// E[x] per segment, exactly 1 for the reference segment.
  RowMatrix mean(int segment_index) const;
  /// E[log x] per segment, exactly 0 for the reference segment.
  RowMatrix log_mean(int segment_index) const;
};

struct SeasonalState {
  UserSide users;
  HostSide hosts;
  SeasonalBlock gamma;  // users
  SeasonalBlock delta;  // hosts
  std::vector<EdgeProxies> edges;  // one per snapshot
  PeriodMap period_map = PeriodMap::modular(1);

  int latent_dim() const noexcept { return static_cast<int>(users.alpha.shape.cols()); }
};

struct SeasonalFitResult {
  SeasonalState state;
  ElboTrace trace;
};

/// Point estimates including the adjustments; gamma[p] is n_users x R.
struct SeasonalParams {
  PointParams base;
  std::vector<RowMatrix> gamma;
  std::vector<RowMatrix> delta;
  PeriodMap period_map = PeriodMap::modular(1);
};

/// psi_ijt = sum_r alpha_ir gamma_it'r beta_jr delta_jt'r + sum_kh phi_kh x_ik y_jh.
double seasonal_rate(const SeasonalParams& params, NodeId user, NodeId host, long t,
                     std::span<const NodeId> user_covariates,
                     std::span<const NodeId> host_covariates);

/// Problems for each snapshot, sharing one pair of covariate matrices.
std::vector<EpmfProblem> make_snapshot_problems(const TemporalGraphSequence& sequence,
                                                const CovariateMatrix& users,
                                                const CovariateMatrix& hosts);

/// The alpha, beta, phi blocks draw from the same streams as init_state, so a
/// one-segment, one-snapshot run starts where the single-graph fit starts.
SeasonalState init_seasonal_state(const TemporalGraphSequence& sequence,
                                  const std::vector<EpmfProblem>& problems,
                                  const Hyperparameters& hyper, std::uint64_t seed);

/// One sweep: theta/chi on all snapshots, alpha, gamma, beta, delta, phi, then
/// every xi. Edge visits equal sum_t nnz(A_t) per phase.
SweepCounters seasonal_sweep(SeasonalState& state, const std::vector<EpmfProblem>& problems,
                             const Hyperparameters& hyper);

double seasonal_elbo(const SeasonalState& state, const std::vector<EpmfProblem>& problems,
                     const Hyperparameters& hyper);

SeasonalFitResult fit_seasonal(const TemporalGraphSequence& sequence, const CovariateMatrix& users,
                               const CovariateMatrix& hosts, const Hyperparameters& hyper,
                               const FitOptions& options);

SeasonalParams seasonal_point_estimates(const SeasonalState& state);

/// Plug-in 1 - exp(-psi_ijt). Throws Error for t < 1 or beyond the map horizon.
double seasonal_score(const SeasonalParams& params, NodeId user, NodeId host, long t,
                      const CovariateMatrix& user_covariates, const CovariateMatrix& host_covariates);

}  // namespace linkpmf
