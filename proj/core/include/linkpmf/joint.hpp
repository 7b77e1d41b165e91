#pragma once

#include <cstdint>

#include "linkpmf/cavi.hpp"
#include "linkpmf/variational.hpp"

namespace linkpmf {

/// Two bipartite graphs sharing the user set and user factors alpha.
struct JointState {
  UserSide users;
  HostSide hosts_a;
  HostSide hosts_b;
  EdgeProxies edges_a;
  EdgeProxies edges_b;

  int latent_dim() const noexcept { return static_cast<int>(users.alpha.shape.cols()); }
};

struct JointFitResult {
  JointState state;
  ElboTrace trace;
};

/// Graph-a blocks draw from the same streams as init_state, graph-b blocks
/// from their own; with an empty second graph the run matches `fit`.
JointState init_joint_state(const EpmfProblem& graph_a, const EpmfProblem& graph_b,
                            const Hyperparameters& hyper, std::uint64_t seed);

/// theta/chi for graph a then graph b, pooled alpha update, then each graph's
/// beta and phi, then every xi.
SweepCounters joint_sweep(JointState& state, const EpmfProblem& graph_a,
                          const EpmfProblem& graph_b, const Hyperparameters& hyper);

double joint_elbo(const JointState& state, const EpmfProblem& graph_a, const EpmfProblem& graph_b,
                  const Hyperparameters& hyper);

/// Throws DimensionError when the graphs (or the user covariates) disagree on
/// the user set.
JointFitResult fit_joint(const EpmfProblem& graph_a, const EpmfProblem& graph_b,
                         const Hyperparameters& hyper, const FitOptions& options);

struct JointParams {
  PointParams graph_a;  // shares alpha with graph_b
  PointParams graph_b;
};

JointParams joint_point_estimates(const JointState& state);

}  // namespace linkpmf
