#pragma once

#include <cstdint>
#include <vector>

#include "linkpmf/model.hpp"
#include "linkpmf/variational.hpp"

namespace linkpmf {

/// Mean-field state for the single-graph model.
struct VariationalState {
  UserSide users;
  HostSide hosts;
  EdgeProxies edges;

  int latent_dim() const noexcept { return static_cast<int>(users.alpha.shape.cols()); }
};

struct ElboTrace {
  std::vector<double> values;  // one entry per full sweep
  bool converged = false;
  int iterations = 0;
};

struct FitOptions {
  double tol = 1e-5;  // relative ELBO change
  int max_iter = 1000;
  std::uint64_t seed = 0;
  int threads = 0;  // <= 0: default
};

struct FitResult {
  VariationalState state;
  ElboTrace trace;
};

/// Prior initialisation; nu is set in closed form
/// (nu_i = b + R a for users/hosts, nu_phi = b + K H a).
VariationalState init_state(const EpmfProblem& problem, const Hyperparameters& hyper,
                            std::uint64_t seed);

/// theta and chi for every observed edge. Returns edges visited.
std::size_t update_theta_chi(VariationalState& state, const EpmfProblem& problem);

/// alpha block, then beta block (using the new alpha), then phi.
SweepCounters update_first_level(VariationalState& state, const EpmfProblem& problem,
                                 const Hyperparameters& hyper);

/// xi for users, hosts and phi.
void update_second_level(VariationalState& state, const Hyperparameters& hyper);

/// One full sweep in the fixed order theta, chi, alpha, beta, phi, xi.
SweepCounters sweep(VariationalState& state, const EpmfProblem& problem,
                    const Hyperparameters& hyper);

/// E_q[log p(...)] - E_q[log q(...)]. Throws Error naming a non-finite term.
double compute_elbo(const VariationalState& state, const EpmfProblem& problem,
                    const Hyperparameters& hyper);

/// Sweeps until |dELBO| / |ELBO| < tol or max_iter. A run that hits max_iter
/// returns normally with trace.converged == false.
FitResult fit(const EpmfProblem& problem, const Hyperparameters& hyper, const FitOptions& options);

/// Proxy means lambda / mu.
PointParams point_estimates(const VariationalState& state);

}  // namespace linkpmf
