#include "linkpmf/cavi.hpp"

#include <cmath>

namespace linkpmf {

VariationalState init_state(const EpmfProblem& problem, const Hyperparameters& hyper,
                            std::uint64_t seed) {
  hyper.validate();
  VariationalState state;
  state.users = init_user_side(problem.graph().n_users(), hyper.latent_dim, hyper.alpha, seed,
                               "cavi.init.users");
  state.hosts = init_host_side(problem.graph().n_hosts(), problem.n_user_covariates(),
                               problem.n_host_covariates(), hyper.latent_dim, hyper.beta, hyper.phi,
                               seed, "cavi.init.hosts");
  return state;
}

std::size_t update_theta_chi(VariationalState& state, const EpmfProblem& problem) {
  return update_edge_proxies(problem, state.users.alpha.log_mean(), state.hosts.beta.log_mean(),
                             state.hosts.phi.log_mean(), state.edges);
}

SweepCounters update_first_level(VariationalState& state, const EpmfProblem& problem,
                                 const Hyperparameters& hyper) {
  SweepCounters counters;
  const int R = state.latent_dim();
  auto& users = state.users;
  auto& hosts = state.hosts;

  const RowMatrix ev_users = user_evidence(problem, state.edges, R, &counters.user_evidence);
  const Eigen::VectorXd beta_sums = column_mean_sums(hosts.beta);
  for (Eigen::Index i = 0; i < users.alpha.shape.rows(); ++i) {
    const double prior_rate = users.nu[i] / users.xi[i];
    for (int r = 0; r < R; ++r) {
      users.alpha.shape(i, r) = hyper.alpha.a + ev_users(i, r);
      users.alpha.rate(i, r) = prior_rate + beta_sums[r];
    }
  }

  const RowMatrix ev_hosts = host_evidence(problem, state.edges, R, &counters.host_evidence);
  const Eigen::VectorXd alpha_sums = column_mean_sums(users.alpha);
  for (Eigen::Index j = 0; j < hosts.beta.shape.rows(); ++j) {
    const double prior_rate = hosts.nu[j] / hosts.xi[j];
    for (int r = 0; r < R; ++r) {
      hosts.beta.shape(j, r) = hyper.beta.a + ev_hosts(j, r);
      hosts.beta.rate(j, r) = prior_rate + alpha_sums[r];
    }
  }

  const RowMatrix ev_phi = phi_evidence(problem, state.edges, &counters.phi_evidence);
  const RowMatrix exposure = covariate_exposure(problem);
  const double phi_prior_rate = hosts.nu_phi / hosts.xi_phi;
  hosts.phi.shape = (ev_phi.array() + hyper.phi.a).matrix();
  hosts.phi.rate = (exposure.array() + phi_prior_rate).matrix();
  return counters;
}

void update_second_level(VariationalState& state, const Hyperparameters& hyper) {
  state.users.xi = second_level_rate(state.users.alpha, hyper.alpha.c);
  state.hosts.xi = second_level_rate(state.hosts.beta, hyper.beta.c);
  double phi_total = hyper.phi.c;
  for (Eigen::Index k = 0; k < state.hosts.phi.shape.size(); ++k) {
    phi_total += state.hosts.phi.shape.data()[k] / state.hosts.phi.rate.data()[k];
  }
  state.hosts.xi_phi = phi_total;
}

SweepCounters sweep(VariationalState& state, const EpmfProblem& problem,
                    const Hyperparameters& hyper) {
  const std::size_t visits = update_theta_chi(state, problem);
  SweepCounters counters = update_first_level(state, problem, hyper);
  counters.theta_chi = visits;
  update_second_level(state, hyper);
  return counters;
}

double compute_elbo(const VariationalState& state, const EpmfProblem& problem,
                    const Hyperparameters& hyper) {
  const double users = user_side_elbo(state.users, hyper.alpha);
  const double hosts = host_side_elbo(state.hosts, hyper.beta, hyper.phi);
  const double likelihood = likelihood_elbo(problem, state.edges, state.users, state.hosts);
  if (!std::isfinite(users)) throw Error("ELBO term for the user factors is not finite");
  if (!std::isfinite(hosts)) throw Error("ELBO term for the host factors is not finite");
  if (!std::isfinite(likelihood)) throw Error("ELBO likelihood term is not finite");
  return users + hosts + likelihood;
}

FitResult fit(const EpmfProblem& problem, const Hyperparameters& hyper, const FitOptions& options) {
  if (!(options.tol > 0)) throw Error("tol must be positive");
  if (options.threads > 0) set_num_threads(options.threads);
  FitResult result;
  result.state = init_state(problem, hyper, options.seed);
  auto& trace = result.trace;
  while (trace.iterations < options.max_iter) {
    sweep(result.state, problem, hyper);
    ++trace.iterations;
    trace.values.push_back(compute_elbo(result.state, problem, hyper));
    if (elbo_converged(trace.values, options.tol)) {
      trace.converged = true;
      break;
    }
  }
  return result;
}

PointParams point_estimates(const VariationalState& state) {
  return {state.users.alpha.mean(), state.hosts.beta.mean(), state.hosts.phi.mean()};
}

}  // namespace linkpmf
