#include "linkpmf/joint.hpp"

#include <cmath>

namespace linkpmf {

namespace {

void check_users(const EpmfProblem& a, const EpmfProblem& b) {
  if (a.graph().n_users() != b.graph().n_users()) {
    throw DimensionError("joint fit: graphs have " + std::to_string(a.graph().n_users()) + " and " +
                         std::to_string(b.graph().n_users()) + " users");
  }
  if (a.graph().user_labels().size() && b.graph().user_labels().size() &&
      !(a.graph().user_labels() == b.graph().user_labels())) {
    throw DimensionError("joint fit: the graphs label their users differently");
  }
  if (&a.users() != &b.users() && !(a.users() == b.users())) {
    throw DimensionError("joint fit: the graphs must share one user covariate matrix");
  }
}

void update_host_side(HostSide& hosts, const EpmfProblem& problem, const EdgeProxies& edges,
                      const Eigen::VectorXd& alpha_sums, const Hyperparameters& hyper, int R,
                      SweepCounters& counters) {
  const RowMatrix ev = host_evidence(problem, edges, R, &counters.host_evidence);
  for (Eigen::Index j = 0; j < hosts.beta.shape.rows(); ++j) {
    const double prior_rate = hosts.nu[j] / hosts.xi[j];
    for (int r = 0; r < R; ++r) {
      hosts.beta.shape(j, r) = hyper.beta.a + ev(j, r);
      hosts.beta.rate(j, r) = prior_rate + alpha_sums[r];
    }
  }
}

void update_phi(HostSide& hosts, const EpmfProblem& problem, const EdgeProxies& edges,
                const Hyperparameters& hyper, SweepCounters& counters) {
  const RowMatrix ev = phi_evidence(problem, edges, &counters.phi_evidence);
  const RowMatrix exposure = covariate_exposure(problem);
  const double prior_rate = hosts.nu_phi / hosts.xi_phi;
  hosts.phi.shape = (ev.array() + hyper.phi.a).matrix();
  hosts.phi.rate = (exposure.array() + prior_rate).matrix();
}

void update_xi(HostSide& hosts, const Hyperparameters& hyper) {
  hosts.xi = second_level_rate(hosts.beta, hyper.beta.c);
  double total = hyper.phi.c;
  for (Eigen::Index k = 0; k < hosts.phi.shape.size(); ++k) {
    total += hosts.phi.shape.data()[k] / hosts.phi.rate.data()[k];
  }
  hosts.xi_phi = total;
}

}  // namespace

JointState init_joint_state(const EpmfProblem& graph_a, const EpmfProblem& graph_b,
                            const Hyperparameters& hyper, std::uint64_t seed) {
  hyper.validate();
  check_users(graph_a, graph_b);
  JointState state;
  const int R = hyper.latent_dim;
  state.users = init_user_side(graph_a.graph().n_users(), R, hyper.alpha, seed, "cavi.init.users");
  state.hosts_a = init_host_side(graph_a.graph().n_hosts(), graph_a.n_user_covariates(),
                                 graph_a.n_host_covariates(), R, hyper.beta, hyper.phi, seed,
                                 "cavi.init.hosts");
  state.hosts_b = init_host_side(graph_b.graph().n_hosts(), graph_b.n_user_covariates(),
                                 graph_b.n_host_covariates(), R, hyper.beta, hyper.phi, seed,
                                 "joint.init.hosts_b");
  return state;
}

SweepCounters joint_sweep(JointState& state, const EpmfProblem& graph_a,
                          const EpmfProblem& graph_b, const Hyperparameters& hyper) {
  SweepCounters counters;
  const int R = state.latent_dim();
  const RowMatrix log_alpha = state.users.alpha.log_mean();
  counters.theta_chi += update_edge_proxies(graph_a, log_alpha, state.hosts_a.beta.log_mean(),
                                            state.hosts_a.phi.log_mean(), state.edges_a);
  counters.theta_chi += update_edge_proxies(graph_b, log_alpha, state.hosts_b.beta.log_mean(),
                                            state.hosts_b.phi.log_mean(), state.edges_b);

  // Pooled user update.
  const RowMatrix ev_a = user_evidence(graph_a, state.edges_a, R, &counters.user_evidence);
  const RowMatrix ev_b = user_evidence(graph_b, state.edges_b, R, &counters.user_evidence);
  const Eigen::VectorXd sums_a = column_mean_sums(state.hosts_a.beta);
  const Eigen::VectorXd sums_b = column_mean_sums(state.hosts_b.beta);
  auto& users = state.users;
  for (Eigen::Index i = 0; i < users.alpha.shape.rows(); ++i) {
    const double prior_rate = users.nu[i] / users.xi[i];
    for (int r = 0; r < R; ++r) {
      users.alpha.shape(i, r) = hyper.alpha.a + (ev_a(i, r) + ev_b(i, r));
      users.alpha.rate(i, r) = prior_rate + (sums_a[r] + sums_b[r]);
    }
  }

  const Eigen::VectorXd alpha_sums = column_mean_sums(users.alpha);
  update_host_side(state.hosts_a, graph_a, state.edges_a, alpha_sums, hyper, R, counters);
  update_host_side(state.hosts_b, graph_b, state.edges_b, alpha_sums, hyper, R, counters);
  update_phi(state.hosts_a, graph_a, state.edges_a, hyper, counters);
  update_phi(state.hosts_b, graph_b, state.edges_b, hyper, counters);

  users.xi = second_level_rate(users.alpha, hyper.alpha.c);
  update_xi(state.hosts_a, hyper);
  update_xi(state.hosts_b, hyper);
  return counters;
}

double joint_elbo(const JointState& state, const EpmfProblem& graph_a, const EpmfProblem& graph_b,
                  const Hyperparameters& hyper) {
  const double users = user_side_elbo(state.users, hyper.alpha);
  const double hosts_a = host_side_elbo(state.hosts_a, hyper.beta, hyper.phi);
  const double lik_a = likelihood_elbo(graph_a, state.edges_a, state.users, state.hosts_a);
  const double hosts_b = host_side_elbo(state.hosts_b, hyper.beta, hyper.phi);
  const double lik_b = likelihood_elbo(graph_b, state.edges_b, state.users, state.hosts_b);
  for (const double term : {users, hosts_a, lik_a, hosts_b, lik_b}) {
    if (!std::isfinite(term)) throw Error("joint ELBO term is not finite");
  }
  return users + hosts_a + lik_a + hosts_b + lik_b;
}

JointFitResult fit_joint(const EpmfProblem& graph_a, const EpmfProblem& graph_b,
                         const Hyperparameters& hyper, const FitOptions& options) {
  if (!(options.tol > 0)) throw Error("tol must be positive");
  if (options.threads > 0) set_num_threads(options.threads);
  JointFitResult result;
  result.state = init_joint_state(graph_a, graph_b, hyper, options.seed);
  auto& trace = result.trace;
  while (trace.iterations < options.max_iter) {
    joint_sweep(result.state, graph_a, graph_b, hyper);
    ++trace.iterations;
    trace.values.push_back(joint_elbo(result.state, graph_a, graph_b, hyper));
    if (elbo_converged(trace.values, options.tol)) {
      trace.converged = true;
      break;
    }
  }
  return result;
}

JointParams joint_point_estimates(const JointState& state) {
  const RowMatrix alpha = state.users.alpha.mean();
  return {{alpha, state.hosts_a.beta.mean(), state.hosts_a.phi.mean()},
          {alpha, state.hosts_b.beta.mean(), state.hosts_b.phi.mean()}};
}

}  // namespace linkpmf
