#include "linkpmf/seasonal.hpp"

#include <cmath>
#include <random>
#include <string>

#include "linkpmf/random.hpp"

namespace linkpmf {

namespace {

// Column sums of E[x] * E[adj] over rows, pairwise-summed per column.
Eigen::VectorXd weighted_column_sums(const RowMatrix& mean, const RowMatrix& adjustment) {
  const Eigen::Index rows = mean.rows();
  Eigen::VectorXd out(mean.cols());
  std::vector<double> column(static_cast<std::size_t>(rows));
  for (Eigen::Index r = 0; r < mean.cols(); ++r) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      column[static_cast<std::size_t>(i)] = mean(i, r) * adjustment(i, r);
    }
    out[r] = pairwise_sum(column);
  }
  return out;
}

SeasonalBlock init_seasonal_block(Eigen::Index rows, int R, int period, const GammaHierarchy& prior,
                                  std::uint64_t seed, const std::string& label) {
  SeasonalBlock block;
  block.segments.reserve(static_cast<std::size_t>(period));
  block.nu.assign(static_cast<std::size_t>(period), prior.b);
  block.xi.assign(static_cast<std::size_t>(period), prior.c);
  GammaBlock reference(rows, R);
  reference.shape.setOnes();
  reference.rate.setOnes();
  block.segments.push_back(std::move(reference));
  CounterRng rng(stream_key(seed, label));
  std::gamma_distribution<double> zeta_dist(prior.b, 1.0 / prior.c);
  for (int p = 1; p < period; ++p) {
    GammaBlock g(rows, R);
    const auto up = static_cast<std::size_t>(p);
    block.nu[up] = prior.b + static_cast<double>(rows) * R * prior.a;
    const double zeta = std::max(zeta_dist(rng), 1e-300);
    block.xi[up] = block.nu[up] / zeta;
    std::gamma_distribution<double> dist(prior.a, 1.0 / zeta);
    for (Eigen::Index k = 0; k < g.shape.size(); ++k) {
      g.shape.data()[k] = prior.a;
      g.rate.data()[k] = prior.a / std::max(dist(rng), 1e-300);
    }
    block.segments.push_back(std::move(g));
  }
  return block;
}

struct SegmentCounts {
  std::vector<double> snapshots;  // n_p
  std::vector<int> of_snapshot;   // 0-based segment of snapshot t
};

SegmentCounts segment_counts(const PeriodMap& map, std::size_t T) {
  SegmentCounts out;
  out.snapshots.assign(static_cast<std::size_t>(map.period()), 0.0);
  for (std::size_t t = 1; t <= T; ++t) {
    const int p = map.segment(static_cast<long>(t)) - 1;
    out.of_snapshot.push_back(p);
    out.snapshots[static_cast<std::size_t>(p)] += 1.0;
  }
  return out;
}

void check_problems(const SeasonalState& state, const std::vector<EpmfProblem>& problems) {
  if (problems.size() != state.edges.size()) {
    throw DimensionError("seasonal state and snapshot problems disagree on T");
  }
}

}  // namespace

RowMatrix SeasonalBlock::mean(int segment_index) const {
  const auto& block = segments.at(static_cast<std::size_t>(segment_index));
  if (segment_index == 0) return RowMatrix::Ones(block.shape.rows(), block.shape.cols());
  return block.mean();
}

RowMatrix SeasonalBlock::log_mean(int segment_index) const {
  const auto& block = segments.at(static_cast<std::size_t>(segment_index));
  if (segment_index == 0) return RowMatrix::Zero(block.shape.rows(), block.shape.cols());
  return block.log_mean();
}

double seasonal_rate(const SeasonalParams& params, NodeId user, NodeId host, long t,
                     std::span<const NodeId> user_covariates,
                     std::span<const NodeId> host_covariates) {
  const auto p = static_cast<std::size_t>(params.period_map.segment(t) - 1);
  if (p >= params.gamma.size() || p >= params.delta.size()) {
    throw DimensionError("seasonal parameters have fewer segments than the period map");
  }
  const auto& base = params.base;
  double psi = 0.0;
  for (Eigen::Index r = 0; r < base.alpha.cols(); ++r) {
    psi += base.alpha(user, r) * params.gamma[p](user, r) * base.beta(host, r) *
           params.delta[p](host, r);
  }
  for (const NodeId k : user_covariates) {
    for (const NodeId h : host_covariates) psi += base.phi(k, h);
  }
  return psi;
}

std::vector<EpmfProblem> make_snapshot_problems(const TemporalGraphSequence& sequence,
                                                const CovariateMatrix& users,
                                                const CovariateMatrix& hosts) {
  sequence.validate();
  std::vector<EpmfProblem> problems;
  problems.reserve(sequence.length());
  for (const auto& g : sequence.snapshots) problems.emplace_back(g, users, hosts);
  return problems;
}

SeasonalState init_seasonal_state(const TemporalGraphSequence& sequence,
                                  const std::vector<EpmfProblem>& problems,
                                  const Hyperparameters& hyper, std::uint64_t seed) {
  hyper.validate();
  if (problems.empty()) throw Error("seasonal fit needs at least one snapshot");
  SeasonalState state;
  const auto& first = problems.front();
  const int R = hyper.latent_dim;
  const int P = sequence.period_map.period();
  state.period_map = sequence.period_map;
  state.users = init_user_side(first.graph().n_users(), R, hyper.alpha, seed, "cavi.init.users");
  state.hosts = init_host_side(first.graph().n_hosts(), first.n_user_covariates(),
                               first.n_host_covariates(), R, hyper.beta, hyper.phi, seed,
                               "cavi.init.hosts");
  state.gamma = init_seasonal_block(static_cast<Eigen::Index>(first.graph().n_users()), R, P,
                                    hyper.gamma, seed, "seasonal.init.gamma");
  state.delta = init_seasonal_block(static_cast<Eigen::Index>(first.graph().n_hosts()), R, P,
                                    hyper.delta, seed, "seasonal.init.delta");
  state.edges.resize(problems.size());
  return state;
}

SweepCounters seasonal_sweep(SeasonalState& state, const std::vector<EpmfProblem>& problems,
                             const Hyperparameters& hyper) {
  check_problems(state, problems);
  SweepCounters counters;
  const int R = state.latent_dim();
  const int P = state.gamma.period();
  const std::size_t T = problems.size();
  const auto seg = segment_counts(state.period_map, T);

  // theta/chi on every snapshot.
  {
    const RowMatrix log_alpha = state.users.alpha.log_mean();
    const RowMatrix log_beta = state.hosts.beta.log_mean();
    const RowMatrix log_phi = state.hosts.phi.log_mean();
    std::vector<RowMatrix> log_user(static_cast<std::size_t>(P));
    std::vector<RowMatrix> log_host(static_cast<std::size_t>(P));
    for (int p = 0; p < P; ++p) {
      log_user[static_cast<std::size_t>(p)] = log_alpha + state.gamma.log_mean(p);
      log_host[static_cast<std::size_t>(p)] = log_beta + state.delta.log_mean(p);
    }
    for (std::size_t t = 0; t < T; ++t) {
      const auto p = static_cast<std::size_t>(seg.of_snapshot[t]);
      counters.theta_chi +=
          update_edge_proxies(problems[t], log_user[p], log_host[p], log_phi, state.edges[t]);
    }
  }

  // Evidence per segment; one pass over the edges of each snapshot per side.
  const auto n_users = static_cast<Eigen::Index>(problems.front().graph().n_users());
  const auto n_hosts = static_cast<Eigen::Index>(problems.front().graph().n_hosts());
  std::vector<RowMatrix> ev_user(static_cast<std::size_t>(P), RowMatrix::Zero(n_users, R));
  std::vector<RowMatrix> ev_host(static_cast<std::size_t>(P), RowMatrix::Zero(n_hosts, R));
  for (std::size_t t = 0; t < T; ++t) {
    const auto p = static_cast<std::size_t>(seg.of_snapshot[t]);
    ev_user[p] += user_evidence(problems[t], state.edges[t], R, &counters.user_evidence);
  }
  RowMatrix ev_user_total = RowMatrix::Zero(n_users, R);
  for (int p = 0; p < P; ++p) ev_user_total += ev_user[static_cast<std::size_t>(p)];

  auto& alpha = state.users.alpha;
  auto& beta = state.hosts.beta;

  // alpha: rate sum_p n_p E[gamma_ipr] B_pr with B_pr = sum_j E beta_jr E delta_jpr.
  {
    const RowMatrix beta_mean = beta.mean();
    std::vector<Eigen::VectorXd> B(static_cast<std::size_t>(P));
    std::vector<RowMatrix> gamma_mean(static_cast<std::size_t>(P));
    for (int p = 0; p < P; ++p) {
      B[static_cast<std::size_t>(p)] = weighted_column_sums(beta_mean, state.delta.mean(p));
      gamma_mean[static_cast<std::size_t>(p)] = state.gamma.mean(p);
    }
    for (Eigen::Index i = 0; i < n_users; ++i) {
      const double prior_rate = state.users.nu[i] / state.users.xi[i];
      for (int r = 0; r < R; ++r) {
        double exposure = 0.0;
        for (std::size_t p = 0; p < static_cast<std::size_t>(P); ++p) {
          exposure += seg.snapshots[p] * gamma_mean[p](i, r) * B[p][r];
        }
        alpha.shape(i, r) = hyper.alpha.a + ev_user_total(i, r);
        alpha.rate(i, r) = prior_rate + exposure;
      }
    }
    // gamma_p, p >= 2: rate E[zeta_p] + E[alpha_ir] n_p B_pr.
    const RowMatrix alpha_mean = alpha.mean();
    for (int p = 1; p < P; ++p) {
      const auto up = static_cast<std::size_t>(p);
      auto& g = state.gamma.segments[up];
      const double prior_rate = state.gamma.nu[up] / state.gamma.xi[up];
      for (Eigen::Index i = 0; i < n_users; ++i) {
        for (int r = 0; r < R; ++r) {
          g.shape(i, r) = hyper.gamma.a + ev_user[up](i, r);
          g.rate(i, r) = prior_rate + alpha_mean(i, r) * seg.snapshots[up] * B[up][r];
        }
      }
    }
  }

  for (std::size_t t = 0; t < T; ++t) {
    const auto p = static_cast<std::size_t>(seg.of_snapshot[t]);
    ev_host[p] += host_evidence(problems[t], state.edges[t], R, &counters.host_evidence);
  }
  RowMatrix ev_host_total = RowMatrix::Zero(n_hosts, R);
  for (int p = 0; p < P; ++p) ev_host_total += ev_host[static_cast<std::size_t>(p)];

  // beta, then delta, mirrored with C_pr = sum_i E alpha_ir E gamma_ipr.
  {
    const RowMatrix alpha_mean = alpha.mean();
    std::vector<Eigen::VectorXd> C(static_cast<std::size_t>(P));
    std::vector<RowMatrix> delta_mean(static_cast<std::size_t>(P));
    for (int p = 0; p < P; ++p) {
      C[static_cast<std::size_t>(p)] = weighted_column_sums(alpha_mean, state.gamma.mean(p));
      delta_mean[static_cast<std::size_t>(p)] = state.delta.mean(p);
    }
    for (Eigen::Index j = 0; j < n_hosts; ++j) {
      const double prior_rate = state.hosts.nu[j] / state.hosts.xi[j];
      for (int r = 0; r < R; ++r) {
        double exposure = 0.0;
        for (std::size_t p = 0; p < static_cast<std::size_t>(P); ++p) {
          exposure += seg.snapshots[p] * delta_mean[p](j, r) * C[p][r];
        }
        beta.shape(j, r) = hyper.beta.a + ev_host_total(j, r);
        beta.rate(j, r) = prior_rate + exposure;
      }
    }
    const RowMatrix beta_mean = beta.mean();
    for (int p = 1; p < P; ++p) {
      const auto up = static_cast<std::size_t>(p);
      auto& d = state.delta.segments[up];
      const double prior_rate = state.delta.nu[up] / state.delta.xi[up];
      for (Eigen::Index j = 0; j < n_hosts; ++j) {
        for (int r = 0; r < R; ++r) {
          d.shape(j, r) = hyper.delta.a + ev_host[up](j, r);
          d.rate(j, r) = prior_rate + beta_mean(j, r) * seg.snapshots[up] * C[up][r];
        }
      }
    }
  }

  // phi is shared by every snapshot: exposure xt yt T.
  {
    auto& phi = state.hosts.phi;
    RowMatrix ev_phi = RowMatrix::Zero(phi.shape.rows(), phi.shape.cols());
    for (std::size_t t = 0; t < T; ++t) {
      ev_phi += phi_evidence(problems[t], state.edges[t], &counters.phi_evidence);
    }
    const RowMatrix exposure = covariate_exposure(problems.front());
    const double prior_rate = state.hosts.nu_phi / state.hosts.xi_phi;
    const double n_snapshots = static_cast<double>(T);
    phi.shape = (ev_phi.array() + hyper.phi.a).matrix();
    phi.rate = (exposure.array() * n_snapshots + prior_rate).matrix();
  }

  // Second level.
  state.users.xi = second_level_rate(alpha, hyper.alpha.c);
  state.hosts.xi = second_level_rate(beta, hyper.beta.c);
  double phi_total = hyper.phi.c;
  for (Eigen::Index k = 0; k < state.hosts.phi.shape.size(); ++k) {
    phi_total += state.hosts.phi.shape.data()[k] / state.hosts.phi.rate.data()[k];
  }
  state.hosts.xi_phi = phi_total;
  for (int p = 1; p < P; ++p) {
    const auto up = static_cast<std::size_t>(p);
    state.gamma.xi[up] = hyper.gamma.c + state.gamma.segments[up].mean().sum();
    state.delta.xi[up] = hyper.delta.c + state.delta.segments[up].mean().sum();
  }
  return counters;
}

double seasonal_elbo(const SeasonalState& state, const std::vector<EpmfProblem>& problems,
                     const Hyperparameters& hyper) {
  check_problems(state, problems);
  const int P = state.gamma.period();
  const std::size_t T = problems.size();
  const auto seg = segment_counts(state.period_map, T);

  double adjustments = 0.0;
  for (int p = 1; p < P; ++p) {
    const auto up = static_cast<std::size_t>(p);
    adjustments += gamma_block_elbo_shared(state.gamma.segments[up], state.gamma.nu[up],
                                           state.gamma.xi[up], hyper.gamma);
    adjustments += gamma_block_elbo_shared(state.delta.segments[up], state.delta.nu[up],
                                           state.delta.xi[up], hyper.delta);
  }
  const double users = user_side_elbo(state.users, hyper.alpha);
  const double hosts = host_side_elbo(state.hosts, hyper.beta, hyper.phi);

  const RowMatrix log_alpha = state.users.alpha.log_mean();
  const RowMatrix log_beta = state.hosts.beta.log_mean();
  const RowMatrix log_phi = state.hosts.phi.log_mean();
  std::vector<double> edge_terms(T);
  for (std::size_t t = 0; t < T; ++t) {
    const int p = seg.of_snapshot[t];
    edge_terms[t] = edge_elbo(problems[t], state.edges[t], log_alpha + state.gamma.log_mean(p),
                              log_beta + state.delta.log_mean(p), log_phi);
  }

  const RowMatrix alpha_mean = state.users.alpha.mean();
  const RowMatrix beta_mean = state.hosts.beta.mean();
  double latent = 0.0;
  for (int p = 0; p < P; ++p) {
    const double n_p = seg.snapshots[static_cast<std::size_t>(p)];
    if (n_p == 0.0) continue;
    const Eigen::VectorXd C = weighted_column_sums(alpha_mean, state.gamma.mean(p));
    const Eigen::VectorXd B = weighted_column_sums(beta_mean, state.delta.mean(p));
    latent += n_p * C.dot(B);
  }
  const RowMatrix exposure = covariate_exposure(problems.front());
  const double covariate =
      static_cast<double>(T) * (state.hosts.phi.mean().array() * exposure.array()).sum();

  const double likelihood = pairwise_sum(edge_terms) - latent - covariate;
  if (!std::isfinite(users + hosts)) throw Error("seasonal ELBO: factor term is not finite");
  if (!std::isfinite(adjustments)) throw Error("seasonal ELBO: adjustment term is not finite");
  if (!std::isfinite(likelihood)) throw Error("seasonal ELBO: likelihood term is not finite");
  return users + hosts + adjustments + likelihood;
}

SeasonalFitResult fit_seasonal(const TemporalGraphSequence& sequence, const CovariateMatrix& users,
                               const CovariateMatrix& hosts, const Hyperparameters& hyper,
                               const FitOptions& options) {
  if (!(options.tol > 0)) throw Error("tol must be positive");
  if (options.threads > 0) set_num_threads(options.threads);
  const auto problems = make_snapshot_problems(sequence, users, hosts);
  SeasonalFitResult result;
  result.state = init_seasonal_state(sequence, problems, hyper, options.seed);
  auto& trace = result.trace;
  while (trace.iterations < options.max_iter) {
    seasonal_sweep(result.state, problems, hyper);
    ++trace.iterations;
    trace.values.push_back(seasonal_elbo(result.state, problems, hyper));
    if (elbo_converged(trace.values, options.tol)) {
      trace.converged = true;
      break;
    }
  }
  return result;
}

SeasonalParams seasonal_point_estimates(const SeasonalState& state) {
  SeasonalParams out;
  out.base = {state.users.alpha.mean(), state.hosts.beta.mean(), state.hosts.phi.mean()};
  for (int p = 0; p < state.gamma.period(); ++p) {
    out.gamma.push_back(state.gamma.mean(p));
    out.delta.push_back(state.delta.mean(p));
  }
  out.period_map = state.period_map;
  return out;
}

double seasonal_score(const SeasonalParams& params, NodeId user, NodeId host, long t,
                      const CovariateMatrix& user_covariates, const CovariateMatrix& host_covariates) {
  if (t < 1) throw Error("day index must be >= 1");
  return link_probability(seasonal_rate(params, user, host, t, user_covariates.active(user),
                                        host_covariates.active(host)));
}

}  // namespace linkpmf
