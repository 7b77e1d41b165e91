#include "linkpmf/variational.hpp"

#include <cmath>
#include <random>
#include <string>

#include "linkpmf/random.hpp"
#include "linkpmf/special.hpp"
#include "parallel.hpp"

namespace linkpmf {

namespace {

int g_threads = 0;

// E_q[log p(zeta)] - E_q[log q(zeta)] for zeta ~ Gamma(b, c) a priori and
// Gamma(nu, xi) under q. Arranged so that nu = b, xi = c gives exactly 0.
double hyper_factor_elbo(double nu, double xi, const GammaHierarchy& prior) {
  const double e_log = digamma(nu) - std::log(xi);
  return (prior.b - nu) * e_log + (prior.b * std::log(prior.c) - nu * std::log(xi)) +
         (std::lgamma(nu) - std::lgamma(prior.b)) + nu * (1.0 - prior.c / xi);
}

// E_q[log Gamma(x; a, zeta)] - E_q[log q(x)] for one entry, given E[zeta] and
// E[log zeta].
double factor_elbo(double shape, double rate, double a, double e_zeta, double e_log_zeta) {
  const double e_log_x = digamma(shape) - std::log(rate);
  const double e_x = shape / rate;
  const double log_p = a * e_log_zeta - std::lgamma(a) + (a - 1.0) * e_log_x - e_zeta * e_x;
  const double entropy = shape - std::log(rate) + std::lgamma(shape) + (1.0 - shape) * digamma(shape);
  return log_p + entropy;
}

void draw_block(CounterRng& rng, GammaBlock& block, Eigen::Index row, double a, double zeta) {
  std::gamma_distribution<double> dist(a, 1.0 / zeta);
  for (Eigen::Index r = 0; r < block.shape.cols(); ++r) {
    const double v = std::max(dist(rng), 1e-300);
    block.shape(row, r) = a;
    block.rate(row, r) = a / v;
  }
}

}  // namespace

void set_num_threads(int threads) { g_threads = threads; }

int num_threads() {
  if (g_threads > 0) return g_threads;
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

EpmfProblem::EpmfProblem(const SparseBipartiteGraph& graph, const CovariateMatrix& users,
                         const CovariateMatrix& hosts)
    : graph_(&graph), users_(&users), hosts_(&hosts) {
  if (users.n_nodes() != graph.n_users()) {
    throw DimensionError("user covariates have " + std::to_string(users.n_nodes()) +
                         " rows but the graph has " + std::to_string(graph.n_users()) + " users");
  }
  if (hosts.n_nodes() != graph.n_hosts()) {
    throw DimensionError("host covariates have " + std::to_string(hosts.n_nodes()) +
                         " rows but the graph has " + std::to_string(graph.n_hosts()) + " hosts");
  }
  const std::size_t H = hosts.n_covariates();
  pair_offsets_.reserve(graph.nnz() + 1);
  pair_offsets_.push_back(0);
  for (const Edge& e : graph.edges()) {
    for (const NodeId k : users.active(e.user)) {
      for (const NodeId h : hosts.active(e.host)) {
        pair_ids_.push_back(static_cast<std::uint32_t>(k * H + h));
      }
    }
    pair_offsets_.push_back(pair_ids_.size());
  }
}

RowMatrix GammaBlock::log_mean() const {
  RowMatrix out(shape.rows(), shape.cols());
  for (Eigen::Index k = 0; k < shape.size(); ++k) {
    out.data()[k] = digamma(shape.data()[k]) - std::log(rate.data()[k]);
  }
  return out;
}

UserSide init_user_side(std::size_t n_users, int latent_dim, const GammaHierarchy& prior,
                        std::uint64_t seed, std::string_view label) {
  UserSide side;
  const auto n = static_cast<Eigen::Index>(n_users);
  side.alpha = GammaBlock(n, latent_dim);
  side.nu = Eigen::VectorXd::Constant(n, prior.b + latent_dim * prior.a);
  side.xi.resize(n);
  CounterRng rng(stream_key(seed, std::string(label) + ".alpha"));
  std::gamma_distribution<double> zeta_dist(prior.b, 1.0 / prior.c);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double zeta = std::max(zeta_dist(rng), 1e-300);
    side.xi[i] = side.nu[i] / zeta;
    draw_block(rng, side.alpha, i, prior.a, zeta);
  }
  return side;
}

HostSide init_host_side(std::size_t n_hosts, std::size_t n_user_covariates,
                        std::size_t n_host_covariates, int latent_dim,
                        const GammaHierarchy& beta_prior, const GammaHierarchy& phi_prior,
                        std::uint64_t seed, std::string_view label) {
  HostSide side;
  const auto n = static_cast<Eigen::Index>(n_hosts);
  side.beta = GammaBlock(n, latent_dim);
  side.nu = Eigen::VectorXd::Constant(n, beta_prior.b + latent_dim * beta_prior.a);
  side.xi.resize(n);
  CounterRng rng(stream_key(seed, std::string(label) + ".beta"));
  std::gamma_distribution<double> zeta_dist(beta_prior.b, 1.0 / beta_prior.c);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double zeta = std::max(zeta_dist(rng), 1e-300);
    side.xi[j] = side.nu[j] / zeta;
    draw_block(rng, side.beta, j, beta_prior.a, zeta);
  }

  const auto K = static_cast<Eigen::Index>(n_user_covariates);
  const auto H = static_cast<Eigen::Index>(n_host_covariates);
  side.phi = GammaBlock(K, H);
  side.nu_phi = phi_prior.b + static_cast<double>(K * H) * phi_prior.a;
  if (K * H == 0) {
    side.xi_phi = phi_prior.c;
    return side;
  }
  CounterRng phi_rng(stream_key(seed, std::string(label) + ".phi"));
  std::gamma_distribution<double> phi_zeta_dist(phi_prior.b, 1.0 / phi_prior.c);
  const double zeta = std::max(phi_zeta_dist(phi_rng), 1e-300);
  side.xi_phi = side.nu_phi / zeta;
  for (Eigen::Index k = 0; k < K; ++k) draw_block(phi_rng, side.phi, k, phi_prior.a, zeta);
  return side;
}

std::size_t update_edge_proxies(const EpmfProblem& problem, const RowMatrix& log_user,
                                const RowMatrix& log_host, const RowMatrix& log_phi,
                                EdgeProxies& proxies) {
  const auto& graph = problem.graph();
  const std::size_t nnz = graph.nnz();
  const auto R = static_cast<std::size_t>(log_user.cols());
  proxies.theta.resize(nnz);
  proxies.log_theta.resize(nnz);
  proxies.chi_latent.resize(nnz * R);
  proxies.chi_covariate.resize(problem.total_pairs());
  const double* phi = log_phi.data();
  bool overflow = false;
  std::size_t overflow_edge = 0;
  std::size_t touched = 0;

  LINKPMF_PARALLEL_FOR_COUNT(touched)
  for (std::ptrdiff_t ep = 0; ep < static_cast<std::ptrdiff_t>(nnz); ++ep) {
    const auto e = static_cast<std::size_t>(ep);
    ++touched;
    const Edge& edge = graph.edge(e);
    double* chi = proxies.chi_latent.data() + e * R;
    const auto pairs = problem.edge_pairs(e);
    double* chi_cov = proxies.chi_covariate.data() + problem.pair_offset(e);

    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < R; ++r) {
      chi[r] = log_user(edge.user, r) + log_host(edge.host, r);
      top = std::max(top, chi[r]);
    }
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      chi_cov[p] = phi[pairs[p]];
      top = std::max(top, chi_cov[p]);
    }
    double total = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      chi[r] = std::exp(chi[r] - top);
      total += chi[r];
    }
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      chi_cov[p] = std::exp(chi_cov[p] - top);
      total += chi_cov[p];
    }
    const double inv = 1.0 / total;
    for (std::size_t r = 0; r < R; ++r) chi[r] *= inv;
    for (std::size_t p = 0; p < pairs.size(); ++p) chi_cov[p] *= inv;
    const double log_theta = top + std::log(total);
    proxies.log_theta[e] = log_theta;
    proxies.theta[e] = std::exp(log_theta);
    if (!std::isfinite(proxies.theta[e])) {
#ifdef _OPENMP
#pragma omp critical(linkpmf_theta_overflow)
#endif
      if (!overflow || e < overflow_edge) {
        overflow = true;
        overflow_edge = e;
      }
    }
  }
  if (overflow) {
    const Edge& edge = graph.edge(overflow_edge);
    throw Error("theta overflow on edge (" + std::to_string(edge.user) + ", " +
                std::to_string(edge.host) + ")");
  }
  return touched;
}

RowMatrix user_evidence(const EpmfProblem& problem, const EdgeProxies& proxies, int latent_dim,
                        std::uint64_t* visits) {
  const auto& graph = problem.graph();
  const auto R = static_cast<std::size_t>(latent_dim);
  RowMatrix out = RowMatrix::Zero(static_cast<Eigen::Index>(graph.n_users()), latent_dim);
  std::uint64_t touched = 0;

  LINKPMF_PARALLEL_FOR_COUNT(touched)
  for (std::ptrdiff_t ip = 0; ip < static_cast<std::ptrdiff_t>(graph.n_users()); ++ip) {
    const auto i = static_cast<NodeId>(ip);
    double* row = out.data() + static_cast<std::size_t>(ip) * R;
    for (std::size_t e = graph.row_begin(i); e < graph.row_end(i); ++e) {
      const double n = ztp_mean(proxies.theta[e]);
      const double* chi = proxies.chi_latent.data() + e * R;
      for (std::size_t r = 0; r < R; ++r) row[r] += n * chi[r];
      ++touched;
    }
  }
  if (visits) *visits += touched;
  return out;
}

RowMatrix host_evidence(const EpmfProblem& problem, const EdgeProxies& proxies, int latent_dim,
                        std::uint64_t* visits) {
  const auto& graph = problem.graph();
  const auto R = static_cast<std::size_t>(latent_dim);
  RowMatrix out = RowMatrix::Zero(static_cast<Eigen::Index>(graph.n_hosts()), latent_dim);
  std::uint64_t touched = 0;

  LINKPMF_PARALLEL_FOR_COUNT(touched)
  for (std::ptrdiff_t jp = 0; jp < static_cast<std::ptrdiff_t>(graph.n_hosts()); ++jp) {
    double* row = out.data() + static_cast<std::size_t>(jp) * R;
    for (const std::size_t e : graph.column(static_cast<NodeId>(jp))) {
      const double n = ztp_mean(proxies.theta[e]);
      const double* chi = proxies.chi_latent.data() + e * R;
      for (std::size_t r = 0; r < R; ++r) row[r] += n * chi[r];
      ++touched;
    }
  }
  if (visits) *visits += touched;
  return out;
}

RowMatrix phi_evidence(const EpmfProblem& problem, const EdgeProxies& proxies,
                       std::uint64_t* visits) {
  const auto K = static_cast<Eigen::Index>(problem.n_user_covariates());
  const auto H = static_cast<Eigen::Index>(problem.n_host_covariates());
  RowMatrix out = RowMatrix::Zero(K, H);
  if (problem.total_pairs() == 0) return out;
  const std::size_t nnz = problem.graph().nnz();
  double* cell = out.data();
  std::uint64_t touched = 0;
  for (std::size_t e = 0; e < nnz; ++e, ++touched) {
    const auto pairs = problem.edge_pairs(e);
    if (pairs.empty()) continue;
    const double n = ztp_mean(proxies.theta[e]);
    const double* chi = proxies.chi_covariate.data() + problem.pair_offset(e);
    for (std::size_t p = 0; p < pairs.size(); ++p) cell[pairs[p]] += n * chi[p];
  }
  if (visits) *visits += touched;
  return out;
}

Eigen::VectorXd column_mean_sums(const GammaBlock& block) {
  const Eigen::Index rows = block.shape.rows();
  Eigen::VectorXd out(block.shape.cols());
  std::vector<double> column(static_cast<std::size_t>(rows));
  for (Eigen::Index r = 0; r < block.shape.cols(); ++r) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      column[static_cast<std::size_t>(i)] = block.shape(i, r) / block.rate(i, r);
    }
    out[r] = pairwise_sum(column);
  }
  return out;
}

RowMatrix covariate_exposure(const EpmfProblem& problem) {
  const auto xt = problem.users().column_sums();
  const auto yt = problem.hosts().column_sums();
  RowMatrix out(static_cast<Eigen::Index>(xt.size()), static_cast<Eigen::Index>(yt.size()));
  for (std::size_t k = 0; k < xt.size(); ++k) {
    for (std::size_t h = 0; h < yt.size(); ++h) {
      out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(h)) = xt[k] * yt[h];
    }
  }
  return out;
}

Eigen::VectorXd second_level_rate(const GammaBlock& block, double c) {
  Eigen::VectorXd xi(block.shape.rows());
  for (Eigen::Index i = 0; i < block.shape.rows(); ++i) {
    double s = c;
    for (Eigen::Index r = 0; r < block.shape.cols(); ++r) s += block.shape(i, r) / block.rate(i, r);
    xi[i] = s;
  }
  return xi;
}

double gamma_block_elbo(const GammaBlock& block, std::span<const double> nu,
                        std::span<const double> xi, const GammaHierarchy& prior) {
  const Eigen::Index rows = block.shape.rows();
  std::vector<double> per_row(static_cast<std::size_t>(rows));

  LINKPMF_PARALLEL_FOR
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double e_zeta = nu[ui] / xi[ui];
    const double e_log_zeta = digamma(nu[ui]) - std::log(xi[ui]);
    double s = hyper_factor_elbo(nu[ui], xi[ui], prior);
    for (Eigen::Index r = 0; r < block.shape.cols(); ++r) {
      s += factor_elbo(block.shape(i, r), block.rate(i, r), prior.a, e_zeta, e_log_zeta);
    }
    per_row[ui] = s;
  }
  return pairwise_sum(per_row);
}

double gamma_block_elbo_shared(const GammaBlock& block, double nu, double xi,
                               const GammaHierarchy& prior) {
  const double e_zeta = nu / xi;
  const double e_log_zeta = digamma(nu) - std::log(xi);
  std::vector<double> terms(static_cast<std::size_t>(block.shape.size()));
  for (Eigen::Index k = 0; k < block.shape.size(); ++k) {
    terms[static_cast<std::size_t>(k)] =
        factor_elbo(block.shape.data()[k], block.rate.data()[k], prior.a, e_zeta, e_log_zeta);
  }
  return hyper_factor_elbo(nu, xi, prior) + pairwise_sum(terms);
}

double edge_elbo(const EpmfProblem& problem, const EdgeProxies& proxies, const RowMatrix& log_user,
                 const RowMatrix& log_host, const RowMatrix& log_phi) {
  const auto& graph = problem.graph();
  const std::size_t nnz = graph.nnz();
  const auto R = static_cast<std::size_t>(log_user.cols());
  const double* phi = log_phi.data();
  std::vector<double> terms(nnz);

  LINKPMF_PARALLEL_FOR
  for (std::ptrdiff_t ep = 0; ep < static_cast<std::ptrdiff_t>(nnz); ++ep) {
    const auto e = static_cast<std::size_t>(ep);
    const Edge& edge = graph.edge(e);
    const double* chi = proxies.chi_latent.data() + e * R;
    const auto pairs = problem.edge_pairs(e);
    const double* chi_cov = proxies.chi_covariate.data() + problem.pair_offset(e);
    double s = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      if (chi[r] > 0) {
        s += chi[r] * (log_user(edge.user, r) + log_host(edge.host, r) - std::log(chi[r]));
      }
    }
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      if (chi_cov[p] > 0) s += chi_cov[p] * (phi[pairs[p]] - std::log(chi_cov[p]));
    }
    const double theta = proxies.theta[e];
    terms[e] = ztp_mean(theta) * (s - proxies.log_theta[e]) + log_expm1(theta);
  }
  return pairwise_sum(terms);
}

bool elbo_converged(const std::vector<double>& values, double tol) {
  if (values.size() < 2) return false;
  const double last = values.back();
  return std::abs(last - values[values.size() - 2]) < tol * std::abs(last);
}

double user_side_elbo(const UserSide& users, const GammaHierarchy& prior) {
  return gamma_block_elbo(users.alpha, std::span(users.nu.data(), users.nu.size()),
                          std::span(users.xi.data(), users.xi.size()), prior);
}

double host_side_elbo(const HostSide& hosts, const GammaHierarchy& beta_prior,
                      const GammaHierarchy& phi_prior) {
  return gamma_block_elbo(hosts.beta, std::span(hosts.nu.data(), hosts.nu.size()),
                          std::span(hosts.xi.data(), hosts.xi.size()), beta_prior) +
         gamma_block_elbo_shared(hosts.phi, hosts.nu_phi, hosts.xi_phi, phi_prior);
}

double likelihood_elbo(const EpmfProblem& problem, const EdgeProxies& proxies,
                       const UserSide& users, const HostSide& hosts) {
  const double edges = edge_elbo(problem, proxies, users.alpha.log_mean(), hosts.beta.log_mean(),
                                 hosts.phi.log_mean());
  const Eigen::VectorXd sa = column_mean_sums(users.alpha);
  const Eigen::VectorXd sb = column_mean_sums(hosts.beta);
  double latent = 0.0;
  for (Eigen::Index r = 0; r < sa.size(); ++r) latent += sa[r] * sb[r];
  const RowMatrix exposure = covariate_exposure(problem);
  const RowMatrix phi_mean = hosts.phi.mean();
  double covariate = 0.0;
  for (Eigen::Index k = 0; k < exposure.size(); ++k) {
    covariate += phi_mean.data()[k] * exposure.data()[k];
  }
  return edges - latent - covariate;
}

}  // namespace linkpmf
