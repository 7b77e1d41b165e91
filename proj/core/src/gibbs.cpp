#include "linkpmf/gibbs.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "parallel.hpp"

namespace linkpmf {

namespace {

double gamma_draw(const GammaParams& p, CounterRng& rng) {
  std::gamma_distribution<double> dist(p.shape, 1.0 / p.rate);
  return std::max(dist(rng), std::numeric_limits<double>::min());
}

std::uint64_t iteration_key(std::uint64_t seed, std::string_view label, std::uint64_t iteration) {
  return mix64(stream_key(seed, label) + mix64(iteration));
}

}  // namespace

std::uint32_t sample_zero_truncated_poisson(double lambda, CounterRng& rng) {
  if (!(lambda > 0) || !std::isfinite(lambda)) {
    throw Error("zero-truncated Poisson rate must be positive and finite");
  }
  if (lambda >= 1.0) {
    std::poisson_distribution<std::uint32_t> poisson(lambda);
    while (true) {
      const std::uint32_t n = poisson(rng);
      if (n > 0) return n;
    }
  }
  // P(N = k | N > 0) = lambda^k / (k! (e^lambda - 1)).
  const double u = rng.uniform();
  double p = lambda / std::expm1(lambda);
  double cumulative = p;
  std::uint32_t k = 1;
  while (u > cumulative && k < 1000) {
    p *= lambda / (k + 1);
    if (p == 0.0) break;
    cumulative += p;
    ++k;
  }
  return k;
}

void sample_multinomial(std::uint32_t n, std::span<const double> weights,
                        std::span<std::uint32_t> out, CounterRng& rng) {
  if (out.size() != weights.size()) throw DimensionError("sample_multinomial: size mismatch");
  double remaining_weight = 0.0;
  for (const double w : weights) remaining_weight += w;
  std::uint32_t remaining = n;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (remaining == 0 || l + 1 == weights.size()) {
      out[l] = remaining;
      remaining = 0;
      continue;
    }
    const double p = remaining_weight > 0 ? std::min(1.0, weights[l] / remaining_weight) : 0.0;
    std::uint32_t x = 0;
    if (p >= 1.0) {
      x = remaining;
    } else if (p > 0.0) {
      x = std::binomial_distribution<std::uint32_t>(remaining, p)(rng);
    }
    out[l] = x;
    remaining -= x;
    remaining_weight -= weights[l];
  }
}

GibbsState init_gibbs_state(const EpmfProblem& problem, const Hyperparameters& hyper,
                            std::uint64_t seed) {
  hyper.validate();
  const auto n_users = static_cast<Eigen::Index>(problem.graph().n_users());
  const auto n_hosts = static_cast<Eigen::Index>(problem.graph().n_hosts());
  const auto K = static_cast<Eigen::Index>(problem.n_user_covariates());
  const auto H = static_cast<Eigen::Index>(problem.n_host_covariates());
  const int R = hyper.latent_dim;
  GibbsState state;
  CounterRng rng(stream_key(seed, "gibbs.init"));

  auto draw_side = [&](RowMatrix& values, Eigen::VectorXd& zeta, Eigen::Index rows,
                       const GammaHierarchy& prior) {
    values.resize(rows, R);
    zeta.resize(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
      zeta[i] = gamma_draw({prior.b, prior.c}, rng);
      for (int r = 0; r < R; ++r) values(i, r) = gamma_draw({prior.a, zeta[i]}, rng);
    }
  };
  draw_side(state.params.alpha, state.zeta_alpha, n_users, hyper.alpha);
  draw_side(state.params.beta, state.zeta_beta, n_hosts, hyper.beta);
  state.zeta_phi = gamma_draw({hyper.phi.b, hyper.phi.c}, rng);
  state.params.phi.resize(K, H);
  for (Eigen::Index k = 0; k < state.params.phi.size(); ++k) {
    state.params.phi.data()[k] = gamma_draw({hyper.phi.a, state.zeta_phi}, rng);
  }
  return state;
}

void sample_latent_counts(GibbsState& state, const EpmfProblem& problem, std::uint64_t seed,
                          std::uint64_t iteration) {
  const auto& graph = problem.graph();
  const std::size_t nnz = graph.nnz();
  const auto R = static_cast<std::size_t>(state.params.latent_dim());
  state.counts.assign(nnz, 0);
  state.z_latent.assign(nnz * R, 0);
  state.z_covariate.assign(problem.total_pairs(), 0);
  const std::uint64_t key = iteration_key(seed, "gibbs.counts", iteration);
  const double* phi = state.params.phi.data();
  bool zero_rate = false;
  std::size_t zero_edge = 0;

  LINKPMF_PARALLEL_FOR
  for (std::ptrdiff_t ep = 0; ep < static_cast<std::ptrdiff_t>(nnz); ++ep) {
    const auto e = static_cast<std::size_t>(ep);
    const Edge& edge = graph.edge(e);
    const auto pairs = problem.edge_pairs(e);
    std::vector<double> weights(R + pairs.size());
    for (std::size_t r = 0; r < R; ++r) {
      weights[r] = state.params.alpha(edge.user, r) * state.params.beta(edge.host, r);
    }
    for (std::size_t p = 0; p < pairs.size(); ++p) weights[R + p] = phi[pairs[p]];
    double psi = 0.0;
    for (const double w : weights) psi += w;
    if (!(psi > 0)) {
#ifdef _OPENMP
#pragma omp critical(linkpmf_gibbs_zero_rate)
#endif
      if (!zero_rate || e < zero_edge) {
        zero_rate = true;
        zero_edge = e;
      }
      continue;
    }
    CounterRng rng(key, e);
    const std::uint32_t n = sample_zero_truncated_poisson(psi, rng);
    state.counts[e] = n;
    std::vector<std::uint32_t> z(weights.size());
    sample_multinomial(n, weights, z, rng);
    std::copy(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(R), state.z_latent.begin() + static_cast<std::ptrdiff_t>(e * R));
    std::copy(z.begin() + static_cast<std::ptrdiff_t>(R), z.end(),
              state.z_covariate.begin() + static_cast<std::ptrdiff_t>(problem.pair_offset(e)));
  }
  if (zero_rate) {
    const Edge& edge = graph.edge(zero_edge);
    throw Error("observed edge (" + std::to_string(edge.user) + ", " + std::to_string(edge.host) +
                ") has zero rate");
  }
}

GammaParams alpha_conditional(const GibbsState& state, const EpmfProblem& problem,
                              const Hyperparameters& hyper, NodeId user, int r) {
  const auto& graph = problem.graph();
  const auto R = static_cast<std::size_t>(state.params.latent_dim());
  double z = 0.0;
  if (!state.z_latent.empty()) {
    for (std::size_t e = graph.row_begin(user); e < graph.row_end(user); ++e) {
      z += state.z_latent[e * R + static_cast<std::size_t>(r)];
    }
  }
  const double beta_sum = state.params.beta.col(r).sum();
  return {hyper.alpha.a + z, state.zeta_alpha[user] + beta_sum};
}

GammaParams beta_conditional(const GibbsState& state, const EpmfProblem& problem,
                             const Hyperparameters& hyper, NodeId host, int r) {
  const auto& graph = problem.graph();
  const auto R = static_cast<std::size_t>(state.params.latent_dim());
  double z = 0.0;
  if (!state.z_latent.empty()) {
    for (const std::size_t e : graph.column(host)) {
      z += state.z_latent[e * R + static_cast<std::size_t>(r)];
    }
  }
  const double alpha_sum = state.params.alpha.col(r).sum();
  return {hyper.beta.a + z, state.zeta_beta[host] + alpha_sum};
}

GammaParams phi_conditional(const GibbsState& state, const EpmfProblem& problem,
                            const Hyperparameters& hyper, std::size_t k, std::size_t h) {
  const std::size_t H = problem.n_host_covariates();
  const auto flat = static_cast<std::uint32_t>(k * H + h);
  double z = 0.0;
  if (!state.z_covariate.empty()) {
    for (std::size_t e = 0; e < problem.graph().nnz(); ++e) {
      const auto pairs = problem.edge_pairs(e);
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        if (pairs[p] == flat) z += state.z_covariate[problem.pair_offset(e) + p];
      }
    }
  }
  const double exposure = problem.users().column_sums()[k] * problem.hosts().column_sums()[h];
  return {hyper.phi.a + z, state.zeta_phi + exposure};
}

void sample_factors(GibbsState& state, const EpmfProblem& problem, const Hyperparameters& hyper,
                    std::uint64_t seed, std::uint64_t iteration) {
  const auto& graph = problem.graph();
  const int R = state.params.latent_dim();
  const auto uR = static_cast<std::size_t>(R);
  auto& alpha = state.params.alpha;
  auto& beta = state.params.beta;
  const bool have_counts = state.z_latent.size() == graph.nnz() * uR;

  // alpha | Z, beta, zeta
  {
    const Eigen::VectorXd beta_sums = beta.colwise().sum().transpose();
    const std::uint64_t key = iteration_key(seed, "gibbs.alpha", iteration);
    LINKPMF_PARALLEL_FOR
    for (std::ptrdiff_t ip = 0; ip < alpha.rows(); ++ip) {
      const auto i = static_cast<NodeId>(ip);
      CounterRng rng(key, i);
      for (int r = 0; r < R; ++r) {
        double z = 0.0;
        if (have_counts) {
          for (std::size_t e = graph.row_begin(i); e < graph.row_end(i); ++e) {
            z += state.z_latent[e * uR + static_cast<std::size_t>(r)];
          }
        }
        alpha(ip, r) = gamma_draw({hyper.alpha.a + z, state.zeta_alpha[ip] + beta_sums[r]}, rng);
      }
    }
  }
  // beta | Z, alpha, zeta
  {
    const Eigen::VectorXd alpha_sums = alpha.colwise().sum().transpose();
    const std::uint64_t key = iteration_key(seed, "gibbs.beta", iteration);
    LINKPMF_PARALLEL_FOR
    for (std::ptrdiff_t jp = 0; jp < beta.rows(); ++jp) {
      const auto j = static_cast<NodeId>(jp);
      CounterRng rng(key, j);
      for (int r = 0; r < R; ++r) {
        double z = 0.0;
        if (have_counts) {
          for (const std::size_t e : graph.column(j)) {
            z += state.z_latent[e * uR + static_cast<std::size_t>(r)];
          }
        }
        beta(jp, r) = gamma_draw({hyper.beta.a + z, state.zeta_beta[jp] + alpha_sums[r]}, rng);
      }
    }
  }
  // phi | Z, zeta_phi
  auto& phi = state.params.phi;
  if (phi.size() > 0) {
    RowMatrix z = RowMatrix::Zero(phi.rows(), phi.cols());
    if (state.z_covariate.size() == problem.total_pairs()) {
      for (std::size_t e = 0; e < graph.nnz(); ++e) {
        const auto pairs = problem.edge_pairs(e);
        for (std::size_t p = 0; p < pairs.size(); ++p) {
          z.data()[pairs[p]] += state.z_covariate[problem.pair_offset(e) + p];
        }
      }
    }
    const RowMatrix exposure = covariate_exposure(problem);
    CounterRng rng(iteration_key(seed, "gibbs.phi", iteration));
    for (Eigen::Index k = 0; k < phi.size(); ++k) {
      phi.data()[k] =
          gamma_draw({hyper.phi.a + z.data()[k], state.zeta_phi + exposure.data()[k]}, rng);
    }
  }
  // zeta blocks
  {
    CounterRng rng(iteration_key(seed, "gibbs.zeta", iteration));
    for (Eigen::Index i = 0; i < alpha.rows(); ++i) {
      state.zeta_alpha[i] =
          gamma_draw({hyper.alpha.b + R * hyper.alpha.a, hyper.alpha.c + alpha.row(i).sum()}, rng);
    }
    for (Eigen::Index j = 0; j < beta.rows(); ++j) {
      state.zeta_beta[j] =
          gamma_draw({hyper.beta.b + R * hyper.beta.a, hyper.beta.c + beta.row(j).sum()}, rng);
    }
    state.zeta_phi = gamma_draw(
        {hyper.phi.b + static_cast<double>(phi.size()) * hyper.phi.a, hyper.phi.c + phi.sum()}, rng);
  }
}

PosteriorSamples run_chain(const EpmfProblem& problem, const Hyperparameters& hyper,
                           const GibbsOptions& options) {
  if (options.burn_in < 0 || options.n_samples <= options.burn_in) {
    throw Error("run_chain requires n_samples > burn_in >= 0");
  }
  if (options.thin < 1) throw Error("thinning interval must be >= 1");
  PosteriorSamples samples;
  samples.burn_in = options.burn_in;
  samples.thin = options.thin;
  samples.draws.reserve(
      static_cast<std::size_t>((options.n_samples - options.burn_in + options.thin - 1) / options.thin));
  GibbsState state = init_gibbs_state(problem, hyper, options.seed);
  for (int t = 0; t < options.n_samples; ++t) {
    const auto iteration = static_cast<std::uint64_t>(t);
    sample_latent_counts(state, problem, options.seed, iteration);
    sample_factors(state, problem, hyper, options.seed, iteration);
    if (t >= options.burn_in && (t - options.burn_in) % options.thin == 0) {
      samples.draws.push_back(state.params);
    }
  }
  return samples;
}

double posterior_mean_link_probability(const PosteriorSamples& samples, NodeId user, NodeId host,
                                       const CovariateMatrix& user_covariates,
                                       const CovariateMatrix& host_covariates) {
  if (samples.draws.empty()) throw Error("no posterior draws");
  std::vector<double> survival(samples.draws.size());
  for (std::size_t m = 0; m < samples.draws.size(); ++m) {
    survival[m] = std::exp(-rate_value(samples.draws[m], user, host, user_covariates.active(user),
                                       host_covariates.active(host)));
  }
  return 1.0 - pairwise_sum(survival) / static_cast<double>(survival.size());
}

}  // namespace linkpmf
