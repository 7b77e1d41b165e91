#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "linkpmf/model.hpp"
#include "linkpmf/random.hpp"
#include "linkpmf/variational.hpp"

namespace linkpmf {

struct GammaParams {
  double shape = 1.0;
  double rate = 1.0;
};

/// Current values of every variable of the augmented model. Latent counts are
/// stored for observed edges only: `counts[e]` is N_ij, `z_latent[e*R + r]`
/// and `z_covariate` (laid out like EpmfProblem::edge_pairs) its allocation.
struct GibbsState {
  PointParams params;
  Eigen::VectorXd zeta_alpha;
  Eigen::VectorXd zeta_beta;
  double zeta_phi = 1.0;
  std::vector<std::uint32_t> counts;
  std::vector<std::uint32_t> z_latent;
  std::vector<std::uint32_t> z_covariate;
};

struct PosteriorSamples {
  std::vector<PointParams> draws;
  int burn_in = 0;
  int thin = 1;

  std::size_t size() const noexcept { return draws.size(); }
};

struct GibbsOptions {
  int n_samples = 10000;  // total iterations, burn-in included
  int burn_in = 1000;
  int thin = 1;
  std::uint64_t seed = 0;
};

/// Zero-truncated Poisson draw. Rejection from Poisson(lambda) for lambda >= 1,
/// inversion of the truncated pmf below.
std::uint32_t sample_zero_truncated_poisson(double lambda, CounterRng& rng);

/// Multinomial(n, weights / sum(weights)) by sequential binomial splitting in
/// index order. `out` must have weights.size() entries.
void sample_multinomial(std::uint32_t n, std::span<const double> weights,
                        std::span<std::uint32_t> out, CounterRng& rng);

/// Draw from the prior: zeta, then alpha, beta, phi; latent counts empty.
GibbsState init_gibbs_state(const EpmfProblem& problem, const Hyperparameters& hyper,
                            std::uint64_t seed);

/// N_ij ~ ZTP(psi_ij), Z_ij ~ Mult(N_ij, pi_ij) on observed edges. Edge e of
/// iteration `iteration` uses its own counter stream. Throws Error when an
/// observed edge has psi = 0.
void sample_latent_counts(GibbsState& state, const EpmfProblem& problem, std::uint64_t seed,
                          std::uint64_t iteration);

/// Complete conditionals given the latent counts.
GammaParams alpha_conditional(const GibbsState& state, const EpmfProblem& problem,
                              const Hyperparameters& hyper, NodeId user, int r);
GammaParams beta_conditional(const GibbsState& state, const EpmfProblem& problem,
                             const Hyperparameters& hyper, NodeId host, int r);
GammaParams phi_conditional(const GibbsState& state, const EpmfProblem& problem,
                            const Hyperparameters& hyper, std::size_t k, std::size_t h);

/// alpha, beta, phi then the zeta blocks, each from its complete conditional.
void sample_factors(GibbsState& state, const EpmfProblem& problem, const Hyperparameters& hyper,
                    std::uint64_t seed, std::uint64_t iteration);

/// Systematic-scan chain; keeps every `thin`-th draw after burn-in.
PosteriorSamples run_chain(const EpmfProblem& problem, const Hyperparameters& hyper,
                           const GibbsOptions& options);

/// 1 - (1/M) sum_m exp(-psi_ij^(m)).
double posterior_mean_link_probability(const PosteriorSamples& samples, NodeId user, NodeId host,
                                       const CovariateMatrix& user_covariates,
                                       const CovariateMatrix& host_covariates);

}  // namespace linkpmf
