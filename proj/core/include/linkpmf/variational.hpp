#pragma once

// Building blocks shared by the single-graph, seasonal and joint variational
// fits: gamma proxy blocks, per-edge ZTP-multinomial proxies and the sparse
// accumulation kernels. Every kernel touches observed edges only.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "linkpmf/common.hpp"
#include "linkpmf/covariates.hpp"
#include "linkpmf/graph.hpp"
#include "linkpmf/model.hpp"

namespace linkpmf {

/// A graph with its two covariate matrices plus the per-edge list of active
/// covariate pairs. Holds references; the inputs must outlive it.
class EpmfProblem {
 public:
  EpmfProblem(const SparseBipartiteGraph& graph, const CovariateMatrix& users,
              const CovariateMatrix& hosts);

  const SparseBipartiteGraph& graph() const noexcept { return *graph_; }
  const CovariateMatrix& users() const noexcept { return *users_; }
  const CovariateMatrix& hosts() const noexcept { return *hosts_; }
  std::size_t n_user_covariates() const noexcept { return users_->n_covariates(); }
  std::size_t n_host_covariates() const noexcept { return hosts_->n_covariates(); }

  /// Flat ids (k * H + h) of the covariate pairs active on edge e.
  std::span<const std::uint32_t> edge_pairs(std::size_t e) const {
    return {pair_ids_.data() + pair_offsets_[e], pair_ids_.data() + pair_offsets_[e + 1]};
  }
  std::size_t pair_offset(std::size_t e) const { return pair_offsets_[e]; }
  std::size_t total_pairs() const noexcept { return pair_ids_.size(); }

 private:
  const SparseBipartiteGraph* graph_;
  const CovariateMatrix* users_;
  const CovariateMatrix* hosts_;
  std::vector<std::size_t> pair_offsets_;
  std::vector<std::uint32_t> pair_ids_;
};

/// Independent Gamma(shape, rate) factors laid out as a matrix.
struct GammaBlock {
  RowMatrix shape;
  RowMatrix rate;

  GammaBlock() = default;
  GammaBlock(Eigen::Index rows, Eigen::Index cols) : shape(rows, cols), rate(rows, cols) {}

  RowMatrix mean() const { return shape.cwiseQuotient(rate); }
  /// E[log x] = digamma(shape) - log(rate).
  RowMatrix log_mean() const;
};

/// User factors alpha with their per-user rate hyper-factor zeta ~ Gamma(nu, xi).
struct UserSide {
  GammaBlock alpha;
  Eigen::VectorXd nu;
  Eigen::VectorXd xi;
};

/// Host factors beta, covariate coefficients phi and their hyper-factors.
struct HostSide {
  GammaBlock beta;
  Eigen::VectorXd nu;
  Eigen::VectorXd xi;
  GammaBlock phi;  // K x H
  double nu_phi = 1.0;
  double xi_phi = 1.0;
};

/// Proxy q(N_ij, Z_ij) = ZTP(theta_ij) x Mult(N_ij, chi_ij) on observed edges.
/// chi is split into the dense latent part (nnz x R) and the covariate part
/// laid out like EpmfProblem::edge_pairs.
struct EdgeProxies {
  std::vector<double> theta;
  std::vector<double> log_theta;
  std::vector<double> chi_latent;
  std::vector<double> chi_covariate;
};

/// Per-sweep edge visit counts, one per edge-touching phase.
struct SweepCounters {
  std::uint64_t theta_chi = 0;
  std::uint64_t user_evidence = 0;
  std::uint64_t host_evidence = 0;
  std::uint64_t phi_evidence = 0;
};

/// Sets the worker count used by the parallel kernels (<= 0: library default).
void set_num_threads(int threads);
int num_threads();

/// Draws the gamma blocks "from the prior": zeta first, then the factor means
/// given zeta. Shapes are set to the prior shape and rates chosen so that the
/// proxy mean equals the drawn value.
UserSide init_user_side(std::size_t n_users, int latent_dim, const GammaHierarchy& prior,
                        std::uint64_t seed, std::string_view label);
HostSide init_host_side(std::size_t n_hosts, std::size_t n_user_covariates,
                        std::size_t n_host_covariates, int latent_dim,
                        const GammaHierarchy& beta_prior, const GammaHierarchy& phi_prior,
                        std::uint64_t seed, std::string_view label);

/// theta/chi update. `log_user`/`log_host` are E[log alpha] / E[log beta],
/// `log_phi` is E[log phi]. Returns the number of edges visited. Throws Error
/// naming the edge when theta overflows.
std::size_t update_edge_proxies(const EpmfProblem& problem, const RowMatrix& log_user,
                                const RowMatrix& log_host, const RowMatrix& log_phi,
                                EdgeProxies& proxies);

/// sum_j E[Z_ijr] per user (row sweep).
RowMatrix user_evidence(const EpmfProblem& problem, const EdgeProxies& proxies, int latent_dim,
                        std::uint64_t* visits = nullptr);
/// sum_i E[Z_ijr] per host (column sweep).
RowMatrix host_evidence(const EpmfProblem& problem, const EdgeProxies& proxies, int latent_dim,
                        std::uint64_t* visits = nullptr);
/// sum_ij E[Z_ijl] per covariate pair, K x H.
RowMatrix phi_evidence(const EpmfProblem& problem, const EdgeProxies& proxies,
                       std::uint64_t* visits = nullptr);

/// Column sums of a block's means, accumulated in row order.
Eigen::VectorXd column_mean_sums(const GammaBlock& block);

/// xt_k * yt_h for every pair.
RowMatrix covariate_exposure(const EpmfProblem& problem);

/// ELBO contribution of a gamma block whose rows share a hyper-factor
/// zeta_row ~ Gamma(nu_row, xi_row), including the hyper-factor terms:
///   E[log p(x|zeta)] - E[log q(x)] + E[log p(zeta)] - E[log q(zeta)].
double gamma_block_elbo(const GammaBlock& block, std::span<const double> nu,
                        std::span<const double> xi, const GammaHierarchy& prior);
/// Same with one hyper-factor shared by every entry of the block.
double gamma_block_elbo_shared(const GammaBlock& block, double nu, double xi,
                               const GammaHierarchy& prior);

/// sum over edges of E_q[log p(N, Z | rates)] - E_q[log q(N, Z)], excluding
/// the -E[psi] terms, which the caller adds from the global sums.
double edge_elbo(const EpmfProblem& problem, const EdgeProxies& proxies, const RowMatrix& log_user,
                 const RowMatrix& log_host, const RowMatrix& log_phi);

double user_side_elbo(const UserSide& users, const GammaHierarchy& prior);
double host_side_elbo(const HostSide& hosts, const GammaHierarchy& beta_prior,
                      const GammaHierarchy& phi_prior);

/// edge_elbo minus the expected total rate
///   (sum_i E alpha_i)'(sum_j E beta_j) + sum_kh E phi_kh xt_k yt_h.
double likelihood_elbo(const EpmfProblem& problem, const EdgeProxies& proxies,
                       const UserSide& users, const HostSide& hosts);

/// True once the last two trace values differ by less than tol relative to
/// the last one.
bool elbo_converged(const std::vector<double>& values, double tol);

/// xi_i = c + sum_r E alpha_ir, one entry per row.
Eigen::VectorXd second_level_rate(const GammaBlock& block, double c);

}  // namespace linkpmf
