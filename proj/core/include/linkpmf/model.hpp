#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "linkpmf/common.hpp"
#include "linkpmf/covariates.hpp"
#include "linkpmf/graph.hpp"

namespace linkpmf {

/// x ~ Gamma(a, zeta), zeta ~ Gamma(b, c); shape/rate parameterisation.
struct GammaHierarchy {
  double a = 1.0;
  double b = 1.0;
  double c = 0.1;
};

struct Hyperparameters {
  GammaHierarchy alpha;
  GammaHierarchy beta;
  GammaHierarchy phi;
  GammaHierarchy gamma;  // seasonal user adjustments
  GammaHierarchy delta;  // seasonal host adjustments
  int latent_dim = 20;

  /// Throws Error unless every parameter is strictly positive and R >= 1.
  void validate() const;
};

/// Point values of the rate parameters.
struct PointParams {
  RowMatrix alpha;  // n_users x R
  RowMatrix beta;   // n_hosts x R
  RowMatrix phi;    // K x H

  int latent_dim() const noexcept { return static_cast<int>(alpha.cols()); }
  std::size_t n_covariate_pairs() const noexcept { return static_cast<std::size_t>(phi.size()); }
  /// Throws Error on a negative or non-finite entry or mismatched R.
  void validate() const;
};

/// Component index of covariate pair (k, h): l = R + k * H + h (0-based).
constexpr std::size_t covariate_component(std::size_t latent_dim, std::size_t n_host_covariates,
                                          std::size_t k, std::size_t h) noexcept {
  return latent_dim + k * n_host_covariates + h;
}

/// Poisson rate of one cell split into its R + K*H additive components.
struct RateDecomposition {
  double psi = 0.0;
  std::vector<double> components;
};

/// psi_ij = alpha_i . beta_j + sum_{k,h} phi_kh x_ik y_jh. Throws Error on
/// negative parameters, DimensionError on inconsistent covariates.
RateDecomposition rate(const PointParams& params, NodeId user, NodeId host,
                       std::span<const NodeId> user_covariates,
                       std::span<const NodeId> host_covariates);

/// psi_ij only; same summation order as `rate`.
double rate_value(const PointParams& params, NodeId user, NodeId host,
                  std::span<const NodeId> user_covariates, std::span<const NodeId> host_covariates);

/// P(A_ij = 1) = 1 - exp(-psi).
double link_probability(double psi);

struct LogLikelihood {
  double value = 0.0;
  /// Set when an observed edge has psi = 0; `value` is then -infinity.
  std::optional<Edge> zero_rate_edge;
};

/// Bernoulli-Poisson log-likelihood evaluated over observed edges plus the
/// global rate sums:
///   sum_{A_ij=1} log(e^psi_ij - 1) - (sum_i alpha_i)'(sum_j beta_j) - sum_kh phi_kh xt_k yt_h
LogLikelihood sparse_log_likelihood(const SparseBipartiteGraph& graph, const PointParams& params,
                                    const CovariateMatrix& user_covariates,
                                    const CovariateMatrix& host_covariates);

/// Throws DimensionError unless params, graph and covariates agree.
void check_dimensions(const SparseBipartiteGraph& graph, const PointParams& params,
                      const CovariateMatrix& user_covariates,
                      const CovariateMatrix& host_covariates);

}  // namespace linkpmf
