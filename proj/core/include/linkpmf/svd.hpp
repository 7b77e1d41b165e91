#pragma once

#include <cstdint>

#include "linkpmf/common.hpp"
#include "linkpmf/graph.hpp"

namespace linkpmf {

enum class SvdMethod {
  kRandomized,  // range finder + power iterations
  kLanczos,     // Golub-Kahan bidiagonalisation with full reorthogonalisation
};

struct SvdOptions {
  SvdMethod method = SvdMethod::kRandomized;
  int power_iterations = 2;
  int oversampling = 10;
  std::uint64_t seed = 0;
  double tolerance = 1e-10;  // Lanczos residual, relative to d_1
  int max_steps = 0;         // Lanczos Krylov size cap; 0 = min(n_users, n_hosts)
};

struct TruncatedSvd {
  Eigen::VectorXd values;  // decreasing
  Eigen::MatrixXd left;    // n_users x R
  Eigen::MatrixXd right;   // n_hosts x R
  /// max_r max(|A v_r - d_r u_r|, |A' u_r - d_r v_r|) / max(d_1, 1).
  double residual = 0.0;
};

/// Thrown when the Lanczos iteration cannot reach the residual tolerance.
class SvdNotConverged : public Error {
 public:
  SvdNotConverged(const std::string& what, double residual) : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Rank-R truncated SVD of the binary adjacency. Requires R <= min(|U|, |V|).
TruncatedSvd truncated_svd(const SparseBipartiteGraph& graph, int rank, const SvdOptions& options = {});

/// Top `max_rank` singular values, decreasing (scree plot input).
Eigen::VectorXd scree(const SparseBipartiteGraph& graph, int max_rank, const SvdOptions& options = {});

}  // namespace linkpmf
