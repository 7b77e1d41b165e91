#include "linkpmf/svd.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SVD>
#include <Eigen/SparseCore>

#include "linkpmf/random.hpp"

namespace linkpmf {

namespace {

using Sparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

Sparse adjacency(const SparseBipartiteGraph& graph) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(graph.nnz());
  for (const Edge& e : graph.edges()) triplets.emplace_back(e.user, e.host, 1.0);
  Sparse a(static_cast<Eigen::Index>(graph.n_users()), static_cast<Eigen::Index>(graph.n_hosts()));
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
}

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  CounterRng rng(stream_key(seed, "svd.sketch"));
  std::normal_distribution<double> normal;
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) out(r, c) = normal(rng);
  }
  return out;
}

double residual_of(const Sparse& a, const TruncatedSvd& svd) {
  double worst = 0.0;
  for (Eigen::Index r = 0; r < svd.values.size(); ++r) {
    const double d = svd.values[r];
    worst = std::max(worst, (a * svd.right.col(r) - d * svd.left.col(r)).norm());
    worst = std::max(worst, (a.transpose() * svd.left.col(r) - d * svd.right.col(r)).norm());
  }
  const double scale = svd.values.size() ? std::max(svd.values[0], 1.0) : 1.0;
  return worst / scale;
}

// Fixes the sign of each singular pair so the largest-magnitude entry of the
// left vector is positive; makes outputs reproducible across methods.
void canonical_signs(TruncatedSvd& svd) {
  for (Eigen::Index r = 0; r < svd.values.size(); ++r) {
    Eigen::Index at = 0;
    svd.left.col(r).cwiseAbs().maxCoeff(&at);
    if (svd.left(at, r) < 0) {
      svd.left.col(r) *= -1.0;
      svd.right.col(r) *= -1.0;
    }
  }
}

TruncatedSvd randomized(const Sparse& a, int rank, const SvdOptions& options) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  const Eigen::Index k = std::min<Eigen::Index>(rank + options.oversampling, std::min(m, n));
  Eigen::MatrixXd q = orthonormal_basis(a * gaussian(n, k, options.seed));
  for (int it = 0; it < options.power_iterations; ++it) {
    const Eigen::MatrixXd z = orthonormal_basis(a.transpose() * q);
    q = orthonormal_basis(a * z);
  }
  const Eigen::MatrixXd b = (a.transpose() * q).transpose();  // k x n
  Eigen::JacobiSVD<Eigen::MatrixXd> small(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  TruncatedSvd out;
  out.values = small.singularValues().head(rank);
  out.left = q * small.matrixU().leftCols(rank);
  out.right = small.matrixV().leftCols(rank);
  return out;
}

TruncatedSvd lanczos(const Sparse& a, int rank, const SvdOptions& options) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  const Eigen::Index limit = std::min(m, n);
  const Eigen::Index max_steps =
      options.max_steps > 0 ? std::min<Eigen::Index>(options.max_steps, limit) : limit;
  if (max_steps < rank) {
    throw SvdNotConverged("Lanczos step cap is below the requested rank", INFINITY);
  }
  CounterRng rng(stream_key(options.seed, "svd.lanczos"));
  std::normal_distribution<double> normal;
  auto random_unit_orthogonal = [&](const Eigen::MatrixXd& basis, Eigen::Index used, Eigen::Index dim) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::VectorXd v(dim);
      for (Eigen::Index i = 0; i < dim; ++i) v[i] = normal(rng);
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index c = 0; c < used; ++c) v -= basis.col(c).dot(v) * basis.col(c);
      }
      const double norm = v.norm();
      if (norm > 1e-8) return Eigen::VectorXd(v / norm);
    }
    return Eigen::VectorXd(Eigen::VectorXd::Zero(dim));
  };

  Eigen::MatrixXd U(m, max_steps);
  Eigen::MatrixXd V(n, max_steps);
  Eigen::VectorXd alpha(max_steps);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(max_steps);
  V.col(0) = random_unit_orthogonal(V, 0, n);
  const double breakdown = 1e-12 * std::sqrt(static_cast<double>(a.nonZeros()) + 1.0);

  TruncatedSvd out;
  Eigen::Index steps = 0;
  double estimate = INFINITY;
  for (Eigen::Index s = 0; s < max_steps; ++s) {
    Eigen::VectorXd u = a * V.col(s);
    if (s > 0) u -= beta[s - 1] * U.col(s - 1);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index c = 0; c < s; ++c) u -= U.col(c).dot(u) * U.col(c);
    }
    alpha[s] = u.norm();
    if (alpha[s] > breakdown) {
      U.col(s) = u / alpha[s];
    } else {
      alpha[s] = 0.0;
      U.col(s) = random_unit_orthogonal(U, s, m);
    }
    Eigen::VectorXd v = a.transpose() * U.col(s) - alpha[s] * V.col(s);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index c = 0; c <= s; ++c) v -= V.col(c).dot(v) * V.col(c);
    }
    steps = s + 1;
    beta[s] = v.norm();
    const bool last = steps == max_steps;
    if (!last) {
      if (beta[s] > breakdown) {
        V.col(s + 1) = v / beta[s];
      } else {
        beta[s] = 0.0;
        V.col(s + 1) = random_unit_orthogonal(V, s + 1, n);
      }
    }
    if (steps < rank || (!last && (steps - rank) % 8 != 0)) continue;

    // Upper bidiagonal B_s with A V_s = U_s B_s.
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(steps, steps);
    for (Eigen::Index c = 0; c < steps; ++c) {
      b(c, c) = alpha[c];
      if (c + 1 < steps) b(c, c + 1) = beta[c];
    }
    Eigen::BDCSVD<Eigen::MatrixXd> small(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
    // A' U_s = V_s B_s' + beta_s v_{s+1} e_s', so the residual of pair r is
    // beta_s |last entry of the r-th left singular vector of B_s|.
    estimate = 0.0;
    for (int r = 0; r < rank; ++r) {
      estimate = std::max(estimate, beta[s] * std::abs(small.matrixU()(steps - 1, r)));
    }
    const double scale = std::max(small.singularValues()[0], 1.0);
    if (last || estimate <= options.tolerance * scale) {
      out.values = small.singularValues().head(rank);
      out.left = U.leftCols(steps) * small.matrixU().leftCols(rank);
      out.right = V.leftCols(steps) * small.matrixV().leftCols(rank);
      break;
    }
  }
  out.residual = residual_of(a, out);
  const double scale = std::max(out.values.size() ? out.values[0] : 0.0, 1.0);
  if (!(out.residual <= std::max(options.tolerance, 1e-12) * 10.0) || !std::isfinite(estimate)) {
    throw SvdNotConverged("Lanczos bidiagonalisation did not converge after " +
                              std::to_string(steps) + " steps (residual " +
                              std::to_string(out.residual * scale) + ")",
                          out.residual);
  }
  return out;
}

}  // namespace

TruncatedSvd truncated_svd(const SparseBipartiteGraph& graph, int rank, const SvdOptions& options) {
  const auto limit = std::min(graph.n_users(), graph.n_hosts());
  if (rank < 1 || static_cast<std::size_t>(rank) > limit) {
    throw Error("SVD rank " + std::to_string(rank) + " must be in 1.." + std::to_string(limit));
  }
  const Sparse a = adjacency(graph);
  TruncatedSvd out =
      options.method == SvdMethod::kLanczos ? lanczos(a, rank, options) : randomized(a, rank, options);
  canonical_signs(out);
  out.residual = residual_of(a, out);
  return out;
}

Eigen::VectorXd scree(const SparseBipartiteGraph& graph, int max_rank, const SvdOptions& options) {
  return truncated_svd(graph, max_rank, options).values;
}

}  // namespace linkpmf
