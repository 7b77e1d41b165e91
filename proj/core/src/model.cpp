#include "linkpmf/model.hpp"

#include <cmath>
#include <limits>

#include "linkpmf/special.hpp"

namespace linkpmf {

namespace {

void check_hierarchy(const GammaHierarchy& g, const char* name) {
  if (!(g.a > 0 && g.b > 0 && g.c > 0) || !std::isfinite(g.a) || !std::isfinite(g.b) ||
      !std::isfinite(g.c)) {
    throw Error(std::string("hyperparameters for ") + name + " must be positive and finite");
  }
}

void check_block(const RowMatrix& m, const char* name) {
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    const double v = m.data()[k];
    if (!(v >= 0) || !std::isfinite(v)) {
      throw Error(std::string(name) + " has a negative or non-finite entry at flat index " +
                  std::to_string(k));
    }
  }
}

}  // namespace

void Hyperparameters::validate() const {
  check_hierarchy(alpha, "alpha");
  check_hierarchy(beta, "beta");
  check_hierarchy(phi, "phi");
  check_hierarchy(gamma, "gamma");
  check_hierarchy(delta, "delta");
  if (latent_dim < 1) throw Error("latent dimension R must be >= 1");
}

void PointParams::validate() const {
  if (alpha.cols() != beta.cols()) {
    throw Error("alpha and beta have different latent dimensions");
  }
  check_block(alpha, "alpha");
  check_block(beta, "beta");
  check_block(phi, "phi");
}

RateDecomposition rate(const PointParams& params, NodeId user, NodeId host,
                       std::span<const NodeId> user_covariates,
                       std::span<const NodeId> host_covariates) {
  const auto R = static_cast<std::size_t>(params.latent_dim());
  const auto K = static_cast<std::size_t>(params.phi.rows());
  const auto H = static_cast<std::size_t>(params.phi.cols());
  if (user >= params.alpha.rows() || host >= params.beta.rows()) {
    throw DimensionError("rate: node index out of range");
  }
  RateDecomposition out;
  out.components.assign(R + K * H, 0.0);
  for (std::size_t r = 0; r < R; ++r) {
    const double a = params.alpha(user, r);
    const double b = params.beta(host, r);
    if (a < 0 || b < 0) throw Error("rate: negative latent feature");
    out.components[r] = a * b;
  }
  for (const NodeId k : user_covariates) {
    if (k >= K) throw DimensionError("rate: user covariate index out of range");
    for (const NodeId h : host_covariates) {
      if (h >= H) throw DimensionError("rate: host covariate index out of range");
      const double f = params.phi(k, h);
      if (f < 0) throw Error("rate: negative covariate effect");
      out.components[covariate_component(R, H, k, h)] = f;
    }
  }
  // Latent terms first, then covariate pairs in (k, h) order; rate_value
  // adds in the same order.
  double psi = 0.0;
  for (std::size_t r = 0; r < R; ++r) psi += out.components[r];
  for (const NodeId k : user_covariates) {
    for (const NodeId h : host_covariates) psi += out.components[covariate_component(R, H, k, h)];
  }
  out.psi = psi;
  return out;
}

double rate_value(const PointParams& params, NodeId user, NodeId host,
                  std::span<const NodeId> user_covariates, std::span<const NodeId> host_covariates) {
  const Eigen::Index R = params.alpha.cols();
  double psi = 0.0;
  for (Eigen::Index r = 0; r < R; ++r) psi += params.alpha(user, r) * params.beta(host, r);
  for (const NodeId k : user_covariates) {
    for (const NodeId h : host_covariates) psi += params.phi(k, h);
  }
  return psi;
}

double link_probability(double psi) { return -std::expm1(-psi); }

void check_dimensions(const SparseBipartiteGraph& graph, const PointParams& params,
                      const CovariateMatrix& user_covariates,
                      const CovariateMatrix& host_covariates) {
  auto fail = [](const std::string& what) { throw DimensionError(what); };
  if (static_cast<std::size_t>(params.alpha.rows()) != graph.n_users()) {
    fail("alpha has " + std::to_string(params.alpha.rows()) + " rows but the graph has " +
         std::to_string(graph.n_users()) + " users");
  }
  if (static_cast<std::size_t>(params.beta.rows()) != graph.n_hosts()) {
    fail("beta has " + std::to_string(params.beta.rows()) + " rows but the graph has " +
         std::to_string(graph.n_hosts()) + " hosts");
  }
  if (params.alpha.cols() != params.beta.cols()) fail("alpha and beta latent dimensions differ");
  if (user_covariates.n_nodes() != graph.n_users()) fail("user covariate rows do not match users");
  if (host_covariates.n_nodes() != graph.n_hosts()) fail("host covariate rows do not match hosts");
  if (static_cast<std::size_t>(params.phi.rows()) != user_covariates.n_covariates() ||
      static_cast<std::size_t>(params.phi.cols()) != host_covariates.n_covariates()) {
    fail("phi is " + std::to_string(params.phi.rows()) + " x " + std::to_string(params.phi.cols()) +
         " but covariates give " + std::to_string(user_covariates.n_covariates()) + " x " +
         std::to_string(host_covariates.n_covariates()));
  }
}

LogLikelihood sparse_log_likelihood(const SparseBipartiteGraph& graph, const PointParams& params,
                                    const CovariateMatrix& user_covariates,
                                    const CovariateMatrix& host_covariates) {
  check_dimensions(graph, params, user_covariates, host_covariates);
  LogLikelihood out;
  const auto edges = graph.edges();
  std::vector<double> terms(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& edge = edges[e];
    const double psi = rate_value(params, edge.user, edge.host, user_covariates.active(edge.user),
                                  host_covariates.active(edge.host));
    if (!(psi > 0)) {
      out.value = -std::numeric_limits<double>::infinity();
      out.zero_rate_edge = edge;
      return out;
    }
    terms[e] = log_expm1(psi);
  }
  const double edge_part = pairwise_sum(terms);

  const Eigen::Index R = params.alpha.cols();
  double latent_part = 0.0;
  std::vector<double> column(std::max<std::size_t>(graph.n_users(), graph.n_hosts()));
  for (Eigen::Index r = 0; r < R; ++r) {
    for (std::size_t i = 0; i < graph.n_users(); ++i) column[i] = params.alpha(i, r);
    const double sa = pairwise_sum(std::span(column.data(), graph.n_users()));
    for (std::size_t j = 0; j < graph.n_hosts(); ++j) column[j] = params.beta(j, r);
    const double sb = pairwise_sum(std::span(column.data(), graph.n_hosts()));
    latent_part += sa * sb;
  }

  const auto xt = user_covariates.column_sums();
  const auto yt = host_covariates.column_sums();
  double covariate_part = 0.0;
  for (std::size_t k = 0; k < xt.size(); ++k) {
    for (std::size_t h = 0; h < yt.size(); ++h) covariate_part += params.phi(k, h) * xt[k] * yt[h];
  }
  out.value = edge_part - latent_part - covariate_part;
  return out;
}

}  // namespace linkpmf
