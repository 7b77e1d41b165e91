#include "linkpmf/scorers.hpp"

#include <cmath>
#include <random>

#include "linkpmf/random.hpp"

namespace linkpmf {

double score_plugin(const PointParams& params, NodeId user, NodeId host,
                    const CovariateMatrix& user_covariates, const CovariateMatrix& host_covariates) {
  return link_probability(
      rate_value(params, user, host, user_covariates.active(user), host_covariates.active(host)));
}

double score_montecarlo(const VariationalState& state, NodeId user, NodeId host,
                        const CovariateMatrix& user_covariates,
                        const CovariateMatrix& host_covariates, int draws, std::uint64_t seed) {
  if (draws < 1) throw Error("Monte Carlo score needs at least one draw");
  const int R = state.latent_dim();
  const auto& alpha = state.users.alpha;
  const auto& beta = state.hosts.beta;
  const auto& phi = state.hosts.phi;
  const auto ucov = user_covariates.active(user);
  const auto hcov = host_covariates.active(host);
  CounterRng rng(stream_key(seed, "score.montecarlo"),
                 (static_cast<std::uint64_t>(user) << 32) | host);
  auto draw = [&rng](double shape, double rate) {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
  };
  std::vector<double> survival(static_cast<std::size_t>(draws));
  for (int m = 0; m < draws; ++m) {
    double psi = 0.0;
    for (int r = 0; r < R; ++r) {
      psi += draw(alpha.shape(user, r), alpha.rate(user, r)) *
             draw(beta.shape(host, r), beta.rate(host, r));
    }
    for (const NodeId k : ucov) {
      for (const NodeId h : hcov) psi += draw(phi.shape(k, h), phi.rate(k, h));
    }
    survival[static_cast<std::size_t>(m)] = std::exp(-psi);
  }
  return 1.0 - pairwise_sum(survival) / draws;
}

PlugInScorer::PlugInScorer(PointParams params, const CovariateMatrix& users,
                           const CovariateMatrix& hosts, std::string name)
    : params_(std::move(params)), users_(&users), hosts_(&hosts), name_(std::move(name)) {}

double PlugInScorer::score(NodeId user, NodeId host) const {
  return score_plugin(params_, user, host, *users_, *hosts_);
}

MonteCarloScorer::MonteCarloScorer(VariationalState state, const CovariateMatrix& users,
                                   const CovariateMatrix& hosts, int draws, std::uint64_t seed)
    : state_(std::move(state)), users_(&users), hosts_(&hosts), draws_(draws), seed_(seed) {}

double MonteCarloScorer::score(NodeId user, NodeId host) const {
  return score_montecarlo(state_, user, host, *users_, *hosts_, draws_, seed_);
}

Eigen::VectorXd mean_latent_feature(const PointParams& params, Side side,
                                    const std::vector<bool>& exclude) {
  const RowMatrix& m = side == Side::kUser ? params.alpha : params.beta;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(m.cols());
  double count = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (static_cast<std::size_t>(i) < exclude.size() && exclude[static_cast<std::size_t>(i)]) continue;
    sum += m.row(i).transpose();
    count += 1.0;
  }
  return count > 0 ? Eigen::VectorXd(sum / count) : sum;
}

double cold_start_score(const PointParams& params, Side new_node_side,
                        std::span<const NodeId> new_node_covariates, NodeId counterpart,
                        const CovariateMatrix& counterpart_covariates,
                        const Eigen::VectorXd& mean_feature) {
  const auto cp_covs = counterpart_covariates.active(counterpart);
  double psi = 0.0;
  if (new_node_side == Side::kUser) {
    psi = mean_feature.dot(params.beta.row(counterpart).transpose());
    for (const NodeId k : new_node_covariates) {
      for (const NodeId h : cp_covs) psi += params.phi(k, h);
    }
  } else {
    psi = mean_feature.dot(params.alpha.row(counterpart).transpose());
    for (const NodeId k : cp_covs) {
      for (const NodeId h : new_node_covariates) psi += params.phi(k, h);
    }
  }
  return link_probability(psi);
}

ColdStartScorer::ColdStartScorer(const PointParams& params, const CovariateMatrix& users,
                                 const CovariateMatrix& hosts, std::vector<bool> new_users,
                                 std::vector<bool> new_hosts, std::string name)
    : params_(params),
      users_(&users),
      hosts_(&hosts),
      new_users_(std::move(new_users)),
      new_hosts_(std::move(new_hosts)),
      name_(std::move(name)) {
  new_users_.resize(static_cast<std::size_t>(params_.alpha.rows()), false);
  new_hosts_.resize(static_cast<std::size_t>(params_.beta.rows()), false);
  mean_user_ = mean_latent_feature(params_, Side::kUser, new_users_);
  mean_host_ = mean_latent_feature(params_, Side::kHost, new_hosts_);
}

double ColdStartScorer::score(NodeId user, NodeId host) const {
  const Eigen::VectorXd a = new_users_[user] ? mean_user_ : Eigen::VectorXd(params_.alpha.row(user).transpose());
  const Eigen::VectorXd b = new_hosts_[host] ? mean_host_ : Eigen::VectorXd(params_.beta.row(host).transpose());
  double psi = a.dot(b);
  for (const NodeId k : users_->active(user)) {
    for (const NodeId h : hosts_->active(host)) psi += params_.phi(k, h);
  }
  return link_probability(psi);
}

GibbsScorer::GibbsScorer(PosteriorSamples samples, const CovariateMatrix& users,
                         const CovariateMatrix& hosts)
    : samples_(std::move(samples)), users_(&users), hosts_(&hosts) {}

double GibbsScorer::score(NodeId user, NodeId host) const {
  return posterior_mean_link_probability(samples_, user, host, *users_, *hosts_);
}

SeasonalWindowScorer::SeasonalWindowScorer(SeasonalParams params, const CovariateMatrix& users,
                                           const CovariateMatrix& hosts, long first_day,
                                           long last_day)
    : params_(std::move(params)), users_(&users), hosts_(&hosts) {
  if (first_day < 1 || last_day < first_day) throw Error("invalid scoring window");
  segment_days_.assign(static_cast<std::size_t>(params_.period_map.period()), 0.0);
  for (long t = first_day; t <= last_day; ++t) {
    segment_days_[static_cast<std::size_t>(params_.period_map.segment(t) - 1)] += 1.0;
  }
}

double SeasonalWindowScorer::score(NodeId user, NodeId host) const {
  const auto& base = params_.base;
  double psi = 0.0;
  double days = 0.0;
  for (std::size_t p = 0; p < segment_days_.size(); ++p) {
    if (segment_days_[p] == 0.0) continue;
    double latent = 0.0;
    for (Eigen::Index r = 0; r < base.alpha.cols(); ++r) {
      latent += base.alpha(user, r) * params_.gamma[p](user, r) * base.beta(host, r) *
                params_.delta[p](host, r);
    }
    psi += segment_days_[p] * latent;
    days += segment_days_[p];
  }
  double covariate = 0.0;
  for (const NodeId k : users_->active(user)) {
    for (const NodeId h : hosts_->active(host)) covariate += base.phi(k, h);
  }
  return link_probability(psi + days * covariate);
}

DegreeScorer::DegreeScorer(const SparseBipartiteGraph& train)
    : out_degree_(train.n_users()), in_degree_(train.n_hosts()) {
  for (std::size_t i = 0; i < train.n_users(); ++i) {
    out_degree_[i] = static_cast<double>(train.user_degree(static_cast<NodeId>(i)));
  }
  for (std::size_t j = 0; j < train.n_hosts(); ++j) {
    in_degree_[j] = static_cast<double>(train.host_degree(static_cast<NodeId>(j)));
  }
}

double DegreeScorer::score(NodeId user, NodeId host) const {
  return link_probability(out_degree_.at(user) * in_degree_.at(host));
}

double katz_transform(double singular_value, double eta) {
  const double x = eta * singular_value;
  if (!(x < 1.0)) {
    throw Error("tKatz transform diverges: eta * d = " + std::to_string(x) + " >= 1");
  }
  return x / (1.0 - x);
}

SpectralScorer::SpectralScorer(TruncatedSvd svd, Eigen::VectorXd weights, std::string name)
    : svd_(std::move(svd)), weights_(std::move(weights)), name_(std::move(name)) {}

double SpectralScorer::score(NodeId user, NodeId host) const {
  double s = 0.0;
  for (Eigen::Index r = 0; r < weights_.size(); ++r) {
    s += weights_[r] * svd_.left(user, r) * svd_.right(host, r);
  }
  return s;
}

SpectralScorer SpectralScorer::tsvd(const SparseBipartiteGraph& train, int rank,
                                    const SvdOptions& options) {
  TruncatedSvd svd = truncated_svd(train, rank, options);
  Eigen::VectorXd weights = svd.values;
  return SpectralScorer(std::move(svd), std::move(weights), "tsvd");
}

SpectralScorer SpectralScorer::tkatz(const SparseBipartiteGraph& train, int rank, double eta,
                                     const SvdOptions& options) {
  TruncatedSvd svd = truncated_svd(train, rank, options);
  Eigen::VectorXd weights(svd.values.size());
  for (Eigen::Index r = 0; r < weights.size(); ++r) weights[r] = katz_transform(svd.values[r], eta);
  return SpectralScorer(std::move(svd), std::move(weights), "tkatz");
}

}  // namespace linkpmf
