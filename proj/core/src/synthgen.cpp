#include "linkpmf/synthgen.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "linkpmf/checkpoint.hpp"
#include "linkpmf/random.hpp"

namespace linkpmf {

namespace {

std::uint64_t cell_stream(NodeId i, NodeId j) {
  return (static_cast<std::uint64_t>(i) << 32) | j;
}

double gamma_draw(double shape, double rate, CounterRng& rng) {
  return std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
}

LabelMap numbered_labels(char prefix, std::size_t n) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) labels.push_back(prefix + std::to_string(i));
  return LabelMap(std::move(labels));
}

}  // namespace

CovariateMatrix sample_covariates(std::size_t n_nodes, const std::vector<int>& levels,
                                  std::uint64_t seed, std::string_view label) {
  std::vector<CovariateGroup> groups;
  for (std::size_t g = 0; g < levels.size(); ++g) {
    if (levels[g] < 1) throw Error("a covariate group needs at least one level");
    CovariateGroup group{"g" + std::to_string(g), {}, 0};
    for (int l = 0; l < levels[g]; ++l) group.levels.push_back("l" + std::to_string(l));
    groups.push_back(std::move(group));
  }
  CounterRng rng(stream_key(seed, label));
  std::vector<std::vector<int>> assignment(n_nodes, std::vector<int>(levels.size()));
  for (std::size_t i = 0; i < n_nodes; ++i) {
    for (std::size_t g = 0; g < levels.size(); ++g) {
      assignment[i][g] = std::uniform_int_distribution<int>(0, levels[g] - 1)(rng);
    }
  }
  return CovariateMatrix::from_levels(std::move(groups), assignment);
}

GroundTruth sample_params(std::size_t n_users, std::size_t n_hosts, const CovariateDesign& design,
                          int latent_dim, const Hyperparameters& hyper, std::uint64_t seed) {
  if (latent_dim < 1) throw Error("latent dimension must be >= 1");
  GroundTruth truth;
  truth.seed = seed;
  truth.hyper = hyper;
  truth.hyper.latent_dim = latent_dim;
  truth.users = sample_covariates(n_users, design.user_levels, seed, "synth.covariates.users");
  truth.hosts = sample_covariates(n_hosts, design.host_levels, seed, "synth.covariates.hosts");

  auto draw_side = [&](std::size_t n, const GammaHierarchy& prior, std::string_view label,
                       RowMatrix& values, Eigen::VectorXd& zeta) {
    CounterRng rng(stream_key(seed, label));
    values.resize(static_cast<Eigen::Index>(n), latent_dim);
    zeta.resize(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      zeta[i] = gamma_draw(prior.b, prior.c, rng);
      for (int r = 0; r < latent_dim; ++r) values(i, r) = gamma_draw(prior.a, zeta[i], rng);
    }
  };
  draw_side(n_users, hyper.alpha, "synth.alpha", truth.params.alpha, truth.zeta_alpha);
  draw_side(n_hosts, hyper.beta, "synth.beta", truth.params.beta, truth.zeta_beta);

  CounterRng rng(stream_key(seed, "synth.phi"));
  const auto K = static_cast<Eigen::Index>(truth.users.n_covariates());
  const auto H = static_cast<Eigen::Index>(truth.hosts.n_covariates());
  truth.params.phi.resize(K, H);
  truth.zeta_phi = gamma_draw(hyper.phi.b, hyper.phi.c, rng);
  for (Eigen::Index k = 0; k < truth.params.phi.size(); ++k) {
    truth.params.phi.data()[k] = gamma_draw(hyper.phi.a, truth.zeta_phi, rng);
  }
  return truth;
}

SparseBipartiteGraph sample_graph(const PointParams& params, const CovariateMatrix& users,
                                  const CovariateMatrix& hosts, std::uint64_t seed) {
  const auto n_users = static_cast<std::size_t>(params.alpha.rows());
  const auto n_hosts = static_cast<std::size_t>(params.beta.rows());
  if (users.n_nodes() != n_users || hosts.n_nodes() != n_hosts) {
    throw DimensionError("sample_graph: covariates do not match the parameter dimensions");
  }
  const std::uint64_t key = stream_key(seed, "synth.graph");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n_users; ++i) {
    const auto ui = static_cast<NodeId>(i);
    for (std::size_t j = 0; j < n_hosts; ++j) {
      const auto uj = static_cast<NodeId>(j);
      const double psi = rate_value(params, ui, uj, users.active(i), hosts.active(j));
      if (psi <= 0) continue;
      CounterRng rng(key, cell_stream(ui, uj));
      if (rng.uniform() < -std::expm1(-psi)) edges.push_back({ui, uj});
    }
  }
  return SparseBipartiteGraph(numbered_labels('U', n_users), numbered_labels('H', n_hosts),
                              std::move(edges));
}

TemporalGraphSequence sample_seasonal_sequence(const PointParams& params,
                                               const SeasonalParams& seasonal,
                                               const CovariateMatrix& users,
                                               const CovariateMatrix& hosts,
                                               const PeriodMap& period_map, std::size_t n_snapshots,
                                               std::uint64_t seed) {
  if (n_snapshots < 1) throw Error("a sequence needs at least one snapshot");
  const auto n_users = static_cast<std::size_t>(params.alpha.rows());
  const auto n_hosts = static_cast<std::size_t>(params.beta.rows());
  if (seasonal.gamma.size() < static_cast<std::size_t>(period_map.period()) ||
      seasonal.delta.size() < static_cast<std::size_t>(period_map.period())) {
    throw DimensionError("seasonal adjustments have fewer segments than the period map");
  }
  SeasonalParams rates = seasonal;
  rates.base = params;
  rates.period_map = period_map;
  const LabelMap user_labels = numbered_labels('U', n_users);
  const LabelMap host_labels = numbered_labels('H', n_hosts);

  TemporalGraphSequence sequence;
  sequence.period_map = period_map;
  for (std::size_t t = 1; t <= n_snapshots; ++t) {
    const std::uint64_t key = mix64(stream_key(seed, "synth.seasonal") + mix64(t));
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n_users; ++i) {
      const auto ui = static_cast<NodeId>(i);
      for (std::size_t j = 0; j < n_hosts; ++j) {
        const auto uj = static_cast<NodeId>(j);
        const double psi =
            seasonal_rate(rates, ui, uj, static_cast<long>(t), users.active(i), hosts.active(j));
        if (psi <= 0) continue;
        CounterRng rng(key, cell_stream(ui, uj));
        if (rng.uniform() < -std::expm1(-psi)) edges.push_back({ui, uj});
      }
    }
    sequence.snapshots.emplace_back(user_labels, host_labels, std::move(edges));
  }
  return sequence;
}

void write_bundle(const std::string& directory, const GroundTruth& truth,
                  const SparseBipartiteGraph& graph, const SparseBipartiteGraph* test) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  const fs::path dir(directory);
  save_graph((dir / "graph.txt").string(), graph);
  if (test) save_graph((dir / "test.txt").string(), *test);
  {
    std::ofstream out(dir / "users.csv");
    write_covariates_csv(out, truth.users, graph.user_labels());
  }
  {
    std::ofstream out(dir / "hosts.csv");
    write_covariates_csv(out, truth.hosts, graph.host_labels());
  }
  nlohmann::json doc = params_to_json(truth.params, truth.hyper, "ground-truth");
  doc["seed"] = truth.seed;
  doc["zeta_alpha"] = std::vector<double>(truth.zeta_alpha.data(),
                                          truth.zeta_alpha.data() + truth.zeta_alpha.size());
  doc["zeta_beta"] = std::vector<double>(truth.zeta_beta.data(),
                                         truth.zeta_beta.data() + truth.zeta_beta.size());
  doc["zeta_phi"] = truth.zeta_phi;
  write_json_file((dir / "truth.json").string(), doc);
}

}  // namespace linkpmf
