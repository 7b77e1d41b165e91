#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace linkpmf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotConverged = 2;

/// Flags shared by every fitting subcommand. Unset optionals fall back to
/// the config file, then to the library defaults.
struct FitFlags {
  std::string config;
  std::optional<int> latent_dim;
  std::optional<int> max_iter;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  int threads = 0;
};

struct Inputs {
  std::string graph;
  std::string users;
  std::string hosts;
};

struct TrainArgs {
  FitFlags fit;
  Inputs inputs;
  std::string variant = "epmf";
  std::string sequence;
  std::string graph_b;
  std::string hosts_b;
  std::string out;
};

struct ScorerArgs {
  std::string name = "epmf";
  std::string checkpoint;
  int mc_draws = 0;
  std::string window;  // "first:last" for sepmf
  std::string joint_graph = "a";
  int rank = 20;
  double eta = 1e-4;
  std::string svd_method = "randomized";
  int gibbs_samples = 10000;
  int burn_in = 1000;
  int thin = 1;
};

struct ScoreArgs {
  FitFlags fit;
  Inputs inputs;  // graph = training graph
  ScorerArgs scorer;
  std::string pairs;
  std::string test;
  std::string category = "all";
  double ratio = 3.0;
  bool exclude_train_edges = false;
  std::string out;
};

struct EvalArgs {
  FitFlags fit;
  Inputs inputs;  // graph = training graph
  ScorerArgs scorer;
  std::string test;
  std::vector<std::string> categories{"all", "new"};
  double ratio = 3.0;
  bool exclude_train_edges = false;
  bool full = false;
  int repeats = 0;
  std::vector<double> stability_ratios{0.1, 1.0, 3.0};
  std::string out;
};

struct SimulateArgs {
  FitFlags fit;
  std::size_t n_users = 200;
  std::size_t n_hosts = 150;
  std::vector<int> user_levels;
  std::vector<int> host_levels;
  bool test = true;
  std::size_t snapshots = 0;
  std::string period_map = "modular:7";
  std::vector<double> segment_scale;
  std::string out;
};

struct ScreeArgs {
  std::string graph;
  int max_rank = 20;
  std::string method = "randomized";
  std::uint64_t seed = 0;
  std::string out;
};

struct AblateArgs {
  FitFlags fit;
  Inputs inputs;
  std::string test;
  std::string category = "all";
  double ratio = 3.0;
  std::string out;
};

struct IngestArgs {
  std::string events;
  std::string host_field = "auto";
  std::optional<std::int64_t> train_end;
  std::optional<std::int64_t> test_end;
  std::optional<std::int64_t> origin;
  std::size_t days = 0;
  std::string period_map = "modular:7";
  std::string out;
};

int run_train(const TrainArgs& args, const std::vector<std::string>& argv);
int run_score(const ScoreArgs& args);
int run_eval(const EvalArgs& args, const std::vector<std::string>& argv);
int run_simulate(const SimulateArgs& args, const std::vector<std::string>& argv);
int run_scree(const ScreeArgs& args);
int run_ablate(const AblateArgs& args);
int run_ingest(const IngestArgs& args);

}  // namespace linkpmf::cli
