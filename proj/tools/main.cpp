#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"
#include "linkpmf/common.hpp"

namespace {

using namespace linkpmf::cli;

void add_fit_flags(CLI::App* cmd, FitFlags& f) {
  cmd->add_option("--config", f.config, "JSON fit configuration")->check(CLI::ExistingFile);
  cmd->add_option("--R", f.latent_dim, "Latent dimension")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", f.max_iter, "Maximum sweeps")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", f.tol, "Relative ELBO tolerance")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--threads", f.threads, "Worker threads (0 = default)");
}

void add_covariate_flags(CLI::App* cmd, Inputs& in) {
  cmd->add_option("--users", in.users, "User covariate CSV")->check(CLI::ExistingFile);
  cmd->add_option("--hosts", in.hosts, "Host covariate CSV")->check(CLI::ExistingFile);
}

void add_scorer_flags(CLI::App* cmd, ScorerArgs& s) {
  cmd->add_option("--scorer", s.name, "epmf, pmf, sepmf, jepmf, gibbs, degree, tsvd or tkatz");
  cmd->add_option("--checkpoint", s.checkpoint, "checkpoint.json written by train")->check(CLI::ExistingFile);
  cmd->add_option("--mc-draws", s.mc_draws, "Monte Carlo draws instead of the plug-in score");
  cmd->add_option("--window", s.window, "sepmf day window DAY or FIRST:LAST (default: next day)");
  cmd->add_option("--joint-graph", s.joint_graph, "Which jepmf graph to score (a or b)");
  cmd->add_option("--rank", s.rank, "tSVD/tKatz rank")->check(CLI::PositiveNumber);
  cmd->add_option("--eta", s.eta, "tKatz damping");
  cmd->add_option("--svd-method", s.svd_method, "randomized or lanczos");
  cmd->add_option("--gibbs-samples", s.gibbs_samples, "Gibbs iterations including burn-in");
  cmd->add_option("--burn-in", s.burn_in, "Gibbs burn-in");
  cmd->add_option("--thin", s.thin, "Gibbs thinning");
}

std::vector<std::string> collect_argv(int argc, char** argv) { return {argv, argv + argc}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Link prediction for bipartite authentication graphs"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Fit a model and write a checkpoint");
  train_cmd->add_option("--graph", train.inputs.graph, "Training edge list")->check(CLI::ExistingFile);
  add_covariate_flags(train_cmd, train.inputs);
  train_cmd->add_option("--variant", train.variant, "epmf, pmf, sepmf or jepmf");
  train_cmd->add_option("--sequence", train.sequence, "Snapshot directory (sepmf)")->check(CLI::ExistingDirectory);
  train_cmd->add_option("--graph-b", train.graph_b, "Second edge list (jepmf)")->check(CLI::ExistingFile);
  train_cmd->add_option("--hosts-b", train.hosts_b, "Host covariates of the second graph")->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train.out, "Output directory")->required();
  add_fit_flags(train_cmd, train.fit);

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Score pairs with a trained model or baseline");
  score_cmd->add_option("--train", score.inputs.graph, "Training edge list")->required()->check(CLI::ExistingFile);
  add_covariate_flags(score_cmd, score.inputs);
  add_scorer_flags(score_cmd, score.scorer);
  score_cmd->add_option("--pairs", score.pairs, "CSV of user,host pairs")->check(CLI::ExistingFile);
  score_cmd->add_option("--test", score.test, "Test edge list; scores positives plus sampled negatives")
      ->check(CLI::ExistingFile);
  score_cmd->add_option("--category", score.category, "all, new, cold-user or cold-host");
  score_cmd->add_option("--ratio", score.ratio, "Negatives per positive");
  score_cmd->add_flag("--exclude-train-edges", score.exclude_train_edges, "Skip training edges as negatives");
  score_cmd->add_option("--out", score.out, "Output CSV (default: stdout)");
  add_fit_flags(score_cmd, score.fit);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "AUC and ROC per pair category");
  eval_cmd->add_option("--train", eval.inputs.graph, "Training edge list")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--test", eval.test, "Test edge list")->required()->check(CLI::ExistingFile);
  add_covariate_flags(eval_cmd, eval.inputs);
  add_scorer_flags(eval_cmd, eval.scorer);
  eval_cmd->add_option("--categories", eval.categories, "Pair categories")->delimiter(',');
  eval_cmd->add_option("--ratio", eval.ratio, "Negatives per positive");
  eval_cmd->add_flag("--exclude-train-edges", eval.exclude_train_edges, "Skip training edges as negatives");
  eval_cmd->add_flag("--full", eval.full, "Use every eligible negative");
  eval_cmd->add_option("--repeats", eval.repeats, "Resamples per ratio for the stability table");
  eval_cmd->add_option("--ratios", eval.stability_ratios, "Ratios for the stability table")->delimiter(',');
  eval_cmd->add_option("--out", eval.out, "Output directory")->required();
  add_fit_flags(eval_cmd, eval.fit);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Sample synthetic graphs from the generative model");
  sim_cmd->add_option("--n-users", sim.n_users, "Users");
  sim_cmd->add_option("--n-hosts", sim.n_hosts, "Hosts");
  sim_cmd->add_option("--user-levels", sim.user_levels, "Levels per user covariate group")->delimiter(',');
  sim_cmd->add_option("--host-levels", sim.host_levels, "Levels per host covariate group")->delimiter(',');
  sim_cmd->add_flag("!--no-test", sim.test, "Skip the independent test graph");
  sim_cmd->add_option("--snapshots", sim.snapshots, "Also write this many daily snapshots");
  sim_cmd->add_option("--period-map", sim.period_map, "modular:P or lanl4:<weekday>:<friday>");
  sim_cmd->add_option("--segment-scale", sim.segment_scale, "Per-segment user rate scale")->delimiter(',');
  sim_cmd->add_option("--out", sim.out, "Output directory")->required();
  add_fit_flags(sim_cmd, sim.fit);

  ScreeArgs scree;
  auto* scree_cmd = app.add_subcommand("scree", "Leading singular values of a graph");
  scree_cmd->add_option("--graph", scree.graph, "Edge list")->required()->check(CLI::ExistingFile);
  scree_cmd->add_option("--max-rank", scree.max_rank, "Number of values")->check(CLI::PositiveNumber);
  scree_cmd->add_option("--svd-method", scree.method, "randomized or lanczos");
  scree_cmd->add_option("--seed", scree.seed, "Random seed");
  scree_cmd->add_option("--out", scree.out, "Output CSV (default: stdout)");

  AblateArgs ablate;
  auto* ablate_cmd = app.add_subcommand("ablate", "AUC change from dropping each covariate group");
  ablate_cmd->add_option("--train", ablate.inputs.graph, "Training edge list")->required()->check(CLI::ExistingFile);
  ablate_cmd->add_option("--test", ablate.test, "Test edge list")->required()->check(CLI::ExistingFile);
  add_covariate_flags(ablate_cmd, ablate.inputs);
  ablate_cmd->add_option("--category", ablate.category, "Pair category");
  ablate_cmd->add_option("--ratio", ablate.ratio, "Negatives per positive");
  ablate_cmd->add_option("--out", ablate.out, "Output JSON");
  add_fit_flags(ablate_cmd, ablate.fit);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Turn an authentication log into graphs");
  ingest_cmd->add_option("--events", ingest.events, "CSV or JSON-lines log")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--host-field", ingest.host_field, "auto, source or loghost");
  ingest_cmd->add_option("--train-end", ingest.train_end, "End of the training window (seconds)");
  ingest_cmd->add_option("--test-end", ingest.test_end, "End of the test window (seconds)");
  ingest_cmd->add_option("--origin", ingest.origin, "Start of day 1 (seconds)");
  ingest_cmd->add_option("--days", ingest.days, "Number of daily snapshots");
  ingest_cmd->add_option("--period-map", ingest.period_map, "modular:P or lanl4:<weekday>:<friday>");
  ingest_cmd->add_option("--out", ingest.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  const auto args = collect_argv(argc, argv);
  try {
    if (*train_cmd) return run_train(train, args);
    if (*score_cmd) return run_score(score);
    if (*eval_cmd) return run_eval(eval, args);
    if (*sim_cmd) return run_simulate(sim, args);
    if (*scree_cmd) return run_scree(scree);
    if (*ablate_cmd) return run_ablate(ablate);
    if (*ingest_cmd) return run_ingest(ingest);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
