#include "commands.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "linkpmf/checkpoint.hpp"
#include "linkpmf/evaluation.hpp"
#include "linkpmf/ingest.hpp"
#include "linkpmf/synthgen.hpp"

namespace linkpmf::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

FitConfig resolve_config(const FitFlags& flags) {
  FitConfig config;
  if (!flags.config.empty()) config = fit_config_from_json(read_json_file(flags.config));
  if (flags.latent_dim) config.hyper.latent_dim = *flags.latent_dim;
  if (flags.max_iter) config.options.max_iter = *flags.max_iter;
  if (flags.tol) config.options.tol = *flags.tol;
  if (flags.seed) config.options.seed = *flags.seed;
  if (flags.threads > 0) config.options.threads = flags.threads;
  config.hyper.validate();
  set_num_threads(config.options.threads);
  return config;
}

CovariateMatrix covariates_or_empty(const std::string& path, const LabelMap& labels) {
  if (path.empty()) return CovariateMatrix(labels.size());
  return load_covariates_csv(path, labels);
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void write_trace(const fs::path& path, const ElboTrace& trace) {
  auto out = open_output(path);
  out << "sweep,elbo\n";
  for (std::size_t k = 0; k < trace.values.size(); ++k) {
    out << (k + 1) << ',' << format_double(trace.values[k]) << '\n';
  }
}

json argv_json(const std::vector<std::string>& argv) { return json(argv); }

std::pair<long, long> parse_window(const std::string& spec, long fallback) {
  if (spec.empty()) return {fallback, fallback};
  const auto colon = spec.find(':');
  try {
    if (colon == std::string::npos) {
      const long day = std::stol(spec);
      return {day, day};
    }
    return {std::stol(spec.substr(0, colon)), std::stol(spec.substr(colon + 1))};
  } catch (const std::exception&) {
    throw Error("bad --window '" + spec + "'; expected DAY or FIRST:LAST");
  }
}

SvdOptions svd_options(const std::string& method, std::uint64_t seed) {
  SvdOptions options;
  options.seed = seed;
  if (method == "randomized") {
    options.method = SvdMethod::kRandomized;
  } else if (method == "lanczos") {
    options.method = SvdMethod::kLanczos;
  } else {
    throw Error("unknown SVD method '" + method + "'; expected randomized or lanczos");
  }
  return options;
}

void check_state_shape(const RowMatrix& alpha, const RowMatrix& beta, const SparseBipartiteGraph& g,
                       const std::string& checkpoint) {
  if (static_cast<std::size_t>(alpha.rows()) != g.n_users() ||
      static_cast<std::size_t>(beta.rows()) != g.n_hosts()) {
    throw DimensionError(checkpoint + " holds " + std::to_string(alpha.rows()) + " users x " +
                         std::to_string(beta.rows()) + " hosts, the graph has " +
                         std::to_string(g.n_users()) + " x " + std::to_string(g.n_hosts()));
  }
}

/// Owns whatever a scorer keeps references to.
struct ScorerBundle {
  CovariateMatrix users;
  CovariateMatrix hosts;
  std::unique_ptr<LinkScorer> scorer;
};

ScorerBundle make_scorer(const ScorerArgs& args, const FitConfig& config, const SparseBipartiteGraph& train,
                         const Inputs& inputs, const EvalSplit* split, PairCategory category) {
  ScorerBundle b{covariates_or_empty(inputs.users, train.user_labels()),
                 covariates_or_empty(inputs.hosts, train.host_labels()), nullptr};
  const std::string& name = args.name;
  const bool needs_checkpoint = name == "epmf" || name == "pmf" || name == "sepmf" || name == "jepmf";
  if (needs_checkpoint && args.checkpoint.empty()) {
    throw Error("scorer '" + name + "' needs --checkpoint");
  }
  if (name == "epmf" || name == "pmf") {
    const auto state = state_from_json(read_json_file(args.checkpoint));
    check_state_shape(state.users.alpha.shape, state.hosts.beta.shape, train, args.checkpoint);
    const auto params = point_estimates(state);
    check_dimensions(train, params, b.users, b.hosts);
    const bool cold = category == PairCategory::kColdStartUser || category == PairCategory::kColdStartHost;
    if (args.mc_draws > 0) {
      b.scorer = std::make_unique<MonteCarloScorer>(state, b.users, b.hosts, args.mc_draws, config.options.seed);
    } else if (cold && split) {
      b.scorer = std::make_unique<ColdStartScorer>(params, b.users, b.hosts, split->new_users,
                                                   split->new_hosts, name);
    } else {
      b.scorer = std::make_unique<PlugInScorer>(params, b.users, b.hosts, name);
    }
  } else if (name == "sepmf") {
    const auto doc = read_json_file(args.checkpoint);
    const auto params = seasonal_point_estimates(seasonal_state_from_json(doc));
    check_state_shape(params.base.alpha, params.base.beta, train, args.checkpoint);
    check_dimensions(train, params.base, b.users, b.hosts);
    const long next_day = doc.value("n_snapshots", 0L) + 1;
    const auto [first, last] = parse_window(args.window, next_day);
    b.scorer = std::make_unique<SeasonalWindowScorer>(params, b.users, b.hosts, first, last);
  } else if (name == "jepmf") {
    const auto joint = joint_point_estimates(joint_state_from_json(read_json_file(args.checkpoint)));
    if (args.joint_graph != "a" && args.joint_graph != "b") throw Error("--joint-graph must be a or b");
    const auto& params = args.joint_graph == "a" ? joint.graph_a : joint.graph_b;
    check_state_shape(params.alpha, params.beta, train, args.checkpoint);
    check_dimensions(train, params, b.users, b.hosts);
    b.scorer = std::make_unique<PlugInScorer>(params, b.users, b.hosts, "jepmf");
  } else if (name == "gibbs") {
    const EpmfProblem problem(train, b.users, b.hosts);
    GibbsOptions options;
    options.n_samples = args.gibbs_samples;
    options.burn_in = args.burn_in;
    options.thin = args.thin;
    options.seed = config.options.seed;
    b.scorer = std::make_unique<GibbsScorer>(run_chain(problem, config.hyper, options), b.users, b.hosts);
  } else if (name == "degree") {
    b.scorer = std::make_unique<DegreeScorer>(train);
  } else if (name == "tsvd") {
    b.scorer = std::make_unique<SpectralScorer>(
        SpectralScorer::tsvd(train, args.rank, svd_options(args.svd_method, config.options.seed)));
  } else if (name == "tkatz") {
    b.scorer = std::make_unique<SpectralScorer>(
        SpectralScorer::tkatz(train, args.rank, args.eta, svd_options(args.svd_method, config.options.seed)));
  } else {
    throw Error("unknown scorer '" + name + "'; expected epmf, pmf, sepmf, jepmf, gibbs, degree, tsvd or tkatz");
  }
  return b;
}

SparseBipartiteGraph load_test_like(const std::string& path, const SparseBipartiteGraph& train) {
  auto test = load_graph(path);
  if (test.user_labels() != train.user_labels() || test.host_labels() != train.host_labels()) {
    throw DimensionError(path + " does not share the training graph's node labels");
  }
  return test;
}

void write_roc(const fs::path& path, const AucResult& result) {
  auto out = open_output(path);
  out << "fpr,tpr\n";
  for (const auto& p : result.roc) out << format_double(p.fpr) << ',' << format_double(p.tpr) << '\n';
}

std::vector<int> design_levels(const CovariateMatrix& m) {
  std::vector<int> levels;
  for (const auto& g : m.groups()) levels.push_back(static_cast<int>(g.levels.size()));
  return levels;
}

}  // namespace

int run_train(const TrainArgs& args, const std::vector<std::string>& argv) {
  const auto config = resolve_config(args.fit);
  const fs::path out(args.out);
  fs::create_directories(out);
  json manifest{{"command", "train"},
                {"argv", argv_json(argv)},
                {"variant", args.variant},
                {"config", to_json(config)},
                {"inputs", {{"graph", args.inputs.graph},
                            {"users", args.inputs.users},
                            {"hosts", args.inputs.hosts},
                            {"sequence", args.sequence},
                            {"graph_b", args.graph_b},
                            {"hosts_b", args.hosts_b}}}};
  ElboTrace trace;

  if (args.variant == "epmf" || args.variant == "pmf") {
    if (args.inputs.graph.empty()) throw Error("train needs --graph");
    const auto graph = load_graph(args.inputs.graph);
    const bool covariates = args.variant == "epmf";
    const auto users = covariates_or_empty(covariates ? args.inputs.users : "", graph.user_labels());
    const auto hosts = covariates_or_empty(covariates ? args.inputs.hosts : "", graph.host_labels());
    const EpmfProblem problem(graph, users, hosts);
    auto result = fit(problem, config.hyper, config.options);
    trace = result.trace;
    write_json_file((out / "checkpoint.json").string(), state_to_json(result.state, config.hyper, args.variant));
    write_json_file((out / "params.json").string(),
                    params_to_json(point_estimates(result.state), config.hyper, args.variant));
  } else if (args.variant == "sepmf") {
    if (args.sequence.empty()) throw Error("the sepmf variant needs --sequence");
    const auto sequence = load_sequence(args.sequence);
    if (sequence.length() == 0) throw Error(args.sequence + " holds no snapshots");
    const auto& labels = sequence.snapshots.front();
    const auto users = covariates_or_empty(args.inputs.users, labels.user_labels());
    const auto hosts = covariates_or_empty(args.inputs.hosts, labels.host_labels());
    auto result = fit_seasonal(sequence, users, hosts, config.hyper, config.options);
    trace = result.trace;
    auto doc = seasonal_state_to_json(result.state, config.hyper);
    doc["n_snapshots"] = sequence.length();
    write_json_file((out / "checkpoint.json").string(), doc);
    write_json_file((out / "params.json").string(),
                    params_to_json(seasonal_point_estimates(result.state).base, config.hyper, "sepmf"));
  } else if (args.variant == "jepmf") {
    if (args.inputs.graph.empty() || args.graph_b.empty()) throw Error("the jepmf variant needs --graph and --graph-b");
    const auto a = load_graph(args.inputs.graph);
    const auto b = load_graph(args.graph_b);
    const auto users = covariates_or_empty(args.inputs.users, a.user_labels());
    const auto hosts_a = covariates_or_empty(args.inputs.hosts, a.host_labels());
    const auto hosts_b = covariates_or_empty(args.hosts_b, b.host_labels());
    const EpmfProblem pa(a, users, hosts_a), pb(b, users, hosts_b);
    auto result = fit_joint(pa, pb, config.hyper, config.options);
    trace = result.trace;
    const auto params = joint_point_estimates(result.state);
    write_json_file((out / "checkpoint.json").string(), joint_state_to_json(result.state, config.hyper));
    write_json_file((out / "params.json").string(), params_to_json(params.graph_a, config.hyper, "jepmf"));
    write_json_file((out / "params_b.json").string(), params_to_json(params.graph_b, config.hyper, "jepmf"));
  } else {
    throw Error("unknown variant '" + args.variant + "'; expected epmf, pmf, sepmf or jepmf");
  }

  write_trace(out / "trace.csv", trace);
  manifest["converged"] = trace.converged;
  manifest["iterations"] = trace.iterations;
  manifest["elbo"] = trace.values.empty() ? 0.0 : trace.values.back();
  write_json_file((out / "manifest.json").string(), manifest);
  std::cout << args.variant << ": " << trace.iterations << " sweeps, ELBO "
            << (trace.values.empty() ? 0.0 : trace.values.back())
            << (trace.converged ? ", converged\n" : ", NOT converged\n");
  if (!trace.converged) {
    std::cerr << "warning: no convergence within " << config.options.max_iter
              << " sweeps; checkpoint written anyway\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

int run_score(const ScoreArgs& args) {
  const auto config = resolve_config(args.fit);
  const auto train = load_graph(args.inputs.graph);
  const auto category = parse_category(args.category);
  std::optional<SparseBipartiteGraph> test;
  std::optional<EvalSplit> split;
  if (!args.test.empty()) {
    test = load_test_like(args.test, train);
    split = split_with_inferred_new_nodes(train, *test);
  }
  const auto bundle = make_scorer(args.scorer, config, train, args.inputs, split ? &*split : nullptr, category);

  std::vector<ScoredPair> pairs;
  if (!args.pairs.empty()) {
    std::ifstream in(args.pairs);
    if (!in) throw Error("cannot open " + args.pairs);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || (line_no == 1 && line == "user,host")) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) throw ParseError("expected user,host", line_no);
      const auto u = train.user_labels().find(line.substr(0, comma));
      const auto h = train.host_labels().find(line.substr(comma + 1));
      if (!u || !h) throw ParseError("unknown node in '" + line + "'", line_no);
      pairs.push_back({*u, *h, 0.0, test && test->contains(*u, *h), category});
    }
    for (auto& p : pairs) p.score = bundle.scorer->score(p.user, p.host);
  } else if (split) {
    EvalOptions options;
    options.sampling = {category, args.exclude_train_edges};
    options.ratio = args.ratio;
    options.seed = config.options.seed;
    pairs = score_category(*bundle.scorer, *split, options);
  } else {
    throw Error("score needs --pairs or --test");
  }

  std::ofstream file;
  if (!args.out.empty()) file = open_output(args.out);
  std::ostream& out = args.out.empty() ? std::cout : file;
  out << "user,host,score,category" << (test ? ",label" : "") << '\n';
  for (const auto& p : pairs) {
    out << train.user_labels().label(p.user) << ',' << train.host_labels().label(p.host) << ','
        << format_double(p.score) << ',' << to_string(p.category);
    if (test) out << ',' << (p.label ? 1 : 0);
    out << '\n';
  }
  return kExitOk;
}

int run_eval(const EvalArgs& args, const std::vector<std::string>& argv) {
  const auto config = resolve_config(args.fit);
  const auto train = load_graph(args.inputs.graph);
  const auto test = load_test_like(args.test, train);
  const auto split = split_with_inferred_new_nodes(train, test);
  const fs::path out(args.out);
  fs::create_directories(out);
  json summary{{"command", "eval"}, {"argv", argv_json(argv)}, {"scorer", args.scorer.name}, {"results", json::array()}};

  for (const auto& name : args.categories) {
    const auto category = parse_category(name);
    const auto bundle = make_scorer(args.scorer, config, train, args.inputs, &split, category);
    const NegativeSampling sampling{category, args.exclude_train_edges};
    AucResult result;
    if (args.full) {
      result = evaluate_full_auc(*bundle.scorer, split, sampling);
    } else {
      EvalOptions options;
      options.sampling = sampling;
      options.ratio = args.ratio;
      options.seed = config.options.seed;
      result = evaluate_auc(*bundle.scorer, split, options);
    }
    auto doc = auc_summary_json(result, category);
    doc["scorer"] = args.scorer.name;
    doc["negatives"] = args.full ? "all" : "subsampled";
    write_json_file((out / ("auc_" + name + ".json")).string(), doc);
    write_roc(out / ("roc_" + name + ".csv"), result);
    summary["results"].push_back(doc);
    std::printf("%-16s AUC %.4f  (%zu positives, %zu negatives)\n", name.c_str(), result.auc, result.n_pos,
                result.n_neg);

    if (args.repeats > 0) {
      const auto rows = auc_stability(*bundle.scorer, split, args.stability_ratios, args.repeats, sampling,
                                      config.options.seed);
      auto csv = open_output(out / ("stability_" + name + ".csv"));
      csv << "ratio,mean,sd,repeats\n";
      for (const auto& row : rows) {
        csv << format_double(row.ratio) << ',' << format_double(row.mean) << ',' << format_double(row.sd) << ','
            << row.aucs.size() << '\n';
      }
    }
  }
  write_json_file((out / "auc.json").string(), summary);
  return kExitOk;
}

int run_simulate(const SimulateArgs& args, const std::vector<std::string>& argv) {
  const auto config = resolve_config(args.fit);
  const std::uint64_t seed = config.options.seed;
  const auto truth = sample_params(args.n_users, args.n_hosts, {args.user_levels, args.host_levels},
                                   config.hyper.latent_dim, config.hyper, seed);
  const fs::path out(args.out);
  const auto graph = sample_graph(truth.params, truth.users, truth.hosts, stream_key(seed, "cli.simulate.train"));
  std::optional<SparseBipartiteGraph> test;
  if (args.test) test = sample_graph(truth.params, truth.users, truth.hosts, stream_key(seed, "cli.simulate.test"));
  write_bundle(out.string(), truth, graph, test ? &*test : nullptr);

  if (args.snapshots > 0) {
    const auto period_map = PeriodMap::parse(args.period_map);
    const int period = period_map.period();
    if (!args.segment_scale.empty() && args.segment_scale.size() != static_cast<std::size_t>(period)) {
      throw Error("--segment-scale needs one value per segment (" + std::to_string(period) + ")");
    }
    const auto r = truth.params.alpha.cols();
    SeasonalParams seasonal;
    for (int p = 0; p < period; ++p) {
      const double scale = args.segment_scale.empty() ? 1.0 : args.segment_scale[p] / args.segment_scale[0];
      seasonal.gamma.push_back(RowMatrix::Constant(truth.params.alpha.rows(), r, scale));
      seasonal.delta.push_back(RowMatrix::Ones(truth.params.beta.rows(), r));
    }
    const auto sequence = sample_seasonal_sequence(truth.params, seasonal, truth.users, truth.hosts, period_map,
                                                   args.snapshots, stream_key(seed, "cli.simulate.sequence"));
    save_sequence((out / "sequence").string(), sequence);
  }

  json manifest{{"command", "simulate"},
                {"argv", argv_json(argv)},
                {"config", to_json(config)},
                {"user_levels", args.user_levels},
                {"host_levels", args.host_levels},
                {"nnz", graph.nnz()}};
  write_json_file((out / "manifest.json").string(), manifest);
  std::cout << "simulated " << args.n_users << " x " << args.n_hosts << " graph with " << graph.nnz()
            << " edges into " << out.string() << '\n';
  return kExitOk;
}

int run_scree(const ScreeArgs& args) {
  const auto graph = load_graph(args.graph);
  const auto values = scree(graph, args.max_rank, svd_options(args.method, args.seed));
  std::ofstream file;
  if (!args.out.empty()) file = open_output(args.out);
  std::ostream& out = args.out.empty() ? std::cout : file;
  out << "rank,singular_value\n";
  for (Eigen::Index k = 0; k < values.size(); ++k) out << (k + 1) << ',' << format_double(values(k)) << '\n';
  return kExitOk;
}

int run_ablate(const AblateArgs& args) {
  const auto config = resolve_config(args.fit);
  const auto train = load_graph(args.inputs.graph);
  const auto test = load_test_like(args.test, train);
  const auto split = split_with_inferred_new_nodes(train, test);
  const auto users = covariates_or_empty(args.inputs.users, train.user_labels());
  const auto hosts = covariates_or_empty(args.inputs.hosts, train.host_labels());
  const ScorerFactory factory = [&](const CovariateMatrix& u, const CovariateMatrix& h) -> std::unique_ptr<LinkScorer> {
    const EpmfProblem problem(train, u, h);
    return std::make_unique<PlugInScorer>(point_estimates(fit(problem, config.hyper, config.options).state), u, h);
  };
  EvalOptions options;
  options.sampling.category = parse_category(args.category);
  options.ratio = args.ratio;
  options.seed = config.options.seed;
  const double full = evaluate_auc(*factory(users, hosts), split, options).auc;

  json rows = json::array();
  std::printf("full model AUC %.4f\n", full);
  for (const auto side : {Side::kUser, Side::kHost}) {
    const auto& m = side == Side::kUser ? users : hosts;
    for (std::size_t g = 0; g < m.groups().size(); ++g) {
      const auto r = ablate_covariate(factory, users, hosts, {side, g}, split, options, full);
      const char* side_name = side == Side::kUser ? "user" : "host";
      rows.push_back({{"side", side_name},
                      {"group", m.groups()[g].name},
                      {"auc_full", r.auc_full},
                      {"auc_ablated", r.auc_ablated},
                      {"delta", r.delta}});
      std::printf("%s %-20s AUC %.4f  delta %+.4f\n", side_name, m.groups()[g].name.c_str(), r.auc_ablated,
                  r.delta);
    }
  }
  json doc{{"category", args.category}, {"auc_full", full}, {"ablations", rows},
           {"user_levels", design_levels(users)}, {"host_levels", design_levels(hosts)}};
  if (!args.out.empty()) write_json_file(args.out, doc);
  return kExitOk;
}

int run_ingest(const IngestArgs& args) {
  HostField field = HostField::kAuto;
  if (args.host_field == "source") field = HostField::kSource;
  else if (args.host_field == "loghost") field = HostField::kLogHost;
  else if (args.host_field != "auto") throw Error("--host-field must be auto, source or loghost");
  const auto records = load_event_log(args.events, field);
  const fs::path out(args.out);
  fs::create_directories(out);
  bool wrote = false;

  if (args.train_end) {
    if (!args.test_end) throw Error("--train-end needs --test-end");
    const auto split = temporal_split(records, *args.train_end, *args.test_end);
    save_graph((out / "train.txt").string(), split.train);
    save_graph((out / "test.txt").string(), split.test);
    json nodes{{"users", split.new_nodes.users}, {"hosts", split.new_nodes.hosts}};
    write_json_file((out / "new_nodes.json").string(), nodes);
    std::cout << "train " << split.train.nnz() << " edges, test " << split.test.nnz() << " edges, "
              << split.new_nodes.users.size() << " new users, " << split.new_nodes.hosts.size() << " new hosts\n";
    wrote = true;
  }
  if (args.days > 0) {
    if (!args.origin) throw Error("--days needs --origin");
    const auto sequence = daily_snapshots(records, *args.origin, args.days, PeriodMap::parse(args.period_map));
    save_sequence((out / "sequence").string(), sequence);
    std::cout << "wrote " << sequence.length() << " daily snapshots\n";
    wrote = true;
  }
  if (!wrote) throw Error("ingest needs --train-end/--test-end or --origin/--days");
  return kExitOk;
}

}  // namespace linkpmf::cli
