#include "linkpmf/checkpoint.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace linkpmf {

using nlohmann::json;

namespace {

json matrix_json(const RowMatrix& m) {
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

RowMatrix matrix_from(const json& doc, const char* what) {
  try {
    const auto rows = doc.at("rows").get<Eigen::Index>();
    const auto cols = doc.at("cols").get<Eigen::Index>();
    const auto data = doc.at("data").get<std::vector<double>>();
    if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size()) {
      throw ParseError(std::string(what) + ": data length does not match rows x cols", 0);
    }
    RowMatrix m(rows, cols);
    std::copy(data.begin(), data.end(), m.data());
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string(what) + ": " + e.what(), 0);
  }
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from(const json& doc) {
  const auto values = doc.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json block_json(const GammaBlock& b) {
  return {{"shape", matrix_json(b.shape)}, {"rate", matrix_json(b.rate)}};
}

GammaBlock block_from(const json& doc, const char* what) {
  GammaBlock b;
  b.shape = matrix_from(doc.at("shape"), what);
  b.rate = matrix_from(doc.at("rate"), what);
  if (b.shape.rows() != b.rate.rows() || b.shape.cols() != b.rate.cols()) {
    throw ParseError(std::string(what) + ": shape and rate dimensions differ", 0);
  }
  return b;
}

json user_side_json(const UserSide& s) {
  return {{"alpha", block_json(s.alpha)}, {"nu", vector_json(s.nu)}, {"xi", vector_json(s.xi)}};
}

UserSide user_side_from(const json& doc) {
  UserSide s;
  s.alpha = block_from(doc.at("alpha"), "alpha");
  s.nu = vector_from(doc.at("nu"));
  s.xi = vector_from(doc.at("xi"));
  return s;
}

json host_side_json(const HostSide& s) {
  return {{"beta", block_json(s.beta)}, {"nu", vector_json(s.nu)},     {"xi", vector_json(s.xi)},
          {"phi", block_json(s.phi)},   {"nu_phi", s.nu_phi},          {"xi_phi", s.xi_phi}};
}

HostSide host_side_from(const json& doc) {
  HostSide s;
  s.beta = block_from(doc.at("beta"), "beta");
  s.nu = vector_from(doc.at("nu"));
  s.xi = vector_from(doc.at("xi"));
  s.phi = block_from(doc.at("phi"), "phi");
  s.nu_phi = doc.at("nu_phi").get<double>();
  s.xi_phi = doc.at("xi_phi").get<double>();
  return s;
}

json seasonal_block_json(const SeasonalBlock& b) {
  json segments = json::array();
  for (const auto& s : b.segments) segments.push_back(block_json(s));
  return {{"segments", segments}, {"nu", b.nu}, {"xi", b.xi}};
}

SeasonalBlock seasonal_block_from(const json& doc) {
  SeasonalBlock b;
  for (const auto& s : doc.at("segments")) b.segments.push_back(block_from(s, "segment"));
  b.nu = doc.at("nu").get<std::vector<double>>();
  b.xi = doc.at("xi").get<std::vector<double>>();
  return b;
}

void check_header(const json& doc, const std::string& format) {
  if (!doc.is_object() || doc.value("format", "") != format) {
    throw ParseError("not a " + format + " document", 0);
  }
  const int version = doc.value("version", 0);
  if (version != kCheckpointVersion) {
    throw Error("unsupported " + format + " version " + std::to_string(version));
  }
}

json hierarchy_json(const GammaHierarchy& g) { return {{"a", g.a}, {"b", g.b}, {"c", g.c}}; }

GammaHierarchy hierarchy_from(const json& doc, GammaHierarchy g, const std::string& name) {
  if (!doc.is_object()) throw ParseError("'" + name + "' must be an object", 0);
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!it.value().is_number()) throw ParseError("'" + name + "." + it.key() + "' must be a number", 0);
    if (it.key() == "a") g.a = it.value().get<double>();
    else if (it.key() == "b") g.b = it.value().get<double>();
    else if (it.key() == "c") g.c = it.value().get<double>();
    else throw ParseError("unknown key '" + name + "." + it.key() + "'", 0);
  }
  return g;
}

template <typename Fn>
auto parse_guard(Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what(), 0);
  }
}

}  // namespace

json to_json(const Hyperparameters& hyper) {
  return {{"R", hyper.latent_dim},
          {"alpha", hierarchy_json(hyper.alpha)},
          {"beta", hierarchy_json(hyper.beta)},
          {"phi", hierarchy_json(hyper.phi)},
          {"gamma", hierarchy_json(hyper.gamma)},
          {"delta", hierarchy_json(hyper.delta)}};
}

Hyperparameters hyperparameters_from_json(const json& doc) {
  Hyperparameters h;
  if (!doc.is_object()) throw ParseError("hyperparameters must be a JSON object", 0);
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const auto& key = it.key();
    if (key == "R") {
      if (!it.value().is_number_integer()) throw ParseError("'R' must be an integer", 0);
      h.latent_dim = it.value().get<int>();
    } else if (key == "alpha") {
      h.alpha = hierarchy_from(it.value(), h.alpha, key);
    } else if (key == "beta") {
      h.beta = hierarchy_from(it.value(), h.beta, key);
    } else if (key == "phi") {
      h.phi = hierarchy_from(it.value(), h.phi, key);
    } else if (key == "gamma") {
      h.gamma = hierarchy_from(it.value(), h.gamma, key);
    } else if (key == "delta") {
      h.delta = hierarchy_from(it.value(), h.delta, key);
    } else {
      throw ParseError("unknown hyperparameter key '" + key + "'", 0);
    }
  }
  h.validate();
  return h;
}

json to_json(const FitConfig& config) {
  json doc = to_json(config.hyper);
  doc["version"] = kCheckpointVersion;
  doc["tol"] = config.options.tol;
  doc["max_iter"] = config.options.max_iter;
  doc["seed"] = config.options.seed;
  doc["threads"] = config.options.threads;
  return doc;
}

FitConfig fit_config_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("fit configuration must be a JSON object", 0);
  static const std::set<std::string> hyper_keys{"R", "alpha", "beta", "phi", "gamma", "delta"};
  FitConfig config;
  json hyper = json::object();
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const auto& key = it.key();
    const auto& value = it.value();
    if (hyper_keys.contains(key)) {
      hyper[key] = value;
    } else if (key == "version") {
      if (value != kCheckpointVersion) {
        throw Error("unsupported configuration version " + value.dump());
      }
    } else if (key == "tol") {
      if (!value.is_number() || !(value.get<double>() > 0)) throw ParseError("'tol' must be positive", 0);
      config.options.tol = value.get<double>();
    } else if (key == "max_iter") {
      if (!value.is_number_integer() || value.get<int>() < 1) {
        throw ParseError("'max_iter' must be a positive integer", 0);
      }
      config.options.max_iter = value.get<int>();
    } else if (key == "seed") {
      if (!value.is_number_unsigned()) throw ParseError("'seed' must be a non-negative integer", 0);
      config.options.seed = value.get<std::uint64_t>();
    } else if (key == "threads") {
      if (!value.is_number_integer()) throw ParseError("'threads' must be an integer", 0);
      config.options.threads = value.get<int>();
    } else if (key == "time_varying_phi") {
      if (value != false) throw Error("time-varying covariate effects are not supported");
    } else {
      throw ParseError("unknown configuration key '" + key + "'", 0);
    }
  }
  config.hyper = hyperparameters_from_json(hyper);
  return config;
}

json params_to_json(const PointParams& params, const Hyperparameters& hyper,
                    const std::string& variant) {
  return {{"format", "linkpmf-params"},
          {"version", kCheckpointVersion},
          {"variant", variant},
          {"n_users", params.alpha.rows()},
          {"n_hosts", params.beta.rows()},
          {"K", params.phi.rows()},
          {"H", params.phi.cols()},
          {"R", params.alpha.cols()},
          {"hyper", to_json(hyper)},
          {"alpha", matrix_json(params.alpha)},
          {"beta", matrix_json(params.beta)},
          {"phi", matrix_json(params.phi)}};
}

PointParams params_from_json(const json& doc, Hyperparameters* hyper, std::string* variant) {
  check_header(doc, "linkpmf-params");
  return parse_guard([&] {
    PointParams p{matrix_from(doc.at("alpha"), "alpha"), matrix_from(doc.at("beta"), "beta"),
                  matrix_from(doc.at("phi"), "phi")};
    if (p.alpha.cols() != p.beta.cols()) throw ParseError("alpha and beta disagree on R", 0);
    p.validate();
    if (hyper) *hyper = hyperparameters_from_json(doc.at("hyper"));
    if (variant) *variant = doc.at("variant").get<std::string>();
    return p;
  });
}

json state_to_json(const VariationalState& state, const Hyperparameters& hyper,
                   const std::string& variant) {
  return {{"format", "linkpmf-state"},   {"version", kCheckpointVersion},
          {"variant", variant},          {"hyper", to_json(hyper)},
          {"users", user_side_json(state.users)}, {"hosts", host_side_json(state.hosts)}};
}

VariationalState state_from_json(const json& doc, Hyperparameters* hyper) {
  check_header(doc, "linkpmf-state");
  return parse_guard([&] {
    VariationalState s;
    s.users = user_side_from(doc.at("users"));
    s.hosts = host_side_from(doc.at("hosts"));
    if (hyper) *hyper = hyperparameters_from_json(doc.at("hyper"));
    return s;
  });
}

json seasonal_state_to_json(const SeasonalState& state, const Hyperparameters& hyper) {
  return {{"format", "linkpmf-state"},
          {"version", kCheckpointVersion},
          {"variant", "sepmf"},
          {"hyper", to_json(hyper)},
          {"period_map", state.period_map.spec()},
          {"users", user_side_json(state.users)},
          {"hosts", host_side_json(state.hosts)},
          {"gamma", seasonal_block_json(state.gamma)},
          {"delta", seasonal_block_json(state.delta)}};
}

SeasonalState seasonal_state_from_json(const json& doc, Hyperparameters* hyper) {
  check_header(doc, "linkpmf-state");
  return parse_guard([&] {
    SeasonalState s;
    s.period_map = PeriodMap::parse(doc.at("period_map").get<std::string>());
    s.users = user_side_from(doc.at("users"));
    s.hosts = host_side_from(doc.at("hosts"));
    s.gamma = seasonal_block_from(doc.at("gamma"));
    s.delta = seasonal_block_from(doc.at("delta"));
    if (hyper) *hyper = hyperparameters_from_json(doc.at("hyper"));
    return s;
  });
}

json joint_state_to_json(const JointState& state, const Hyperparameters& hyper) {
  return {{"format", "linkpmf-state"},
          {"version", kCheckpointVersion},
          {"variant", "jepmf"},
          {"hyper", to_json(hyper)},
          {"users", user_side_json(state.users)},
          {"hosts_a", host_side_json(state.hosts_a)},
          {"hosts_b", host_side_json(state.hosts_b)}};
}

JointState joint_state_from_json(const json& doc, Hyperparameters* hyper) {
  check_header(doc, "linkpmf-state");
  return parse_guard([&] {
    JointState s;
    s.users = user_side_from(doc.at("users"));
    s.hosts_a = host_side_from(doc.at("hosts_a"));
    s.hosts_b = host_side_from(doc.at("hosts_b"));
    if (hyper) *hyper = hyperparameters_from_json(doc.at("hyper"));
    return s;
  });
}

json auc_summary_json(const AucResult& result, PairCategory category) {
  return {{"category", to_string(category)},
          {"auc", result.auc},
          {"n_pos", result.n_pos},
          {"n_neg", result.n_neg},
          {"sampling_seed", result.sampling_seed}};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

void write_json_file(const std::string& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << doc.dump(2) << '\n';
}

}  // namespace linkpmf
