#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "linkpmf/auc.hpp"
#include "linkpmf/cavi.hpp"
#include "linkpmf/joint.hpp"
#include "linkpmf/model.hpp"
#include "linkpmf/seasonal.hpp"

namespace linkpmf {

inline constexpr int kCheckpointVersion = 1;

/// Fit configuration file. Unknown keys are rejected so typos surface.
struct FitConfig {
  Hyperparameters hyper;
  FitOptions options;
};

nlohmann::json to_json(const Hyperparameters& hyper);
Hyperparameters hyperparameters_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const FitConfig& config);
/// Missing keys keep their defaults. Throws ParseError on bad values or
/// unknown keys and Error on an unsupported version.
FitConfig fit_config_from_json(const nlohmann::json& doc);

/// {"format": "linkpmf-params", "version": 1, "variant": ..., dimensions,
///  "hyper": {...}, "alpha"/"beta"/"phi": row-major arrays}
nlohmann::json params_to_json(const PointParams& params, const Hyperparameters& hyper,
                              const std::string& variant = "epmf");
PointParams params_from_json(const nlohmann::json& doc, Hyperparameters* hyper = nullptr,
                             std::string* variant = nullptr);

/// Gamma blocks and hyper-factors; theta/chi are omitted and rebuilt by one
/// update_theta_chi call.
nlohmann::json state_to_json(const VariationalState& state, const Hyperparameters& hyper,
                             const std::string& variant = "epmf");
VariationalState state_from_json(const nlohmann::json& doc, Hyperparameters* hyper = nullptr);

nlohmann::json seasonal_state_to_json(const SeasonalState& state, const Hyperparameters& hyper);
SeasonalState seasonal_state_from_json(const nlohmann::json& doc, Hyperparameters* hyper = nullptr);

nlohmann::json joint_state_to_json(const JointState& state, const Hyperparameters& hyper);
JointState joint_state_from_json(const nlohmann::json& doc, Hyperparameters* hyper = nullptr);

nlohmann::json auc_summary_json(const AucResult& result, PairCategory category);

nlohmann::json read_json_file(const std::string& path);
/// Pretty-printed, trailing newline; byte-identical for identical documents.
void write_json_file(const std::string& path, const nlohmann::json& doc);

}  // namespace linkpmf
