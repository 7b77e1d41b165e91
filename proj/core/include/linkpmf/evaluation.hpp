#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "linkpmf/auc.hpp"
#include "linkpmf/covariates.hpp"
#include "linkpmf/sampling.hpp"
#include "linkpmf/scorers.hpp"

namespace linkpmf {

struct EvalOptions {
  NegativeSampling sampling;
  double ratio = 3.0;  // negatives per positive
  std::uint64_t seed = 0;
};

/// Positives of the category plus round(ratio * positives) sampled negatives.
std::vector<ScoredPair> score_category(const LinkScorer& scorer, const EvalSplit& split,
                                       const EvalOptions& options);

AucResult evaluate_auc(const LinkScorer& scorer, const EvalSplit& split, const EvalOptions& options);

/// AUC against every eligible negative cell.
AucResult evaluate_full_auc(const LinkScorer& scorer, const EvalSplit& split,
                            const NegativeSampling& sampling);

struct StabilityRow {
  double ratio = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  std::vector<double> aucs;
};

/// Repeats the subsampled AUC `n_repeats` times per ratio with independent
/// negative samples. Requires n_repeats >= 2.
std::vector<StabilityRow> auc_stability(const LinkScorer& scorer, const EvalSplit& split,
                                        const std::vector<double>& ratios, int n_repeats,
                                        const NegativeSampling& sampling, std::uint64_t seed);

/// A categorical covariate group on one side.
struct CovariateGroupRef {
  Side side = Side::kUser;
  std::size_t group = 0;
};

/// Builds a scorer from the given covariates (typically: fit, then wrap).
using ScorerFactory = std::function<std::unique_ptr<LinkScorer>(const CovariateMatrix& users,
                                                                const CovariateMatrix& hosts)>;

struct AblationResult {
  CovariateGroupRef group;
  double auc_full = 0.0;
  double auc_ablated = 0.0;
  double delta = 0.0;  // auc_full - auc_ablated
};

/// Refits without the group's columns and compares AUC on the same sample.
AblationResult ablate_covariate(const ScorerFactory& factory, const CovariateMatrix& users,
                                const CovariateMatrix& hosts, CovariateGroupRef group,
                                const EvalSplit& split, const EvalOptions& options);

/// Same, reusing an already-computed AUC for the full model.
AblationResult ablate_covariate(const ScorerFactory& factory, const CovariateMatrix& users,
                                const CovariateMatrix& hosts, CovariateGroupRef group,
                                const EvalSplit& split, const EvalOptions& options,
                                double auc_full);

}  // namespace linkpmf
