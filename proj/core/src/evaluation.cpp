#include "linkpmf/evaluation.hpp"

#include <cmath>

#include "linkpmf/random.hpp"
#include "parallel.hpp"

namespace linkpmf {

namespace {

void score_pairs(const LinkScorer& scorer, std::vector<ScoredPair>& pairs) {
  LINKPMF_PARALLEL_FOR
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(pairs.size()); ++k) {
    auto& p = pairs[static_cast<std::size_t>(k)];
    p.score = scorer.score(p.user, p.host);
  }
}

std::vector<ScoredPair> labelled(const std::vector<Edge>& cells, bool label, PairCategory category) {
  std::vector<ScoredPair> out;
  out.reserve(cells.size());
  for (const Edge& e : cells) out.push_back({e.user, e.host, 0.0, label, category});
  return out;
}

std::size_t negative_count(std::size_t positives, double ratio) {
  if (!(ratio > 0)) throw Error("negative sampling ratio must be positive");
  return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(positives)));
}

}  // namespace

std::vector<ScoredPair> score_category(const LinkScorer& scorer, const EvalSplit& split,
                                       const EvalOptions& options) {
  const auto category = options.sampling.category;
  auto pairs = labelled(positive_pairs(split, category), true, category);
  const auto negatives =
      subsample_negatives(split, options.sampling, negative_count(pairs.size(), options.ratio),
                          options.seed);
  for (const Edge& e : negatives) pairs.push_back({e.user, e.host, 0.0, false, category});
  score_pairs(scorer, pairs);
  return pairs;
}

AucResult evaluate_auc(const LinkScorer& scorer, const EvalSplit& split, const EvalOptions& options) {
  const auto pairs = score_category(scorer, split, options);
  AucResult result = compute_auc(pairs);
  result.sampling_seed = options.seed;
  return result;
}

AucResult evaluate_full_auc(const LinkScorer& scorer, const EvalSplit& split,
                            const NegativeSampling& sampling) {
  auto pairs = labelled(positive_pairs(split, sampling.category), true, sampling.category);
  for (const Edge& e : all_negatives(split, sampling)) {
    pairs.push_back({e.user, e.host, 0.0, false, sampling.category});
  }
  score_pairs(scorer, pairs);
  return compute_auc(pairs);
}

std::vector<StabilityRow> auc_stability(const LinkScorer& scorer, const EvalSplit& split,
                                        const std::vector<double>& ratios, int n_repeats,
                                        const NegativeSampling& sampling, std::uint64_t seed) {
  if (n_repeats < 2) throw Error("auc_stability needs at least two repeats");
  auto positives = labelled(positive_pairs(split, sampling.category), true, sampling.category);
  score_pairs(scorer, positives);

  std::vector<StabilityRow> rows;
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    StabilityRow row;
    row.ratio = ratios[k];
    const std::size_t n_neg = negative_count(positives.size(), ratios[k]);
    for (int rep = 0; rep < n_repeats; ++rep) {
      const std::uint64_t rep_seed = mix64(seed ^ mix64((k << 32) | static_cast<std::uint64_t>(rep)));
      auto pairs = positives;
      auto negatives = labelled(subsample_negatives(split, sampling, n_neg, rep_seed), false,
                                sampling.category);
      score_pairs(scorer, negatives);
      pairs.insert(pairs.end(), negatives.begin(), negatives.end());
      row.aucs.push_back(compute_auc(pairs).auc);
    }
    const double n = static_cast<double>(row.aucs.size());
    row.mean = pairwise_sum(row.aucs) / n;
    double ss = 0.0;
    for (const double a : row.aucs) ss += (a - row.mean) * (a - row.mean);
    row.sd = std::sqrt(ss / (n - 1.0));
    rows.push_back(std::move(row));
  }
  return rows;
}

AblationResult ablate_covariate(const ScorerFactory& factory, const CovariateMatrix& users,
                                const CovariateMatrix& hosts, CovariateGroupRef group,
                                const EvalSplit& split, const EvalOptions& options) {
  const auto full = factory(users, hosts);
  return ablate_covariate(factory, users, hosts, group, split, options,
                          evaluate_auc(*full, split, options).auc);
}

AblationResult ablate_covariate(const ScorerFactory& factory, const CovariateMatrix& users,
                                const CovariateMatrix& hosts, CovariateGroupRef group,
                                const EvalSplit& split, const EvalOptions& options,
                                double auc_full) {
  const auto& side = group.side == Side::kUser ? users : hosts;
  if (group.group >= side.groups().size()) {
    throw Error("covariate group " + std::to_string(group.group) + " does not exist");
  }
  const CovariateMatrix reduced = side.without_group(group.group);
  const auto scorer = group.side == Side::kUser ? factory(reduced, hosts) : factory(users, reduced);
  AblationResult out;
  out.group = group;
  out.auc_full = auc_full;
  out.auc_ablated = evaluate_auc(*scorer, split, options).auc;
  out.delta = out.auc_full - out.auc_ablated;
  return out;
}

}  // namespace linkpmf
