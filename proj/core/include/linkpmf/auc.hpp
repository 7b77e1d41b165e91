#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "linkpmf/common.hpp"

namespace linkpmf {

enum class PairCategory { kAll, kNew, kColdStartUser, kColdStartHost };

std::string to_string(PairCategory category);
PairCategory parse_category(const std::string& name);

struct ScoredPair {
  NodeId user = 0;
  NodeId host = 0;
  double score = 0.0;
  bool label = false;
  PairCategory category = PairCategory::kAll;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct AucResult {
  double auc = 0.5;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::vector<RocPoint> roc;  // (0,0) ... (1,1)
  std::uint64_t sampling_seed = 0;
};

/// Rank AUC, ties counted 1/2: P(score_pos > score_neg) + P(equal)/2.
/// Throws Error unless both classes are present or a score is non-finite.
AucResult compute_auc(std::span<const ScoredPair> scored);

/// Trapezoidal area under an ROC polyline.
double trapezoid_area(std::span<const RocPoint> roc);

}  // namespace linkpmf
